//! Accuracy protocol and report emission.
//!
//! Every base quadruple is expanded to 8 positive and 24 negative forms;
//! a *decider* — any function from quadruple to valid/invalid — is scored
//! on three axes: positive accuracy over the 8·N positives, negative
//! accuracy over the 24·N negatives, and base accuracy over the N raw
//! quadruples. The protocol is decider-agnostic, so the trained model and
//! all symbolic baselines run through the same code path.
//!
//! Cross-language transfer reuses the protocol with mixed parts: *full*
//! transfer applies a source model unchanged to target-language data
//! (unknown target characters embed as zero rows); *partial* transfer
//! feeds the target language's embedder into the source classifier.
//!
//! Reports are deterministic: a fixed-header CSV, a text table, and — for
//! transfer runs — one source×target matrix CSV per accuracy category.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::augment;
use crate::checkpoint::Checkpoint;
use crate::classifier::{self, ClassifierParams};
use crate::corpus::{AnalogyDataset, AnalogyQuadruple};
use crate::embedder::{self, CharVocab, EmbedderParams};
use crate::error::{Error, Result};
use crate::nn::Tensor;

/// How the evaluated decider relates to the evaluated data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Model evaluated on its own language.
    Native,
    /// Source embedder + source classifier on target-language data.
    TransferFull,
    /// Target embedder + source classifier on target-language data.
    TransferPartial,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Native => "native",
            Mode::TransferFull => "transfer_full",
            Mode::TransferPartial => "transfer_partial",
        }
    }
}

/// One evaluation's scores and identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    /// Language of the evaluated data.
    pub language: String,
    /// Language the decider was trained on ("-" for untrained deciders).
    pub source: String,
    /// Language of the evaluated data (equals `language`).
    pub target: String,
    pub mode: Mode,
    /// Percent of the 8·N positive forms classified valid.
    pub pos_acc: f64,
    /// Percent of the 24·N negative forms classified invalid.
    pub neg_acc: f64,
    /// Percent of the N raw quadruples classified valid.
    pub base_acc: f64,
    pub n_base: usize,
    pub n_pos: usize,
    pub n_neg: usize,
    /// Seed of the run that produced the decider (0 for seedless deciders).
    pub seed: u64,
    /// Fraction of bases whose 8 equivalent forms all got the same
    /// decision — how much of the intended form-invariance was learned.
    /// Reported alongside the accuracies; not part of the CSV schema.
    pub symmetry_rate: f64,
}

/// Score a decider over an evaluation set.
///
/// Counts are exact: 8·N positives, 24·N negatives, N bases (the base
/// decision reuses the first positive form, which is the base quadruple
/// itself). Errors on an empty test set; decider errors propagate.
pub fn evaluate_classifier<F>(decider: &mut F, test: &AnalogyDataset) -> Result<Metrics>
where
    F: FnMut(&AnalogyQuadruple) -> Result<bool> + ?Sized,
{
    if test.is_empty() {
        return Err(Error::InvalidInput(format!(
            "cannot evaluate on an empty test set ({})",
            test.language
        )));
    }
    let n = test.len();
    let (mut pos_seen, mut neg_seen) = (0usize, 0usize);
    let (mut pos_correct, mut neg_correct, mut base_correct) = (0usize, 0usize, 0usize);
    let mut symmetric = 0usize;
    for q in &test.quadruples {
        let set = augment::augment_for_eval(q);
        let mut first = None;
        let mut all_same = true;
        for (idx, p) in set.positives.iter().enumerate() {
            let v = decider(p)?;
            pos_seen += 1;
            pos_correct += v as usize;
            match first {
                None => {
                    first = Some(v);
                    base_correct += v as usize; // positives[0] is the base form
                    debug_assert_eq!(idx, 0);
                }
                Some(f) => all_same &= f == v,
            }
        }
        symmetric += all_same as usize;
        for ng in &set.negatives {
            let v = decider(ng)?;
            neg_seen += 1;
            neg_correct += !v as usize;
        }
    }
    assert_eq!(pos_seen, 8 * n, "augmentation must yield exactly 8 positives per base");
    assert_eq!(neg_seen, 24 * n, "augmentation must yield exactly 24 negatives per base");
    let pct = |correct: usize, total: usize| 100.0 * correct as f64 / total as f64;
    Ok(Metrics {
        language: test.language.clone(),
        source: test.language.clone(),
        target: test.language.clone(),
        mode: Mode::Native,
        pos_acc: pct(pos_correct, pos_seen),
        neg_acc: pct(neg_correct, neg_seen),
        base_acc: pct(base_correct, n),
        n_base: n,
        n_pos: pos_seen,
        n_neg: neg_seen,
        seed: 0,
        symmetry_rate: symmetric as f64 / n as f64,
    })
}

/// A decider assembled from model parts, with a per-word embedding cache
/// so each distinct word is embedded once per evaluation. Fails fast when
/// the embedder's output does not fit the classifier's input.
pub fn model_decider<'a>(
    emb: &'a EmbedderParams<f32>,
    vocab: &'a CharVocab,
    cls: &'a ClassifierParams<f32>,
    threshold: f32,
) -> Result<impl FnMut(&AnalogyQuadruple) -> Result<bool> + 'a> {
    if emb.output_dim() != cls.config.embedding_dim {
        return Err(Error::DimensionMismatch(format!(
            "embedder produces {}-dim embeddings, classifier expects {}",
            emb.output_dim(),
            cls.config.embedding_dim
        )));
    }
    let mut cache: HashMap<String, Tensor<f32>> = HashMap::new();
    Ok(move |q: &AnalogyQuadruple| {
        for w in q.words() {
            if !cache.contains_key(w) {
                cache.insert(w.to_string(), embedder::embed_word(emb, vocab, w)?);
            }
        }
        let [a, b, c, d] = q.words().map(|w| &cache[w]);
        let p = classifier::score_quadruple(cls, a, b, c, d)?;
        Ok(classifier::classify(p, threshold))
    })
}

/// The native decider of a trained checkpoint.
pub fn checkpoint_decider(
    ckpt: &Checkpoint,
) -> Result<impl FnMut(&AnalogyQuadruple) -> Result<bool> + '_> {
    model_decider(
        &ckpt.embedder,
        &ckpt.vocab,
        &ckpt.classifier,
        ckpt.config.threshold as f32,
    )
}

/// Evaluate a checkpoint on its own language's test data.
pub fn evaluate_checkpoint(ckpt: &Checkpoint, test: &AnalogyDataset) -> Result<Metrics> {
    let mut decider = checkpoint_decider(ckpt)?;
    let mut m = evaluate_classifier(&mut decider, test)?;
    m.source = ckpt.language.clone();
    m.seed = ckpt.config.seed;
    Ok(m)
}

/// Full transfer: the source model, embedder and classifier both, applied
/// unchanged to target-language data. Characters outside the source
/// vocabulary take the zero-embedding path.
pub fn transfer_full(source: &Checkpoint, target_test: &AnalogyDataset) -> Result<Metrics> {
    let mut decider = checkpoint_decider(source)?;
    let mut m = evaluate_classifier(&mut decider, target_test)?;
    m.mode = Mode::TransferFull;
    m.source = source.language.clone();
    m.seed = source.config.seed;
    Ok(m)
}

/// Partial transfer: the target language's embedder feeds the source
/// classifier. Errors when the embedding dimensions disagree.
pub fn transfer_partial(
    source: &Checkpoint,
    target: &Checkpoint,
    target_test: &AnalogyDataset,
) -> Result<Metrics> {
    let mut decider = model_decider(
        &target.embedder,
        &target.vocab,
        &source.classifier,
        source.config.threshold as f32,
    )?;
    let mut m = evaluate_classifier(&mut decider, target_test)?;
    m.mode = Mode::TransferPartial;
    m.source = source.language.clone();
    m.seed = source.config.seed;
    Ok(m)
}

/// The pinned schema of metrics.csv.
pub const METRICS_CSV_HEADER: &str =
    "language,source,target,mode,pos_acc,neg_acc,base_acc,n_base,n_pos,n_neg,seed";

/// Write metrics.csv, a text table (report.txt), and — when transfer rows
/// are present — a source×target matrix CSV per accuracy category and
/// transfer mode. Returns the written paths. Emission is deterministic:
/// the same metrics produce byte-identical files.
pub fn emit_report(metrics: &[Metrics], out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();

    let csv_path = out_dir.join("metrics.csv");
    let mut csv = Vec::new();
    writeln!(csv, "{METRICS_CSV_HEADER}").expect("write to vec");
    for m in metrics {
        writeln!(
            csv,
            "{},{},{},{},{:.2},{:.2},{:.2},{},{},{},{}",
            m.language,
            m.source,
            m.target,
            m.mode.as_str(),
            m.pos_acc,
            m.neg_acc,
            m.base_acc,
            m.n_base,
            m.n_pos,
            m.n_neg,
            m.seed
        )
        .expect("write to vec");
    }
    std::fs::write(&csv_path, csv).map_err(|e| Error::io(&csv_path, e))?;
    written.push(csv_path);

    let txt_path = out_dir.join("report.txt");
    let mut txt = Vec::new();
    writeln!(
        txt,
        "{:<12} {:<12} {:<12} {:<16} {:>8} {:>8} {:>8} {:>7} {:>9}",
        "language", "source", "target", "mode", "pos", "neg", "base", "n_base", "symmetry"
    )
    .expect("write to vec");
    for m in metrics {
        writeln!(
            txt,
            "{:<12} {:<12} {:<12} {:<16} {:>8.2} {:>8.2} {:>8.2} {:>7} {:>9.3}",
            m.language,
            m.source,
            m.target,
            m.mode.as_str(),
            m.pos_acc,
            m.neg_acc,
            m.base_acc,
            m.n_base,
            m.symmetry_rate
        )
        .expect("write to vec");
    }
    std::fs::write(&txt_path, txt).map_err(|e| Error::io(&txt_path, e))?;
    written.push(txt_path);

    for mode in [Mode::TransferFull, Mode::TransferPartial] {
        let rows: Vec<&Metrics> = metrics.iter().filter(|m| m.mode == mode).collect();
        if rows.is_empty() {
            continue;
        }
        let mut sources: Vec<&str> = rows.iter().map(|m| m.source.as_str()).collect();
        sources.sort_unstable();
        sources.dedup();
        let mut targets: Vec<&str> = rows.iter().map(|m| m.target.as_str()).collect();
        targets.sort_unstable();
        targets.dedup();
        let categories: [(&str, fn(&Metrics) -> f64); 3] = [
            ("positive", |m| m.pos_acc),
            ("negative", |m| m.neg_acc),
            ("base", |m| m.base_acc),
        ];
        for (name, pick) in categories {
            let path = out_dir.join(format!("matrix_{}_{}.csv", mode.as_str(), name));
            let mut buf = Vec::new();
            writeln!(buf, "source,{}", targets.join(",")).expect("write to vec");
            for s in &sources {
                write!(buf, "{s}").expect("write to vec");
                for t in &targets {
                    let cell = rows
                        .iter()
                        .rev() // last row for a pair wins, deterministically
                        .find(|m| m.source == *s && m.target == *t)
                        .map(|m| format!("{:.2}", pick(m)))
                        .unwrap_or_default();
                    write!(buf, ",{cell}").expect("write to vec");
                }
                writeln!(buf).expect("write to vec");
            }
            std::fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}
