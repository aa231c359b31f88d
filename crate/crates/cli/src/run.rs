//! Execution of the subcommands: resolve options, do the work, echo the
//! resolved configuration next to the outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use morpho_analogy::augment::{self, AugmentedSet};
use morpho_analogy::baselines::{self, BaselineRecord};
use morpho_analogy::checkpoint::Checkpoint;
use morpho_analogy::corpus::{self, AnalogyDataset, AnalogyQuadruple, Split};
use morpho_analogy::error::{Error, Result};
use morpho_analogy::eval::{self, Metrics};
use morpho_analogy::nn::gradcheck::{self, LayerKind};
use morpho_analogy::synth::{self, SynthConfig};
use morpho_analogy::train::{self, TrainConfig};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{
    AugMode, AugmentOpts, BaselineOpts, Cli, Cmd, CoverageOpts, DataFormat, EvalOpts,
    ExtractFormat, ExtractOpts, GradcheckOpts, Merge, Method, StatsOpts, SynthOpts, TrainOpts,
    TransferOpts,
};

/// Progress messages go to standard error so output files and stdout stay
/// machine-readable; `--quiet` turns them off.
struct Log {
    quiet: bool,
}

impl Log {
    fn note(&self, msg: String) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

/// Print a result line to stdout. A consumer that stops reading early
/// (e.g. `morphan stats | head`) closes the pipe; that is not a failure.
fn emit(line: String) -> Result<()> {
    use std::io::Write;
    match writeln!(std::io::stdout(), "{line}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::io("stdout", e)),
        _ => Ok(()),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidInput("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("cannot size the thread pool: {e}")))?;
    }
    let log = Log { quiet: cli.quiet };
    let config = cli.config.as_deref();
    match cli.cmd {
        Cmd::Extract(o) => extract(resolve(o, config)?, &log),
        Cmd::Augment(o) => augment_cmd(resolve(o, config)?, &log),
        Cmd::Train(o) => train_cmd(resolve(o, config)?, &log),
        Cmd::Eval(o) => eval_cmd(resolve(o, config)?, &log),
        Cmd::Baseline(o) => baseline(resolve(o, config)?, &log),
        Cmd::Transfer(o) => transfer(resolve(o, config)?, &log),
        Cmd::Coverage(o) => coverage(resolve(o, config)?),
        Cmd::Stats(o) => stats(resolve(o, config)?),
        Cmd::Gradcheck(o) => gradcheck_cmd(resolve(o, config)?, &log),
        Cmd::Synth(o) => synth_cmd(resolve(o, config)?, &log),
    }
}

/// Apply the precedence rule: flags, then config-file values.
fn resolve<T: Merge + DeserializeOwned>(flags: T, config: Option<&Path>) -> Result<T> {
    let Some(path) = config else { return Ok(flags) };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let from_file: T = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    Ok(flags.or(from_file))
}

/// A field that must be set by a flag or the config file.
fn req<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| {
        Error::InvalidInput(format!("{flag} is required (flag or config-file key)"))
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("options serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Echo the resolved options beside a single output file: `<out>.run.json`.
fn echo_beside(out: &Path, resolved: &impl Serialize) -> Result<()> {
    let mut name = out.as_os_str().to_owned();
    name.push(".run.json");
    write_json(Path::new(&name), resolved)
}

/// Echo the resolved options inside an output directory.
fn echo_inside(dir: &Path, resolved: &impl Serialize) -> Result<()> {
    write_json(&dir.join("run-config.json"), resolved)
}

/// Read a test/train corpus into quadruples.
fn load_quadruples(path: &Path, format: DataFormat) -> Result<Vec<AnalogyQuadruple>> {
    match format {
        DataFormat::Quads => corpus::read_quadruples(path),
        DataFormat::Sigmorphon => {
            let triples = corpus::parse_sigmorphon(path, true)?;
            Ok(corpus::extract_sigmorphon_analogies(&triples))
        }
    }
}

fn subsample(
    quads: Vec<AnalogyQuadruple>,
    sample: Option<usize>,
    seed: u64,
) -> Vec<AnalogyQuadruple> {
    match sample {
        Some(n) => corpus::sample_quadruples(&quads, n, seed),
        None => quads,
    }
}

fn extract(o: ExtractOpts, log: &Log) -> Result<()> {
    let input = req(o.input.clone(), "--in")?;
    let out = req(o.out.clone(), "--out")?;
    let format = o.format.unwrap_or(ExtractFormat::Sigmorphon);
    let nfc = o.nfc.unwrap_or(true);
    let quads = match format {
        ExtractFormat::Sigmorphon => {
            corpus::extract_sigmorphon_analogies(&corpus::parse_sigmorphon(&input, nfc)?)
        }
        ExtractFormat::Pairs => {
            let files = if input.is_dir() {
                let mut fs: Vec<PathBuf> = std::fs::read_dir(&input)
                    .map_err(|e| Error::io(&input, e))?
                    .filter_map(|entry| entry.ok().map(|e| e.path()))
                    .filter(|p| p.is_file())
                    .collect();
                fs.sort();
                fs
            } else {
                vec![input.clone()]
            };
            let mut pairs = Vec::new();
            for f in &files {
                pairs.extend(corpus::parse_relation_pairs(f, nfc)?);
            }
            corpus::extract_pair_analogies(&pairs)
        }
    };
    corpus::write_quadruples(&out, &quads)?;
    let resolved = ExtractOpts {
        format: Some(format),
        nfc: Some(nfc),
        ..o
    };
    echo_beside(&out, &resolved)?;
    log.note(format!("extracted {} quadruples into {}", quads.len(), out.display()));
    Ok(())
}

fn augment_cmd(o: AugmentOpts, log: &Log) -> Result<()> {
    let input = req(o.input.clone(), "--in")?;
    let out = req(o.out.clone(), "--out")?;
    let mode = o.mode.unwrap_or(AugMode::Train);
    let extended = o.extended.unwrap_or(false);
    let dedup = o.dedup.unwrap_or(false);
    if extended && mode == AugMode::Eval {
        return Err(Error::InvalidInput(
            "--extended applies to train mode; eval mode always uses 24 negatives".into(),
        ));
    }
    let quads = corpus::read_quadruples(&input)?;
    let mut examples = Vec::new();
    for q in &quads {
        let mut set = match (mode, extended) {
            (AugMode::Eval, _) => augment::augment_for_eval(q),
            (AugMode::Train, false) => augment::augment_for_training(q),
            (AugMode::Train, true) => AugmentedSet {
                origin: q.clone(),
                positives: augment::equivalent_forms(q),
                negatives: augment::negative_forms_extended(q),
            },
        };
        if dedup {
            augment::dedup_conflicts(&mut set);
        }
        examples.extend(set.examples().cloned());
    }
    augment::write_labeled(&out, &examples)?;
    let resolved = AugmentOpts {
        mode: Some(mode),
        extended: Some(extended),
        dedup: Some(dedup),
        ..o
    };
    echo_beside(&out, &resolved)?;
    log.note(format!(
        "augmented {} bases into {} labeled examples in {}",
        quads.len(),
        examples.len(),
        out.display()
    ));
    Ok(())
}

fn train_cmd(o: TrainOpts, log: &Log) -> Result<()> {
    let data = req(o.data.clone(), "--data")?;
    let lang = req(o.lang.clone(), "--lang")?;
    let out = req(o.out.clone(), "--out")?;
    let format = o.format.unwrap_or(DataFormat::Sigmorphon);
    let defaults = TrainConfig::default();
    let config = TrainConfig {
        epochs: o.epochs.unwrap_or(defaults.epochs),
        sample: o.sample.unwrap_or(defaults.sample),
        batch_size: o.batch_size.unwrap_or(defaults.batch_size),
        learning_rate: o.learning_rate.unwrap_or(defaults.learning_rate),
        seed: o.seed.unwrap_or(defaults.seed),
        negatives_per_base: o.negatives_per_base.unwrap_or(defaults.negatives_per_base),
        char_dim: o.char_dim.unwrap_or(defaults.char_dim),
        filters_per_width: o.filters_per_width.unwrap_or(defaults.filters_per_width),
        use_bias: o.use_bias.unwrap_or(defaults.use_bias),
        conv1_filters: o.conv1_filters.unwrap_or(defaults.conv1_filters),
        conv2_filters: o.conv2_filters.unwrap_or(defaults.conv2_filters),
        threshold: o.threshold.unwrap_or(defaults.threshold),
    };
    let quads = load_quadruples(&data, format)?;
    let dataset = AnalogyDataset::new(lang.clone(), Split::Train, quads);
    log.note(format!(
        "training on {} of {} quadruples ({lang}), {} epochs, seed {}",
        config.sample.min(dataset.len()),
        dataset.len(),
        config.epochs,
        config.seed
    ));
    let epochs = config.epochs;
    let (ckpt, _) = train::train_observed(&dataset, &config, &mut |s| {
        log.note(format!(
            "epoch {:>3}/{}: mean loss {:.6} over {} examples",
            s.epoch + 1,
            epochs,
            s.mean_loss,
            s.examples
        ));
    })?;
    ckpt.save(&out)?;
    let resolved = TrainOpts {
        data: Some(data),
        format: Some(format),
        lang: Some(lang),
        out: Some(out.clone()),
        epochs: Some(config.epochs),
        sample: Some(config.sample),
        batch_size: Some(config.batch_size),
        learning_rate: Some(config.learning_rate),
        seed: Some(config.seed),
        negatives_per_base: Some(config.negatives_per_base),
        char_dim: Some(config.char_dim),
        filters_per_width: Some(config.filters_per_width),
        use_bias: Some(config.use_bias),
        conv1_filters: Some(config.conv1_filters),
        conv2_filters: Some(config.conv2_filters),
        threshold: Some(config.threshold),
    };
    echo_beside(&out, &resolved)?;
    log.note(format!(
        "saved checkpoint {} (final loss {:.6})",
        out.display(),
        ckpt.final_loss
    ));
    Ok(())
}

fn eval_cmd(o: EvalOpts, log: &Log) -> Result<()> {
    let ckpt_path = req(o.ckpt.clone(), "--ckpt")?;
    let data = req(o.data.clone(), "--data")?;
    let out_dir = req(o.out_dir.clone(), "--out-dir")?;
    let format = o.format.unwrap_or(DataFormat::Quads);
    let sample_seed = o.sample_seed.unwrap_or(0);
    let ckpt = Checkpoint::load(&ckpt_path)?;
    let lang = o.lang.clone().unwrap_or_else(|| ckpt.language.clone());
    let quads = subsample(load_quadruples(&data, format)?, o.sample, sample_seed);
    let test = AnalogyDataset::new(lang.clone(), Split::Test, quads);
    let metrics = eval::evaluate_checkpoint(&ckpt, &test)?;
    eval::emit_report(std::slice::from_ref(&metrics), &out_dir)?;
    let resolved = EvalOpts {
        format: Some(format),
        lang: Some(lang),
        sample_seed: Some(sample_seed),
        ..o
    };
    echo_inside(&out_dir, &resolved)?;
    log.note(format!(
        "{}: pos {:.2}% neg {:.2}% base {:.2}% over {} bases (symmetry {:.3})",
        metrics.language,
        metrics.pos_acc,
        metrics.neg_acc,
        metrics.base_acc,
        metrics.n_base,
        metrics.symmetry_rate
    ));
    Ok(())
}

fn baseline(o: BaselineOpts, log: &Log) -> Result<()> {
    let method = req(o.method, "--method")?;
    let input = req(o.input.clone(), "--in")?;
    let out = req(o.out.clone(), "--out")?;
    let k = o.k.unwrap_or(1);
    let rho = o.rho.unwrap_or(baselines::DEFAULT_RHO);
    let seed = o.seed.unwrap_or(0);
    if !(1..=10).contains(&k) {
        return Err(Error::InvalidInput(format!("--k must lie in 1..=10, got {k}")));
    }
    let quads = corpus::read_quadruples(&input)?;
    // Rows are independent; solve them in parallel but keep input order.
    let rows: Vec<Result<BaselineRecord>> = quads
        .par_iter()
        .map(|q| {
            let (decision, score, with_k) = match method {
                Method::Alea => {
                    let sols = baselines::alea_solve(&q.a, &q.b, &q.c, rho, seed)?;
                    (sols.contains_in_top(&q.d, k), sols.score_of(&q.d), true)
                }
                Method::Kolmo => {
                    let sols = baselines::mdl_solve(&q.a, &q.b, &q.c);
                    (sols.contains_in_top(&q.d, k), sols.score_of(&q.d), true)
                }
                Method::Formal => {
                    (baselines::formal_classify(&q.a, &q.b, &q.c, &q.d), None, false)
                }
            };
            Ok(BaselineRecord {
                a: q.a.clone(),
                b: q.b.clone(),
                c: q.c.clone(),
                d: q.d.clone(),
                method: method_name(method).to_string(),
                k: with_k.then_some(k),
                decision,
                score,
            })
        })
        .collect();
    let records = rows.into_iter().collect::<Result<Vec<_>>>()?;
    baselines::write_baseline_csv(&out, &records)?;
    let resolved = BaselineOpts {
        method: Some(method),
        k: Some(k),
        rho: Some(rho),
        seed: Some(seed),
        ..o
    };
    echo_beside(&out, &resolved)?;
    let accepted = records.iter().filter(|r| r.decision).count();
    log.note(format!(
        "{}: {accepted}/{} quadruples accepted, decisions in {}",
        method_name(method),
        records.len(),
        out.display()
    ));
    Ok(())
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Alea => "alea",
        Method::Kolmo => "kolmo",
        Method::Formal => "formal",
    }
}

fn transfer(o: TransferOpts, log: &Log) -> Result<()> {
    let ckpt_dir = req(o.ckpt_dir.clone(), "--ckpt-dir")?;
    let data_dir = req(o.data_dir.clone(), "--data-dir")?;
    let out_dir = req(o.out_dir.clone(), "--out-dir")?;
    let format = o.format.unwrap_or(DataFormat::Quads);
    let sample_seed = o.sample_seed.unwrap_or(0);

    let mut ckpt_paths: Vec<PathBuf> = std::fs::read_dir(&ckpt_dir)
        .map_err(|e| Error::io(&ckpt_dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "ckpt"))
        .collect();
    ckpt_paths.sort();
    if ckpt_paths.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no *.ckpt files in {}",
            ckpt_dir.display()
        )));
    }
    let mut checkpoints = Vec::with_capacity(ckpt_paths.len());
    for p in &ckpt_paths {
        checkpoints.push(Checkpoint::load(p)?);
    }
    checkpoints.sort_by(|x, y| x.language.cmp(&y.language));
    let mut tests: BTreeMap<String, AnalogyDataset> = BTreeMap::new();
    for ck in &checkpoints {
        if tests.contains_key(&ck.language) {
            return Err(Error::InvalidInput(format!(
                "two checkpoints claim language {}",
                ck.language
            )));
        }
        let path = data_dir.join(format!("{}.tsv", ck.language));
        let quads = subsample(load_quadruples(&path, format)?, o.sample, sample_seed);
        tests.insert(
            ck.language.clone(),
            AnalogyDataset::new(ck.language.clone(), Split::Test, quads),
        );
    }

    let mut rows: Vec<Metrics> = Vec::new();
    for source in &checkpoints {
        for target in &checkpoints {
            rows.push(eval::transfer_full(source, &tests[&target.language])?);
        }
    }
    for source in &checkpoints {
        for target in &checkpoints {
            rows.push(eval::transfer_partial(source, target, &tests[&target.language])?);
        }
    }
    let written = eval::emit_report(&rows, &out_dir)?;
    let resolved = TransferOpts {
        format: Some(format),
        sample_seed: Some(sample_seed),
        ..o
    };
    echo_inside(&out_dir, &resolved)?;
    log.note(format!(
        "{} languages, {} transfer evaluations, {} report files in {}",
        checkpoints.len(),
        rows.len(),
        written.len(),
        out_dir.display()
    ));
    Ok(())
}

fn coverage(o: CoverageOpts) -> Result<()> {
    let target_path = req(o.target, "--target")?;
    let reference_path = req(o.reference, "--reference")?;
    let target = AnalogyDataset::new(
        "target",
        Split::Test,
        corpus::read_quadruples(&target_path)?,
    );
    let reference = AnalogyDataset::new(
        "reference",
        Split::Train,
        corpus::read_quadruples(&reference_path)?,
    );
    emit(format!("{:.2}", corpus::coverage(&target, &reference)))
}

fn stats(o: StatsOpts) -> Result<()> {
    let input = req(o.input, "--in")?;
    let format = o.format.unwrap_or(DataFormat::Quads);
    let stats = match format {
        DataFormat::Quads => {
            let quads = corpus::read_quadruples(&input)?;
            corpus::word_stats(quads.iter().flat_map(|q| q.words()))?
        }
        DataFormat::Sigmorphon => {
            let triples = corpus::parse_sigmorphon(&input, true)?;
            corpus::word_stats(
                triples
                    .iter()
                    .flat_map(|t| [t.lemma.as_str(), t.form.as_str()]),
            )?
        }
    };
    emit(serde_json::to_string_pretty(&stats).expect("stats serialize"))
}

fn gradcheck_cmd(o: GradcheckOpts, log: &Log) -> Result<()> {
    let seed = o.seed.unwrap_or(0);
    let configs = o.configs.unwrap_or(1).max(1);
    let mut max_rel_err = 0.0f64;
    let mut worst = String::new();
    for i in 0..configs {
        for kind in LayerKind::ALL {
            let check = gradcheck::check_layer(kind, seed + i);
            log.note(format!(
                "{:<20} seed {:>4}: max rel err {:.3e} over {} coordinates",
                kind.name(),
                check.seed,
                check.report.max_rel_err,
                check.report.checked
            ));
            if check.report.max_rel_err > max_rel_err {
                max_rel_err = check.report.max_rel_err;
                worst = format!("{} (seed {})", kind.name(), check.seed);
            }
        }
        let full = train::check_full_stack(seed + i)?;
        log.note(format!(
            "{:<20} seed {:>4}: max rel err {:.3e} over {} coordinates",
            "full_stack",
            seed + i,
            full.max_rel_err,
            full.checked
        ));
        if full.max_rel_err > max_rel_err {
            max_rel_err = full.max_rel_err;
            worst = format!("full_stack (seed {})", seed + i);
        }
    }
    emit(format!("max_rel_err {max_rel_err:.3e}"))?;
    if max_rel_err < gradcheck::FD_TOL {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "gradient check failed: {worst} reached {max_rel_err:.3e}, tolerance {:.1e}",
            gradcheck::FD_TOL
        )))
    }
}

fn synth_cmd(o: SynthOpts, log: &Log) -> Result<()> {
    let out = req(o.out.clone(), "--out")?;
    let defaults = SynthConfig::default();
    let config = SynthConfig {
        lemmas: o.lemmas.unwrap_or(defaults.lemmas),
        alphabet: o.alphabet.clone().unwrap_or(defaults.alphabet),
        suffixes: o.suffixes.clone().unwrap_or(defaults.suffixes),
        min_len: o.min_len.unwrap_or(defaults.min_len),
        max_len: o.max_len.unwrap_or(defaults.max_len),
        seed: o.seed.unwrap_or(defaults.seed),
    };
    let triples = synth::synth_triples(&config)?;
    synth::write_triples(&out, &triples)?;
    let quad_count = match &o.quads_out {
        Some(path) => {
            let quads = corpus::extract_sigmorphon_analogies(&triples);
            corpus::write_quadruples(path, &quads)?;
            Some(quads.len())
        }
        None => None,
    };
    let resolved = SynthOpts {
        lemmas: Some(config.lemmas),
        alphabet: Some(config.alphabet.clone()),
        suffixes: Some(config.suffixes.clone()),
        min_len: Some(config.min_len),
        max_len: Some(config.max_len),
        seed: Some(config.seed),
        out: Some(out.clone()),
        quads_out: o.quads_out.clone(),
    };
    echo_beside(&out, &resolved)?;
    match quad_count {
        Some(n) => log.note(format!(
            "generated {} triples into {} and {n} quadruples",
            triples.len(),
            out.display()
        )),
        None => log.note(format!("generated {} triples into {}", triples.len(), out.display())),
    }
    Ok(())
}
