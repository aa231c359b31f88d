//! `morphan` — one entry point for the whole toolkit: corpus extraction,
//! augmentation, training, evaluation, symbolic baselines, and transfer
//! studies.
//!
//! Every subcommand accepts `--config <file>`, a JSON object whose keys are
//! the subcommand's flag names in snake_case. Precedence is fixed: explicit
//! flags override config-file values, which override built-in defaults. The
//! fully resolved configuration is echoed as JSON next to each run's
//! outputs (`<out>.run.json` beside single files, `run-config.json` inside
//! output directories), so a run can be reproduced from its artifacts.
//!
//! Exit codes: 0 on success, 1 on contract violations (bad flags, invalid
//! configuration, malformed input data, a failed gradient check), 2 on I/O
//! failures. Progress goes to standard error and `--quiet` silences it;
//! errors print regardless.

mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(
    name = "morphan",
    version,
    about = "Morphological analogy toolkit",
    arg_required_else_help = true
)]
pub struct Cli {
    /// JSON file providing defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Cap the worker-thread pool (default: one per CPU).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Silence progress logs on standard error.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Build analogy quadruples from inflection tables or relation pairs.
    Extract(ExtractOpts),
    /// Expand quadruples into labeled positive/negative examples.
    Augment(AugmentOpts),
    /// Train an embedder + classifier and write a checkpoint.
    Train(TrainOpts),
    /// Evaluate a checkpoint on a test set.
    Eval(EvalOpts),
    /// Run a symbolic baseline over a quadruple file.
    Baseline(BaselineOpts),
    /// Cross-language transfer matrices over checkpoint directories.
    Transfer(TransferOpts),
    /// Percentage of target quadruples covered by a reference set.
    Coverage(CoverageOpts),
    /// Word-shape statistics of a corpus.
    Stats(StatsOpts),
    /// Finite-difference verification of every gradient.
    Gradcheck(GradcheckOpts),
    /// Generate a synthetic suffix language.
    Synth(SynthOpts),
}

/// Raw-corpus formats `extract` reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractFormat {
    /// `lemma⟨TAB⟩features⟨TAB⟩form` inflection lines in one file.
    Sigmorphon,
    /// `left⟨TAB⟩right` relation pairs; a directory is read file by file
    /// and each file stem names its relation.
    Pairs,
}

/// Analogy-data formats the model commands read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    /// Inflection lines, run through analogy extraction first.
    Sigmorphon,
    /// Ready-made `a⟨TAB⟩b⟨TAB⟩c⟨TAB⟩d` quadruples.
    Quads,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Monte-Carlo shuffle/complement solver.
    Alea,
    /// Minimum-description-length solver.
    Kolmo,
    /// Exact shuffle-intersection decision.
    Formal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugMode {
    /// 8 positives and 3 negatives per base (8 with `--extended`).
    Train,
    /// 8 positives and 24 negatives per base.
    Eval,
}

/// Fill unset flags from a config file's values.
pub trait Merge {
    fn or(self, fallback: Self) -> Self;
}

macro_rules! merge_fields {
    ($t:ty { $($f:ident),* $(,)? }) => {
        impl Merge for $t {
            fn or(self, fallback: Self) -> Self {
                Self { $($f: self.$f.or(fallback.$f)),* }
            }
        }
    };
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractOpts {
    /// Corpus file (or directory, in pairs format).
    #[arg(long = "in", value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Input format [default: sigmorphon].
    #[arg(long)]
    pub format: Option<ExtractFormat>,
    /// NFC-normalize words while parsing [default: true].
    #[arg(long, action = ArgAction::Set, value_name = "BOOL")]
    pub nfc: Option<bool>,
    /// Quadruple file to write.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}
merge_fields!(ExtractOpts { input, format, nfc, out });

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentOpts {
    /// Quadruple file to expand.
    #[arg(long = "in", value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Example mix [default: train].
    #[arg(long)]
    pub mode: Option<AugMode>,
    /// Use 8 negatives per base instead of 3 (train mode only).
    #[arg(long, action = ArgAction::SetTrue)]
    pub extended: Option<bool>,
    /// Drop negatives that collide with a positive form.
    #[arg(long, action = ArgAction::SetTrue)]
    pub dedup: Option<bool>,
    /// Labeled example file to write.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}
merge_fields!(AugmentOpts { input, mode, extended, dedup, out });

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOpts {
    /// Training corpus.
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Corpus format [default: sigmorphon].
    #[arg(long)]
    pub format: Option<DataFormat>,
    /// Language tag recorded in the checkpoint.
    #[arg(long, value_name = "TAG")]
    pub lang: Option<String>,
    /// Checkpoint file to write.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Passes over the sampled training set [default: 20].
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Base quadruples sampled from the corpus [default: 50000].
    #[arg(long)]
    pub sample: Option<usize>,
    /// Base quadruples per optimizer step [default: 32].
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Adam step size [default: 0.001].
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Master seed for sampling, initialization, shuffling [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Negative forms per base, 3 or 8 [default: 3].
    #[arg(long = "negatives")]
    pub negatives_per_base: Option<usize>,
    /// Character embedding size [default: 64].
    #[arg(long)]
    pub char_dim: Option<usize>,
    /// Embedder filters per n-gram width [default: 16].
    #[arg(long)]
    pub filters_per_width: Option<usize>,
    /// Train embedder filter biases [default: true].
    #[arg(long, action = ArgAction::Set, value_name = "BOOL")]
    pub use_bias: Option<bool>,
    /// First classifier convolution's filters [default: 128].
    #[arg(long = "conv1")]
    pub conv1_filters: Option<usize>,
    /// Second classifier convolution's filters [default: 64].
    #[arg(long = "conv2")]
    pub conv2_filters: Option<usize>,
    /// Decision threshold stored with the model [default: 0.5].
    #[arg(long)]
    pub threshold: Option<f64>,
}
merge_fields!(TrainOpts {
    data,
    format,
    lang,
    out,
    epochs,
    sample,
    batch_size,
    learning_rate,
    seed,
    negatives_per_base,
    char_dim,
    filters_per_width,
    use_bias,
    conv1_filters,
    conv2_filters,
    threshold,
});

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalOpts {
    /// Checkpoint to evaluate.
    #[arg(long, value_name = "FILE")]
    pub ckpt: Option<PathBuf>,
    /// Test corpus.
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Corpus format [default: quads].
    #[arg(long)]
    pub format: Option<DataFormat>,
    /// Language tag of the test data [default: the checkpoint's].
    #[arg(long, value_name = "TAG")]
    pub lang: Option<String>,
    /// Evaluate only this many quadruples, seeded by --sample-seed.
    #[arg(long)]
    pub sample: Option<usize>,
    /// Seed of the test-set subsample [default: 0].
    #[arg(long)]
    pub sample_seed: Option<u64>,
    /// Directory for metrics.csv and report.txt.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}
merge_fields!(EvalOpts { ckpt, data, format, lang, sample, sample_seed, out_dir });

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineOpts {
    /// Which baseline to run.
    #[arg(long)]
    pub method: Option<Method>,
    /// Accept d when it ranks in the top k, 1..=10 [default: 1].
    #[arg(long)]
    pub k: Option<usize>,
    /// Monte-Carlo trials per quadruple (alea) [default: 1000].
    #[arg(long)]
    pub rho: Option<usize>,
    /// RNG seed (alea) [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Quadruple file to classify.
    #[arg(long = "in", value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Decisions CSV to write.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}
merge_fields!(BaselineOpts { method, k, rho, seed, input, out });

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransferOpts {
    /// Directory of *.ckpt files, one per language.
    #[arg(long, value_name = "DIR")]
    pub ckpt_dir: Option<PathBuf>,
    /// Directory of <language>.tsv test corpora.
    #[arg(long, value_name = "DIR")]
    pub data_dir: Option<PathBuf>,
    /// Test-corpus format [default: quads].
    #[arg(long)]
    pub format: Option<DataFormat>,
    /// Evaluate only this many quadruples per language.
    #[arg(long)]
    pub sample: Option<usize>,
    /// Seed of the test-set subsamples [default: 0].
    #[arg(long)]
    pub sample_seed: Option<u64>,
    /// Directory for metrics.csv, report.txt, and the matrix CSVs.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}
merge_fields!(TransferOpts { ckpt_dir, data_dir, format, sample, sample_seed, out_dir });

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverageOpts {
    /// Quadruples whose coverage is measured.
    #[arg(long, value_name = "FILE")]
    pub target: Option<PathBuf>,
    /// Quadruples that count as covering.
    #[arg(long, value_name = "FILE")]
    pub reference: Option<PathBuf>,
}
merge_fields!(CoverageOpts { target, reference });

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsOpts {
    /// Corpus to measure.
    #[arg(long = "in", value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Corpus format [default: quads].
    #[arg(long)]
    pub format: Option<DataFormat>,
}
merge_fields!(StatsOpts { input, format });

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradcheckOpts {
    /// Base seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Seeded configurations per layer kind [default: 1].
    #[arg(long)]
    pub configs: Option<u64>,
}
merge_fields!(GradcheckOpts { seed, configs });

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthOpts {
    /// Distinct lemmas to generate [default: 500].
    #[arg(long)]
    pub lemmas: Option<usize>,
    /// Characters lemmas are built from [default: a-z].
    #[arg(long)]
    pub alphabet: Option<String>,
    /// Comma-separated suffix rules [default: s,ed].
    #[arg(long, value_delimiter = ',')]
    pub suffixes: Option<Vec<String>>,
    /// Minimum lemma length [default: 3].
    #[arg(long)]
    pub min_len: Option<usize>,
    /// Maximum lemma length [default: 8].
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Generator seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Inflection-table file to write (sigmorphon format).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Also write the extracted quadruples here.
    #[arg(long, value_name = "FILE")]
    pub quads_out: Option<PathBuf>,
}
merge_fields!(SynthOpts {
    lemmas,
    alphabet,
    suffixes,
    min_len,
    max_len,
    seed,
    out,
    quads_out,
});

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version are successful exits; anything else is a
            // usage error.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_contract_violation() { 1 } else { 2 })
        }
    }
}
