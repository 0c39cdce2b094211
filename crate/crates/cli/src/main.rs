//! `cfaug`: identity-pair augmentation, perturbation, training and
//! counterfactual fairness evaluation from the command line.
//!
//! Settings come from an optional TOML config (`--config`); flags override
//! it. Exit status is 0 on success, 1 for invalid input or configuration and
//! 2 for failures while running.

use std::path::PathBuf;
use std::process::ExitCode;

use cfaug_core::classifier::Scheme;
use cfaug_core::config::RunConfig;
use cfaug_core::{pipeline, Error, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

#[derive(Debug, Parser)]
#[command(name = "cfaug", version, about)]
struct Cli {
    /// Log progress (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Expand seed identity pairs through embedding neighbourhoods.
    AugmentPairs(AugmentArgs),
    /// Write a corpus with replacement, blindness and swap variants.
    Perturb(PerturbArgs),
    /// Train a classifier and write a checkpoint and training log.
    Train(TrainArgs),
    /// Score a test set and report CTF gaps, accuracy and AUC.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
struct Shared {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for perturbation sampling and training.
    #[arg(long)]
    seed: Option<u64>,
    /// GloVe text embedding file.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LexiconArgs {
    /// Identity lexicon TSV (default: <out>/lexicon.tsv).
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Term-to-placeholder TSV used for blindness.
    #[arg(long)]
    placeholders: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AugmentArgs {
    #[command(flatten)]
    shared: Shared,
    /// Seed pairs TSV.
    #[arg(long)]
    known_pairs: Option<PathBuf>,
    /// Term-to-placeholder TSV attached to the lexicon.
    #[arg(long)]
    placeholders: Option<PathBuf>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    top_k1: Option<usize>,
    #[arg(long)]
    top_k2: Option<usize>,
    /// Merge inflectional variants (true or false).
    #[arg(long)]
    lemmatize: Option<bool>,
}

#[derive(Debug, Args)]
struct PerturbArgs {
    #[command(flatten)]
    shared: Shared,
    #[command(flatten)]
    lexicon: LexiconArgs,
    /// Dataset CSV with id,text,label columns.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    n_r: Option<f64>,
    #[arg(long)]
    n_b: Option<f64>,
    #[arg(long)]
    n_s: Option<f64>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    shared: Shared,
    #[command(flatten)]
    lexicon: LexiconArgs,
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// plain, blindness, augmentation or logit-pairing.
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    hidden: Option<usize>,
    /// Early-stopping patience in epochs.
    #[arg(long)]
    early_stopping: Option<usize>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    shared: Shared,
    #[command(flatten)]
    lexicon: LexiconArgs,
    #[arg(long)]
    testset: Option<PathBuf>,
    /// Checkpoint JSON (default: <out>/checkpoint.json).
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Evaluate even if the lexicon differs from the one used in training.
    #[arg(long)]
    force: bool,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn set_path(slot: &mut Option<PathBuf>, value: Option<PathBuf>) {
    if value.is_some() {
        *slot = value;
    }
}

fn base_config(shared: Shared) -> Result<RunConfig> {
    let mut cfg = match &shared.config {
        Some(path) => RunConfig::read(path)?,
        None => RunConfig::default(),
    };
    if shared.seed.is_some() {
        cfg.seed = shared.seed;
    }
    set_path(&mut cfg.paths.embeddings, shared.embeddings);
    set_path(&mut cfg.paths.out, shared.out);
    Ok(cfg)
}

fn apply_lexicon(cfg: &mut RunConfig, args: LexiconArgs) {
    set_path(&mut cfg.paths.lexicon, args.lexicon);
    set_path(&mut cfg.paths.placeholders, args.placeholders);
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::AugmentPairs(a) => {
            let mut cfg = base_config(a.shared)?;
            set_path(&mut cfg.paths.known_pairs, a.known_pairs);
            set_path(&mut cfg.paths.placeholders, a.placeholders);
            set(&mut cfg.augmentation.tau, a.tau);
            set(&mut cfg.augmentation.top_k1, a.top_k1);
            set(&mut cfg.augmentation.top_k2, a.top_k2);
            set(&mut cfg.augmentation.lemmatize, a.lemmatize);
            let out = pipeline::augment(&cfg)?;
            let path = out.write(&cfg.out_dir())?;
            let r = &out.report;
            println!(
                "known pairs: {} ({} with out-of-vocabulary terms)",
                r.known, r.skipped_oov
            );
            println!("candidates examined: {}", r.candidates);
            println!("admitted: {}", r.admitted);
            println!("lexicon pairs after normalization: {}", out.lexicon.len());
            println!("wrote {}", path.display());
        }
        Command::Perturb(a) => {
            let mut cfg = base_config(a.shared)?;
            apply_lexicon(&mut cfg, a.lexicon);
            set_path(&mut cfg.paths.dataset, a.dataset);
            set(&mut cfg.perturbation.n_r, a.n_r);
            set(&mut cfg.perturbation.n_b, a.n_b);
            set(&mut cfg.perturbation.n_s, a.n_s);
            let out = pipeline::perturb(&cfg)?;
            let path = out.write(&cfg.out_dir())?;
            let s = &out.summary;
            println!(
                "origin: {}, replacement: {}, blindness: {}, swap: {}",
                s.origin, s.ipr, s.itb, s.ips
            );
            println!("wrote {}", path.display());
        }
        Command::Train(a) => {
            let mut cfg = base_config(a.shared)?;
            apply_lexicon(&mut cfg, a.lexicon);
            set_path(&mut cfg.paths.dataset, a.dataset);
            let t = &mut cfg.train;
            set(&mut t.scheme, a.scheme);
            set(&mut t.lambda1, a.lambda1);
            set(&mut t.lambda2, a.lambda2);
            set(&mut t.epochs, a.epochs);
            set(&mut t.batch_size, a.batch_size);
            set(&mut t.learning_rate, a.learning_rate);
            set(&mut t.hidden, a.hidden);
            if a.early_stopping.is_some() {
                t.early_stopping = a.early_stopping;
            }
            info!("training scheme {}", cfg.train.scheme);
            let out = pipeline::train(&cfg)?;
            let (ck, log) = out.write(&cfg.out_dir())?;
            if let Some(last) = out.log.epochs.last() {
                println!(
                    "epochs: {}, final loss: {:.6}, final train accuracy: {:.4}",
                    last.epoch, last.loss, last.train_accuracy
                );
            }
            if out.log.stopped_early {
                println!("stopped early; kept epoch {}", out.log.best_epoch);
            }
            println!("wrote {}", ck.display());
            println!("wrote {}", log.display());
        }
        Command::Evaluate(a) => {
            let mut cfg = base_config(a.shared)?;
            apply_lexicon(&mut cfg, a.lexicon);
            set_path(&mut cfg.paths.testset, a.testset);
            set_path(&mut cfg.paths.checkpoint, a.checkpoint);
            let out = pipeline::evaluate(&cfg, a.force)?;
            let path = out.write(&cfg.out_dir())?;
            let label = out.report.provenance.seed.clone();
            print!(
                "{}",
                out.report
                    .summary_table(&format!("checkpoint (seed {label})"))
            );
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        1
    } else {
        2
    }
}
