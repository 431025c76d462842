use std::path::PathBuf;
use std::process::ExitCode;

use beamlab::config::ExperimentConfig;
use beamlab::error::{Error, Result};
use beamlab::experiments::{
    ablation, angular_cmd, compare_cmd, eval_cmd, gen_site, pareto_cmd, train_cmd, Context,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "beamlab", version, about = "Limited-feedback beamforming experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (falls back to $BEAMLAB_OUT, then experiment.out_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed override (default: experiment.seed from the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ModelArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Trained model checkpoint; trains a fresh model when omitted.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Channel dataset file; regenerates from the config when omitted.
    #[arg(long)]
    dataset: Option<PathBuf>,
}

#[derive(Args)]
struct AngularArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Dataset sample indices to visualize (default: first 3 test samples).
    #[arg(long, value_delimiter = ',')]
    sample_ids: Vec<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate and persist a synthetic site dataset.
    GenSite(CommonArgs),
    /// Train one model per configured (K, Q); emit convergence curves.
    Train(CommonArgs),
    /// Per-sample feedback outcomes for all schemes on the test split.
    Eval(ModelArgs),
    /// Compare learned vs fixed random vs fixed DFT probing.
    Ablation(CommonArgs),
    /// (K, Q) overhead-performance sweep with Pareto flags.
    Pareto(CommonArgs),
    /// Scheme comparison: means, SE vs SNR, and CDFs.
    Compare(ModelArgs),
    /// Angular responses of the scheme subspaces for selected samples.
    Angular(AngularArgs),
}

fn resolve_out_dir(arg: &Option<PathBuf>, cfg: &ExperimentConfig) -> Result<PathBuf> {
    if let Some(p) = arg {
        return Ok(p.clone());
    }
    if let Ok(env) = std::env::var("BEAMLAB_OUT") {
        if !env.is_empty() {
            return Ok(PathBuf::from(env));
        }
    }
    if let Some(p) = &cfg.experiment.out_dir {
        return Ok(PathBuf::from(p));
    }
    Err(Error::Config(
        "no output directory: pass --out, set $BEAMLAB_OUT, or set experiment.out_dir".into(),
    ))
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let (common, model, dataset, sample_ids) = match &cli.command {
        Command::GenSite(c) | Command::Train(c) | Command::Ablation(c) | Command::Pareto(c) => {
            (c, None, None, Vec::new())
        }
        Command::Eval(m) | Command::Compare(m) => {
            (&m.common, m.model.clone(), m.dataset.clone(), Vec::new())
        }
        Command::Angular(a) => (
            &a.model.common,
            a.model.model.clone(),
            a.model.dataset.clone(),
            a.sample_ids.clone(),
        ),
    };
    let cfg = ExperimentConfig::load(&common.config)?;
    let out_dir = resolve_out_dir(&common.out, &cfg)?;
    let ctx = Context::new(&cfg, common.seed, &out_dir);
    match &cli.command {
        Command::GenSite(_) => gen_site(&ctx),
        Command::Train(_) => train_cmd(&ctx),
        Command::Eval(_) => eval_cmd(&ctx, model.as_deref(), dataset.as_deref()),
        Command::Ablation(_) => ablation(&ctx),
        Command::Pareto(_) => pareto_cmd(&ctx),
        Command::Compare(_) => compare_cmd(&ctx, model.as_deref(), dataset.as_deref()),
        Command::Angular(_) => angular_cmd(&ctx, model.as_deref(), dataset.as_deref(), &sample_ids),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("beamlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
