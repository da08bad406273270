//! Command-line front end: feature engineering, the comparison matrix, the
//! simulation grid and report emission.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error, 3 model
//! failure (including any failed record in an otherwise finished run).

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hybrid_select::gbt::Learner;
use hybrid_select::regpath::SelectionMethod;
use hybrid_select::{Error, Result};

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "hybrid-select", version, about = "Penalized selection feeding tree ensembles")]
pub struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed (required here or in the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; beats HYBRID_SELECT_OUT and the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads. Outputs do not depend on this.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Raw insurance CSV to the 35-column engineered table.
    Engineer(DataArgs),
    /// Pure penalized models, full-variable learners and hybrids.
    Matrix(MatrixArgs),
    /// Friedman #1 simulation grid.
    Simulate(SimArgs),
    /// Summarize a run directory.
    Report {
        /// Directory written by `matrix` or `simulate`.
        dir: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<String>,
}

fn parse_learner(s: &str) -> std::result::Result<Learner, String> {
    Learner::parse(s).ok_or_else(|| format!("unknown learner `{s}`"))
}

fn parse_selection(s: &str) -> std::result::Result<SelectionMethod, String> {
    SelectionMethod::parse(s).ok_or_else(|| format!("unknown selection method `{s}`"))
}

#[derive(Debug, Args)]
pub struct TuningArgs {
    /// Cross-validation folds.
    #[arg(long)]
    pub k: Option<usize>,
    /// Random-search trials per learner and feature set.
    #[arg(long)]
    pub n_trials: Option<usize>,
    /// Comma-separated learners (rf, xgb-like, lgbm-like, cat-like, gbm-like).
    #[arg(long, value_delimiter = ',', value_parser = parse_learner)]
    pub learners: Option<Vec<Learner>>,
    /// Comma-separated selection methods (ridge, lasso, elasticnet).
    #[arg(long, value_delimiter = ',', value_parser = parse_selection)]
    pub selections: Option<Vec<SelectionMethod>>,
    /// Skip the pure penalized models.
    #[arg(long)]
    pub no_pure: bool,
    /// Skip the full-variable learner runs.
    #[arg(long)]
    pub no_full: bool,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Input holds raw attributes; engineer features inside the training split.
    #[arg(long)]
    pub raw: bool,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Skip the AUC-versus-number-of-variables curves.
    #[arg(long)]
    pub no_curves: bool,
    #[command(flatten)]
    pub tuning: TuningArgs,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Comma-separated training sizes.
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    /// Comma-separated predictor counts (each at least 5).
    #[arg(long, value_delimiter = ',')]
    pub ps: Option<Vec<usize>>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub noise_sd: Option<f64>,
    #[arg(long)]
    pub test_size: Option<usize>,
    #[command(flatten)]
    pub tuning: TuningArgs,
}

fn apply_data(cfg: &mut RunConfig, a: &DataArgs) {
    if let Some(v) = &a.input {
        cfg.input = Some(v.clone());
    }
    if let Some(v) = &a.schema {
        cfg.schema = Some(v.clone());
    }
    if let Some(v) = &a.target {
        cfg.target = Some(v.clone());
    }
}

fn apply_tuning(pc: &mut hybrid_select::pipeline::PipelineConfig, t: &TuningArgs) {
    if let Some(v) = t.k {
        pc.k = v;
    }
    if let Some(v) = t.n_trials {
        pc.n_trials = v;
    }
    if let Some(v) = &t.learners {
        pc.learners = v.clone();
    }
    if let Some(v) = &t.selections {
        pc.selections = v.clone();
    }
    if t.no_pure {
        pc.include_pure = false;
    }
    if t.no_full {
        pc.include_full = false;
    }
}

/// Load the config file and fold the command's flags into it.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    match &cli.command {
        Command::Engineer(d) => apply_data(&mut cfg, d),
        Command::Matrix(m) => {
            apply_data(&mut cfg, &m.data);
            cfg.raw |= m.raw;
            if let Some(v) = m.test_fraction {
                cfg.test_fraction = v;
            }
            if let Some(v) = m.threshold {
                cfg.matrix.threshold = v;
            }
            if m.no_curves {
                cfg.curves = false;
            }
            apply_tuning(&mut cfg.matrix, &m.tuning);
        }
        Command::Simulate(s) => {
            let sim = &mut cfg.simulation;
            if let Some(v) = &s.ns {
                sim.ns = v.clone();
            }
            if let Some(v) = &s.ps {
                sim.ps = v.clone();
            }
            if let Some(v) = s.replicates {
                sim.replicates = v;
            }
            if let Some(v) = s.noise_sd {
                sim.noise_sd = v;
            }
            if let Some(v) = s.test_size {
                sim.test_size = v;
            }
            apply_tuning(&mut sim.pipeline, &s.tuning);
        }
        Command::Report { .. } => {}
    }
    Ok(cfg)
}

/// Run one parsed invocation and return the process exit code. Output
/// written so far stays on disk when a command fails.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        // A second call in the same process (tests) keeps the first pool.
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::debug!("thread pool already set: {e}");
        }
    }
    let cfg = resolve_config(cli)?;
    let out = cli.out.as_deref();
    let outcome = match &cli.command {
        Command::Engineer(_) => commands::cmd_engineer(&cfg, out)?,
        Command::Matrix(_) => commands::cmd_matrix(&cfg, out)?,
        Command::Simulate(_) => commands::cmd_simulate(&cfg, out)?,
        Command::Report { dir } => {
            print!("{}", commands::cmd_report(dir)?);
            return Ok(0);
        }
    };
    log::info!("outputs in {}", outcome.out_dir.display());
    Ok(outcome.exit_code())
}
