use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hyperlasso::inference::PredictionMode;
use hyperlasso_cli::commands::{
    cmd_fit, cmd_gen, cmd_loocv, cmd_predict, cmd_rank, cmd_resume_summarize, cmd_sweep,
};
use hyperlasso_cli::{CliError, CliResult, RunConfig};

/// Bayesian multinomial logistic regression with heavy-tailed priors.
#[derive(Debug, Parser)]
#[command(name = "hyperlasso", version)]
struct Cli {
    /// Flat TOML config file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (defaults to the config's out_dir, then $HYPERLASSO_OUT_DIR).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic train/test pair with its truth labeling.
    Gen,
    /// Run one chain on the training data.
    Fit {
        #[arg(long)]
        train: Option<PathBuf>,
        /// Recompute summaries of an existing chain directory without sampling.
        #[arg(long, requires = "chain_dir")]
        resume_summarize: bool,
        #[arg(long)]
        chain_dir: Option<PathBuf>,
    },
    /// Rank features by SDB of the posterior-mean coefficients.
    Rank {
        #[arg(long)]
        chain_dir: Option<PathBuf>,
        #[arg(long)]
        burnin_frac: Option<f64>,
        /// Truth file (feature_index,group) for selection metrics.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Predict a test set with a fitted chain.
    Predict {
        #[arg(long)]
        chain_dir: Option<PathBuf>,
        #[arg(long)]
        test: Option<PathBuf>,
        #[arg(long)]
        mode: Option<PredictionMode>,
        #[arg(long)]
        burnin_frac: Option<f64>,
    },
    /// One chain per log w grid value; writes solution paths.
    Sweep {
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        test: Option<PathBuf>,
        /// Comma-separated log w values.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        grid: Option<Vec<f64>>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Leave-one-out cross-validated predictions.
    Loocv {
        #[arg(long)]
        train: Option<PathBuf>,
        /// Comma-separated feature names to restrict the fit to.
        #[arg(long, value_delimiter = ',')]
        features: Option<Vec<String>>,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli.out.as_deref();
    let chain_dir = |flag: Option<PathBuf>, cfg: &RunConfig| {
        flag.or_else(|| cfg.chain_dir.clone())
            .ok_or_else(|| CliError::Validation("no chain directory given".into()))
    };
    match cli.command {
        Command::Gen => {
            cmd_gen(&cfg, &cfg.resolve_out_dir(out))?;
        }
        Command::Fit {
            train,
            resume_summarize,
            chain_dir: dir,
        } => {
            if resume_summarize {
                cmd_resume_summarize(&chain_dir(dir, &cfg)?)?;
            } else {
                cfg.train = train.or(cfg.train);
                cmd_fit(&cfg, &cfg.resolve_out_dir(out))?;
            }
        }
        Command::Rank {
            chain_dir: dir,
            burnin_frac,
            truth,
        } => {
            let dir = chain_dir(dir, &cfg)?;
            let target = out.map_or_else(|| dir.clone(), PathBuf::from);
            let truth = truth.or(cfg.truth.clone());
            cmd_rank(
                &dir,
                burnin_frac.unwrap_or(cfg.burnin_frac),
                truth.as_deref(),
                &cfg.thresholds,
                &target,
            )?;
        }
        Command::Predict {
            chain_dir: dir,
            test,
            mode,
            burnin_frac,
        } => {
            let dir = chain_dir(dir, &cfg)?;
            let target = out.map_or_else(|| dir.clone(), PathBuf::from);
            let test = test
                .or(cfg.test.clone())
                .ok_or_else(|| CliError::Validation("no test data given".into()))?;
            let r = cmd_predict(
                &dir,
                &test,
                mode.unwrap_or(cfg.mode),
                burnin_frac.unwrap_or(cfg.burnin_frac),
                &target,
            )?;
            println!("amlp {} error_rate {}", r.amlp, r.error_rate);
        }
        Command::Sweep {
            train,
            test,
            grid,
            jobs,
        } => {
            cfg.train = train.or(cfg.train);
            cfg.test = test.or(cfg.test);
            cfg.grid = grid.unwrap_or(cfg.grid);
            cfg.jobs = jobs.unwrap_or(cfg.jobs);
            cmd_sweep(&cfg, &cfg.resolve_out_dir(out))?;
        }
        Command::Loocv {
            train,
            features,
            jobs,
        } => {
            cfg.train = train.or(cfg.train);
            cfg.features = features.or(cfg.features);
            cfg.jobs = jobs.unwrap_or(cfg.jobs);
            let o = cmd_loocv(&cfg, &cfg.resolve_out_dir(out))?;
            if let Some(r) = o.result {
                println!("amlp {} error_rate {}", r.amlp, r.error_rate);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
