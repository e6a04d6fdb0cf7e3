use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use coarsectrl::experiment::{self, ExperimentConfig};
use coarsectrl::{checks, Error};

#[derive(Parser)]
#[command(name = "coarsectrl", about = "Group controllability estimation from coarse graph summaries", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonOpts {
    /// TOML config file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a scalar config key, e.g. --set rho_n=0.2 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (overrides the config's output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Row-norm pruning quantile for the spectral estimator, in (0, 1].
    #[arg(long)]
    prune_quantile: Option<f64>,
    /// Draw each coarse node entirely from one community.
    #[arg(long)]
    perfect_sync: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single seeded trial and write trial.csv plus a manifest.
    Run {
        #[command(flatten)]
        common: CommonOpts,
        /// Trial seed; defaults to the first configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the estimated membership and block matrices.
        #[arg(long)]
        dump_estimates: bool,
    },
    /// Run the configured sweep and write trials.csv, aggregate.csv, manifest.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Print the 8-node worked example matrices.
    Example1,
    /// Run the closed-form-vs-oracle identity suite.
    Check,
}

fn load_config(common: &CommonOpts) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::from_toml_file(path)?,
        None => ExperimentConfig::default(),
    };
    for kv in &common.set {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE (got {kv})")))?;
        cfg.set_override(key, value)?;
    }
    if common.prune_quantile.is_some() {
        cfg.prune_quantile = common.prune_quantile;
    }
    if common.perfect_sync {
        cfg.perfect_sync = true;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn exit_code_for(err: &Error) -> ExitCode {
    match err {
        Error::Config(_) | Error::InvalidParameter(_) | Error::Parse(_) | Error::Io(_) => {
            ExitCode::from(1)
        }
        _ => ExitCode::from(2),
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Run {
            common,
            seed,
            dump_estimates,
        } => {
            let cfg = load_config(&common)?;
            let seed = match seed {
                Some(s) => s,
                None => cfg.resolved_seeds()?[0],
            };
            let out_dir = cfg
                .output_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from("out/run"));
            let output = experiment::run_trial(&cfg, seed)?;
            experiment::write_trial_artifacts(&cfg, &output, &out_dir, dump_estimates)?;
            println!("{}", experiment::TRIAL_CSV_HEADER);
            println!("{}", output.record.csv_row("none", "0"));
            println!("artifacts written to {}", out_dir.display());
            Ok(())
        }
        Command::Sweep { common } => {
            let cfg = load_config(&common)?;
            let out_dir = cfg
                .output_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from("out/sweep"));
            let result = experiment::run_sweep(&cfg)?;
            experiment::write_sweep_artifacts(&cfg, &result, &out_dir)?;
            print!("{}", result.aggregate_csv());
            if !result.failures.is_empty() {
                eprintln!("{} trial(s) failed:", result.failures.len());
                for f in &result.failures {
                    eprintln!("  {f}");
                }
            }
            println!("artifacts written to {}", out_dir.display());
            Ok(())
        }
        Command::Example1 => {
            print!("{}", checks::example1_report()?);
            Ok(())
        }
        Command::Check => {
            let results = checks::run_identity_checks()?;
            let mut all_pass = true;
            for check in &results {
                let tag = if check.pass { "PASS" } else { "FAIL" };
                println!("{tag} {} ({})", check.name, check.detail);
                all_pass &= check.pass;
            }
            if !all_pass {
                return Err(Error::SpectralRadius("identity check failed".into()));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Usage and help text both route through here; help is a success.
            use clap::error::ErrorKind;
            let is_help = matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if is_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    experiment::init_thread_pool();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}
