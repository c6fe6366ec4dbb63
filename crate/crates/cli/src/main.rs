use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use evapsbp::verify::Mutation;
use evapsbp_cli::commands::{self, format_property, DEFAULT_LEVELS};
use evapsbp_cli::config::{self, RunManifest};
use evapsbp_cli::{exit, CliError, Result};

#[derive(Parser)]
#[command(name = "evapsbp", version, about = "Energy-stable SBP solver for 1D evaporation")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Configuration file (TOML). Without one the default preset is used.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized checks, overriding `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Audit cadence in steps, overriding `solver.audit_every`.
    #[arg(long, global = true)]
    audit_every: Option<usize>,
    /// Warn about unknown configuration keys instead of failing.
    #[arg(long, global = true)]
    lenient: bool,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured problem and write snapshots, ledger and summary.
    Run,
    /// Run the property suite.
    Verify {
        /// Random samples per sign regime.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, hide = true, value_enum)]
        inject: Option<Inject>,
    },
    /// Grid-refinement study against the manufactured solution.
    Converge {
        /// Node counts per phase, coarse to fine.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LEVELS)]
        levels: Vec<usize>,
    },
    /// Re-run the energy audit over an existing snapshots file.
    Audit {
        /// Defaults to `snapshots.csv` in the output directory.
        #[arg(long)]
        snapshots: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Inject {
    PenaltySign,
    QPerturb,
}

fn manifest(g: &Global) -> Result<RunManifest> {
    let mut m = match &g.config {
        Some(path) => config::load_config(path, g.lenient)?.manifest,
        None => config::resolve(&config::ConfigDoc::default())?,
    };
    if let Some(dir) = &g.out {
        m.output_dir = dir.clone();
    }
    if let Some(seed) = g.seed {
        m.seed = seed;
    }
    if let Some(n) = g.audit_every {
        m.setup.config.audit_every = n;
        config::validate(&m)?;
    }
    Ok(m)
}

fn dispatch(cli: Cli) -> Result<i32> {
    let g = &cli.global;
    match cli.command {
        Command::Run => {
            let m = manifest(g)?;
            let out = commands::cmd_run(&m)?;
            let s = &out.report.summary;
            println!(
                "{} steps, t = {}, x_delta = {}, max identity residual {:.3e}, wall {:.2}s -> {}",
                s.steps_taken,
                s.final_time,
                s.final_x_delta,
                s.max_identity_residual,
                out.wall_time_s,
                out.output_dir.display()
            );
            Ok(match &out.report.failure {
                Some(f) => {
                    eprintln!("error: solver failed at step {}: {}", f.step, f.error);
                    exit::SOLVER
                }
                None if s.audit_violations > 0 => {
                    eprintln!("error: {} audited steps violated the energy checks", s.audit_violations);
                    exit::CHECK_FAILED
                }
                None => exit::OK,
            })
        }
        Command::Verify { samples, inject } => {
            let seed = match g.config {
                Some(_) => manifest(g)?.seed,
                None => g.seed.unwrap_or(0),
            };
            let mutation = inject.map(|i| match i {
                Inject::PenaltySign => Mutation::PenaltySignFlip,
                Inject::QPerturb => Mutation::QPerturbation,
            });
            let reports = commands::cmd_verify(seed, samples, mutation)?;
            for r in &reports {
                println!("{}", format_property(r));
            }
            let failed: Vec<_> = reports.iter().filter(|r| !r.passed).map(|r| r.name).collect();
            if failed.is_empty() {
                println!("all {} properties passed", reports.len());
                Ok(exit::OK)
            } else {
                eprintln!("error: failing properties: {}", failed.join(", "));
                Ok(exit::CHECK_FAILED)
            }
        }
        Command::Converge { levels } => {
            let m = manifest(g)?;
            let table = commands::cmd_converge(&m, &levels)?;
            print!("{table}");
            Ok(exit::OK)
        }
        Command::Audit { snapshots } => {
            let m = manifest(g)?;
            let path = snapshots.unwrap_or_else(|| m.output_dir.join(evapsbp_cli::output::SNAPSHOTS_FILE));
            let a = commands::cmd_audit(&m, &path)?;
            println!(
                "{} rows audited, max identity residual {:.3e}, max closed-form residual {:.3e}, max GCL residual {:.3e} -> {}",
                a.ledger.len(),
                a.max_identity_residual,
                a.max_closed_form_residual,
                a.max_gcl_residual,
                a.path.display()
            );
            for (row, v) in &a.violations {
                eprintln!("row {row}: {v}");
            }
            Ok(if a.passed() { exit::OK } else { exit::CHECK_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE as u8 } else { 0 });
        }
    };
    let level = match cli.global.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(CliError::exit_code(&e) as u8)
        }
    }
}
