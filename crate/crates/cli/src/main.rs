use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lapse_cli::figure::{self, FigureOptions};
use lapse_cli::format::Provenance;
use lapse_cli::{config::ScenarioConfig, scenario, tables, verify, CliError, Result, WORKERS_ENV};
use lapse_core::advsel::ExperienceReading;
use lapse_core::DEFAULT_STEP;

/// Lapse-supported pricing and adverse selection cost tables.
#[derive(Debug, Parser)]
#[command(name = "lapsecost", version, about)]
struct Cli {
    /// Integration step in years.
    #[arg(long, global = true, default_value_t = DEFAULT_STEP)]
    step_h: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Regenerate a reference table (1, 3, 4, 5 or 6) as CSV.
    Table {
        id: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Entry-age sweeps.
    Figure {
        #[command(subcommand)]
        figure: Figure,
    },
    /// Single scenarios from a TOML file.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Compare regenerated tables with golden CSVs in a directory.
    Verify { dir: PathBuf },
}

#[derive(Debug, Subcommand)]
enum Figure {
    /// Adverse selection cost by entry age, case, lapsing mode and
    /// valuation lapse rate (long format).
    Losses {
        /// Entry ages as A:B (inclusive, within 20:90).
        #[arg(long, default_value = "25:75")]
        ages: String,
        /// Comma-separated valuation lapse rates.
        #[arg(long, default_value = "0.03,0.06,0.09")]
        lapse: String,
        /// Hold the normal-class experience lapse rate fixed instead of
        /// letting it follow the valuation rate.
        #[arg(long)]
        experience_lapse: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum ScenarioAction {
    /// Print premiums, cost and loss spread; write the per-duration CSV.
    Run { file: PathBuf },
}

fn emit(csv: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, csv).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn configure_workers() -> Result<()> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let workers: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got {raw:?}")))?;
    // Fails only if a pool already exists, which cannot happen here.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    configure_workers()?;
    if !(cli.step_h > 0.0 && cli.step_h <= 1.0) {
        return Err(CliError::Usage(format!("--step-h must lie in (0, 1], got {}", cli.step_h)));
    }
    let provenance = Provenance {
        step: cli.step_h,
        seed: None,
    };
    match cli.command {
        Command::Table { id, out } => {
            let table = tables::build(id, cli.step_h)?;
            emit(&table.to_csv(&provenance)?, out.as_deref())?;
        }
        Command::Figure {
            figure:
                Figure::Losses {
                    ages,
                    lapse,
                    experience_lapse,
                    out,
                },
        } => {
            let reading = match experience_lapse {
                Some(rate) if rate >= 0.0 => ExperienceReading::Fixed(rate),
                Some(rate) => return Err(CliError::Usage(format!("--experience-lapse must be >= 0, got {rate}"))),
                None => ExperienceReading::FollowValuation,
            };
            let options = FigureOptions {
                ages: figure::parse_ages(&ages)?,
                lapses: figure::parse_lapses(&lapse)?,
                reading,
                step: cli.step_h,
            };
            emit(&figure::losses(&options)?.to_csv(&provenance)?, out.as_deref())?;
        }
        Command::Scenario {
            action: ScenarioAction::Run { file },
        } => {
            let config = ScenarioConfig::load(&file)?;
            let report = scenario::run(&config)?;
            let path = scenario::output_path(&config, &file);
            emit(&report.csv()?, Some(&path))?;
            print!("{}", report.summary());
            println!("{:<26} {}", "decomposition_csv", path.display());
        }
        Command::Verify { dir } => {
            let report = verify::verify(&dir, cli.step_h)?;
            print!("{}", report.render());
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("lapsecost: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
