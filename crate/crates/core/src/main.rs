use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use highest_trees::exact::{self, height::HEIGHT_TABLE_HEADER};
use highest_trees::experiments::{self, Event, ExperimentConfig, OutputFormat};
use highest_trees::Result;

#[derive(Parser)]
#[command(name = "highest-trees", version, about = "Random mapping experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum GwCheck {
    Survival,
    Progeny,
    Founders,
    Forest,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo estimates over uniform random mappings.
    Simulate {
        /// Comma-separated sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated event names, all evaluated on the same draws.
        #[arg(long, value_delimiter = ',', required = true)]
        event: Vec<String>,
        /// Branch level for the c-* events.
        #[arg(long)]
        c: Option<u32>,
        /// Tie count for k-highest.
        #[arg(long)]
        k: Option<usize>,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Lift the n * samples budget guard.
        #[arg(long)]
        force: bool,
        /// Write 0 for wall time so identical configs give identical bytes.
        #[arg(long)]
        no_timing: bool,
    },
    /// Exhaustive enumeration tables for n = 1..=max-n.
    Exact {
        #[arg(long)]
        max_n: usize,
        #[arg(long)]
        force: bool,
        /// Print the bounded-height table (exact vs Sachkov) instead.
        #[arg(long)]
        height_table: bool,
    },
    /// Branching-process checks.
    Gw {
        #[arg(value_enum)]
        check: GwCheck,
        /// Horizon for the survival sweep.
        #[arg(long, default_value_t = 100)]
        t: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Founder counts (progeny and forest use the first).
        #[arg(long, value_delimiter = ',')]
        founders: Vec<usize>,
        /// Largest total progeny binned individually.
        #[arg(long, default_value_t = 1000)]
        k_max: u64,
        /// Conditioned total progeny for the forest check.
        #[arg(long, default_value_t = 6)]
        total: u64,
    },
    /// Constants and the series recomputation.
    Constants,
    /// Fit c in p ~ c / sqrt(n) for each event in an estimate CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
    },
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn pretty(v: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn survival_horizons(t: usize) -> Vec<usize> {
    let mut ts: Vec<usize> =
        [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 10_000].into_iter().filter(|&s| s < t).collect();
    ts.push(t);
    ts
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { n, samples, seed, event, c, k, threads, format, out, force, no_timing } => {
            let events = event.iter().map(|e| Event::from_parts(e, c, k)).collect::<Result<Vec<_>>>()?;
            let cfg = ExperimentConfig {
                threads,
                format: match format {
                    Format::Csv => OutputFormat::Csv,
                    Format::Json => OutputFormat::Json,
                },
                output: out,
                force,
                timing: !no_timing,
                ..ExperimentConfig::simulate(n, samples, seed, events)
            };
            let rows = experiments::run_simulate(&cfg)?;
            let text = match cfg.format {
                OutputFormat::Csv => experiments::to_csv_string(&rows),
                OutputFormat::Json => pretty(&rows)?,
            };
            emit(cfg.output.as_ref(), &text)
        }
        Command::Exact { max_n, force, height_table } => {
            if height_table {
                let mut text = format!("{HEIGHT_TABLE_HEADER}\n");
                for row in exact::height_count_table(&[50, 100, 200, 400], &[1, 2, 3]) {
                    text.push_str(&row.csv_line());
                    text.push('\n');
                }
                return emit(None, &text);
            }
            let reports = experiments::run_exact(max_n, force)?;
            let v: Vec<_> = reports.iter().map(|r| r.to_json()).collect();
            emit(None, &pretty(&v)?)
        }
        Command::Gw { check, t, trials, seed, founders, k_max, total } => {
            let text = match check {
                GwCheck::Survival => pretty(&experiments::survival_sweep(&survival_horizons(t), trials, seed)?)?,
                GwCheck::Progeny => {
                    let n = founders.first().copied().unwrap_or(3);
                    pretty(&experiments::progeny_check(n, trials, k_max, seed)?)?
                }
                GwCheck::Founders => {
                    let ns = if founders.is_empty() { vec![1, 10, 100, 1000] } else { founders };
                    pretty(&experiments::founders_sweep(&ns, trials, seed)?)?
                }
                GwCheck::Forest => {
                    let n = founders.first().copied().unwrap_or(2);
                    pretty(&experiments::forest_uniformity_check(n, total, trials, seed)?)?
                }
            };
            emit(None, &text)
        }
        Command::Constants => emit(None, &pretty(&experiments::run_constants())?),
        Command::Fit { input } => {
            let rows = experiments::read_csv(&fs::read_to_string(&input)?)?;
            let reports = experiments::run_fit(&rows)?;
            let mut v = json!({ "fits": reports });
            let two = reports.iter().find(|r| r.event == Event::TwoHighest);
            let unique = reports.iter().find(|r| r.event == Event::UniqueHighest);
            if let (Some(a), Some(b)) = (two, unique) {
                v["two_vs_unique_distance_se"] = json!(a.distance_to(b));
            }
            emit(None, &pretty(&v)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
