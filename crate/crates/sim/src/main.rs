use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use uwgfdm_sim::output::{write_ccdf, write_json, write_psd, write_records};
use uwgfdm_sim::{run_oob, run_papr, run_throughput, Scenario, SimError, SimResult};

/// Monte Carlo simulator for unique-word GFDM and its CP/OFDM baselines.
#[derive(Parser)]
#[command(name = "uwgfdm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BER/BLER sweep over the scenario's Eb/N0 grid.
    Ber(Common),
    /// Same sweep, reported with both throughput columns.
    Throughput(Common),
    /// Out-of-band emission PSD per system.
    Oob(Common),
    /// PAPR CCDF per system.
    Papr(Common),
    /// Quick invariant checks.
    Selftest,
}

#[derive(Args)]
struct Common {
    /// Scenario file; built-in defaults when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV (ber, throughput) or directory (oob, papr).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restrict to these systems (labels or preset names); repeatable.
    #[arg(long = "system")]
    systems: Vec<String>,
    /// Worker threads; defaults to UWGFDM_WORKERS or all cores.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    command: &'a str,
    seed: u64,
    systems: Vec<&'a str>,
    results: T,
}

fn load(common: &Common) -> SimResult<Scenario> {
    let mut sc = match &common.scenario {
        Some(p) => Scenario::from_file(p)?,
        None => Scenario::default(),
    };
    if let Some(seed) = common.seed {
        sc.seed = seed;
    }
    sc.select_systems(&common.systems)?;
    Ok(sc)
}

fn workers(flag: Option<usize>) -> SimResult<usize> {
    if let Some(n) = flag {
        return if n > 0 {
            Ok(n)
        } else {
            Err(SimError::Usage("--workers must be positive".into()))
        };
    }
    match std::env::var("UWGFDM_WORKERS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| {
                SimError::Usage(format!("UWGFDM_WORKERS='{v}' is not a positive integer"))
            }),
        Err(_) => Ok(0),
    }
}

fn with_pool<R: Send>(n: usize, f: impl FnOnce() -> SimResult<R> + Send) -> SimResult<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| SimError::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(f)
}

fn json_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

fn run(cli: Cli) -> SimResult<()> {
    match cli.command {
        Command::Selftest => {
            let checks = uwgfdm_sim::selftest::run_selftest();
            for c in &checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                Err(SimError::Core(uwgfdm::Error::Consistency(
                    "self-test failed".into(),
                )))
            }
        }
        Command::Ber(c) | Command::Throughput(c) => {
            let sc = load(&c)?;
            let n = workers(c.workers)?;
            let records = with_pool(n, || run_throughput(&sc))?;
            let out = c
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("results.csv"));
            write_records(&out, &records)?;
            let summary = Summary {
                command: "ber",
                seed: sc.seed,
                systems: sc.systems.iter().map(|s| s.label.as_str()).collect(),
                results: &records,
            };
            write_json(&json_path(&out), &summary)?;
            for r in &records {
                println!(
                    "{:<14} {:>6.2} dB  ber {:.3e}  bler {:.3e}  T_block {:.4}  ({} blocks)",
                    r.system, r.ebn0_db, r.ber, r.bler, r.throughput_block, r.blocks
                );
            }
            Ok(())
        }
        Command::Oob(c) => {
            let sc = load(&c)?;
            let n = workers(c.workers)?;
            let dir = c.out.clone().unwrap_or_else(|| PathBuf::from("oob"));
            let results = with_pool(n, || {
                sc.systems
                    .iter()
                    .map(|s| run_oob(&sc, s))
                    .collect::<SimResult<Vec<_>>>()
            })?;
            for r in &results {
                write_psd(&dir.join(format!("{}_psd.csv", r.system)), &r.psd)?;
                println!(
                    "{:<14} OOB {:>8.2} dB ({} segments)",
                    r.system, r.oob_db, r.segments
                );
            }
            let summary = Summary {
                command: "oob",
                seed: sc.seed,
                systems: sc.systems.iter().map(|s| s.label.as_str()).collect(),
                results: &results,
            };
            write_json(&dir.join("summary.json"), &summary)
        }
        Command::Papr(c) => {
            let sc = load(&c)?;
            let n = workers(c.workers)?;
            let dir = c.out.clone().unwrap_or_else(|| PathBuf::from("papr"));
            let results = with_pool(n, || {
                sc.systems
                    .iter()
                    .map(|s| run_papr(&sc, s))
                    .collect::<SimResult<Vec<_>>>()
            })?;
            for r in &results {
                write_ccdf(&dir.join(format!("{}_ccdf.csv", r.system)), &r.ccdf)?;
                println!(
                    "{:<14} PAPR(1e-3) {:>6.2} dB ({} blocks)",
                    r.system, r.papr_at_1e3_db, r.blocks
                );
            }
            let summary = Summary {
                command: "papr",
                seed: sc.seed,
                systems: sc.systems.iter().map(|s| s.label.as_str()).collect(),
                results: &results,
            };
            write_json(&dir.join("summary.json"), &summary)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
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
