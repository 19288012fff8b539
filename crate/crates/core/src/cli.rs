//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::harness::{enumerate_exhaustive, SimConfig, Simulator, StrategyKind};
use crate::protocol::{AngleSource, Protocol};
use crate::report::write_rounds_csv_file;
use crate::selftest::run_selftest;

#[derive(Debug, Parser)]
#[command(
    name = "blindqkd",
    version,
    about = "Blind-polarization QKD protocols and impersonation attacks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate seeded rounds and write a report.
    Run(RunArgs),
    /// Check the protocol identities over every binary parameter and grid angle.
    Enumerate(EnumerateArgs),
    /// Run the exhaustive oracles and honest-correctness checks.
    Selftest,
}

fn parse_protocol(s: &str) -> Result<Protocol, String> {
    s.parse()
}

fn parse_strategy(s: &str) -> Result<StrategyKind, String> {
    s.parse()
        .map_err(|e: crate::harness::ConfigError| e.to_string())
}

fn parse_rounds(s: &str) -> Result<u64, String> {
    let n: u64 = s
        .parse()
        .map_err(|_| format!("invalid round count '{s}'"))?;
    if n == 0 {
        return Err("rounds must be at least 1".into());
    }
    Ok(n)
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|_| format!("invalid threshold '{s}'"))?;
    if !(t > 0.0 && t < 1.0) {
        return Err(format!("threshold must lie in (0, 1), got {t}"));
    }
    Ok(t)
}

fn parse_grid(s: &str) -> Result<u32, String> {
    let k: u32 = s.parse().map_err(|_| format!("invalid grid size '{s}'"))?;
    if k < 2 {
        return Err(format!("grid size must be at least 2, got {k}"));
    }
    Ok(k)
}

fn parse_threads(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("invalid thread count '{s}'")),
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Protocol number: 1 or 2.
    #[arg(long, default_value = "1", value_parser = parse_protocol)]
    protocol: Protocol,
    /// none | passive | impersonation | intercept-resend
    #[arg(long, default_value = "none", value_parser = parse_strategy)]
    attack: StrategyKind,
    #[arg(long, default_value = "10000", value_parser = parse_rounds)]
    rounds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// continuous | grid:K (angles jπ/K)
    #[arg(long, default_value = "continuous")]
    angles: AngleSource,
    /// JSON report path. Printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-round CSV dump path.
    #[arg(long = "rounds-csv")]
    rounds_csv: Option<PathBuf>,
    /// QBER above which an eavesdropper is flagged.
    #[arg(long, default_value = "0.05", value_parser = parse_threshold)]
    threshold: f64,
    /// Worker threads. Defaults to all cores; the report does not depend on it.
    #[arg(long, value_parser = parse_threads)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    #[arg(long, default_value = "1", value_parser = parse_protocol)]
    protocol: Protocol,
    #[arg(long, default_value = "none", value_parser = parse_strategy)]
    attack: StrategyKind,
    #[arg(long, default_value_t = AngleSource::DEFAULT_GRID, value_parser = parse_grid)]
    grid: u32,
    /// JSON verdict table path.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A validated command line.
#[derive(Debug, Clone, PartialEq)]
pub enum CliInvocation {
    Run {
        config: SimConfig,
        out: Option<PathBuf>,
        rounds_csv: Option<PathBuf>,
        threads: Option<usize>,
    },
    Enumerate {
        protocol: Protocol,
        strategy: StrategyKind,
        grid: u32,
        out: Option<PathBuf>,
    },
    Selftest,
}

pub fn parse_args<I, T>(argv: I) -> Result<CliInvocation, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    Ok(match cli.command {
        Command::Run(a) => {
            let config = SimConfig {
                protocol: a.protocol,
                strategy: a.attack,
                rounds: a.rounds,
                seed: a.seed,
                angles: a.angles,
                threshold: a.threshold,
            };
            config.validate().map_err(|e| {
                Cli::command().error(ErrorKind::ArgumentConflict, format!("--attack: {e}"))
            })?;
            CliInvocation::Run {
                config,
                out: a.out,
                rounds_csv: a.rounds_csv,
                threads: a.threads,
            }
        }
        Command::Enumerate(a) => CliInvocation::Enumerate {
            protocol: a.protocol,
            strategy: a.attack,
            grid: a.grid,
            out: a.out,
        },
        Command::Selftest => CliInvocation::Selftest,
    })
}

/// Execute an invocation. Returns whether every requested check passed.
pub fn execute<W: Write>(invocation: &CliInvocation, stdout: &mut W) -> anyhow::Result<bool> {
    match invocation {
        CliInvocation::Run {
            config,
            out,
            rounds_csv,
            threads,
        } => {
            let sim = Simulator::new(config.clone())?;
            let report = match (rounds_csv, threads) {
                (Some(csv_path), _) => {
                    let records = match threads {
                        Some(n) => rayon::ThreadPoolBuilder::new()
                            .num_threads(*n)
                            .build()?
                            .install(|| sim.records())?,
                        None => sim.records()?,
                    };
                    write_rounds_csv_file(&records, csv_path)?;
                    sim.report(&crate::analysis::Tally::from_records(&records))?
                }
                (None, Some(n)) => sim.run_with_threads(*n)?,
                (None, None) => sim.run()?,
            };
            writeln!(stdout, "{}", report.summary_line())?;
            match out {
                Some(path) => report.write_json(path)?,
                None => writeln!(stdout, "{}", report.to_json()?)?,
            }
            Ok(true)
        }
        CliInvocation::Enumerate {
            protocol,
            strategy,
            grid,
            out,
        } => {
            let table = enumerate_exhaustive(*protocol, strategy, *grid)?;
            for row in &table.rows {
                let bits: Vec<String> = row.bits.iter().map(|(k, v)| format!("{k}={v}")).collect();
                writeln!(
                    stdout,
                    "{:<16} cases={} failed={} {}",
                    bits.join(","),
                    row.cases,
                    row.failed,
                    if row.failed == 0 { "PASS" } else { "FAIL" }
                )?;
            }
            writeln!(
                stdout,
                "protocol={} attack={} grid={} total={} failed={} {}",
                table.protocol,
                table.strategy,
                table.grid,
                table.total_cases,
                table.failed_cases,
                if table.all_passed() { "PASS" } else { "FAIL" }
            )?;
            if let Some(path) = out {
                std::fs::write(path, serde_json::to_string_pretty(&table)? + "\n")?;
            }
            Ok(table.all_passed())
        }
        CliInvocation::Selftest => {
            let checks = run_selftest();
            for c in &checks {
                writeln!(
                    stdout,
                    "[{}] {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                )?;
            }
            Ok(checks.iter().all(|c| c.passed))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<&str> {
        std::iter::once("blindqkd")
            .chain(s.split_whitespace())
            .collect()
    }

    #[test]
    fn parses_full_run() {
        let inv = parse_args(argv(
            "run --protocol 2 --attack impersonation --rounds 100000 --seed 42 --out report.json",
        ))
        .unwrap();
        match inv {
            CliInvocation::Run { config, out, .. } => {
                assert_eq!(config.protocol, Protocol::Two);
                assert_eq!(config.strategy, StrategyKind::impersonation());
                assert_eq!(config.rounds, 100_000);
                assert_eq!(config.seed, 42);
                assert_eq!(config.angles, AngleSource::Continuous);
                assert_eq!(config.threshold, 0.05);
                assert_eq!(out, Some(PathBuf::from("report.json")));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_values_naming_the_flag() {
        for (args, flag) in [
            ("run --protocol 3", "--protocol"),
            ("run --attack mitm", "--attack"),
            ("run --rounds 0", "--rounds"),
            ("run --threshold 1.5", "--threshold"),
            ("run --angles grid:1", "--angles"),
            ("run --protocol 2 --attack intercept-resend", "--attack"),
        ] {
            let err = parse_args(argv(args)).unwrap_err();
            assert!(err.to_string().contains(flag), "{args}: {err}");
            assert_ne!(err.exit_code(), 0);
        }
    }

    #[test]
    fn rejects_unknown_flags() {
        assert!(parse_args(argv("run --verbose")).is_err());
        assert!(parse_args(argv("frobnicate")).is_err());
    }

    #[test]
    fn parses_enumerate_and_selftest() {
        assert_eq!(
            parse_args(argv("enumerate --protocol 2 --grid 4")).unwrap(),
            CliInvocation::Enumerate {
                protocol: Protocol::Two,
                strategy: StrategyKind::None,
                grid: 4,
                out: None
            }
        );
        assert_eq!(
            parse_args(argv("selftest")).unwrap(),
            CliInvocation::Selftest
        );
    }

    #[test]
    fn grid_angles_flag() {
        match parse_args(argv("run --angles grid:4")).unwrap() {
            CliInvocation::Run { config, .. } => assert_eq!(config.angles, AngleSource::Grid(4)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
