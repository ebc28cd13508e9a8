//! `causalec`: run scenarios, analyse read latency, and emit the bundled
//! scenario files.
//!
//! Exit status is 0 when every check of every seed passes, 1 when some check
//! fails, and 2 for usage errors and malformed scenarios.

use std::fs;
use std::io;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

use causalec::harness::{
    bundled_scenarios, latency_comparison, run_fuzz, run_scenario, summarize, FuzzParams, Overrides, ScenarioReport,
    SeedReport,
};
use causalec::{Protocol, RunOutcome, Scenario, ScenarioError};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "causalec",
    version,
    about = "Simulate and check the CausalEC erasure-coded store"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario over a range of seeds and check every run.
    Run {
        scenario: PathBuf,
        /// Seeds as `A..B` (both ends included) or a single seed.
        #[arg(long, value_parser = parse_seeds)]
        seeds: Option<Range<u64>>,
        #[arg(long, value_parser = parse_protocol)]
        protocol: Option<Protocol>,
        /// Run a full round of internal actions at least every F events.
        #[arg(long)]
        fairness: Option<usize>,
        #[arg(long)]
        step_cap: Option<u64>,
        /// Write a JSON-lines trace and a JSON report per seed here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Per-(server, object) read latency of the scenario's code against the
    /// best whole-object replication.
    Latency {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Write the bundled scenarios as JSON files.
    Scenarios {
        #[arg(long, default_value = "scenarios")]
        out: PathBuf,
    },
    /// Run the randomized suite: random codes, delays, workloads and halts.
    Fuzz {
        #[arg(long, default_value_t = 1000)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        #[arg(long, value_parser = parse_protocol, default_value = "causalec")]
        protocol: Protocol,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

fn parse_protocol(s: &str) -> Result<Protocol, String> {
    s.parse()
}

/// `A..B` includes both ends, so `0..99` is a hundred seeds.
fn parse_seeds(s: &str) -> Result<Range<u64>, String> {
    let num = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("bad seed `{t}`: {e}"));
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
            if b < a {
                return Err(format!("empty seed range {s}"));
            }
            Ok(a..b + 1)
        }
        None => {
            let a = num(s)?;
            Ok(a..a + 1)
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: io::Error,
    },
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.display().to_string(),
        source,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            scenario,
            seeds,
            protocol,
            fairness,
            step_cap,
            out,
            format,
        } => cmd_run(
            &scenario,
            seeds,
            Overrides {
                protocol,
                fairness,
                step_cap,
            },
            out.as_deref(),
            format,
        ),
        Command::Latency { scenario, format } => cmd_latency(&scenario, format),
        Command::Scenarios { out } => cmd_scenarios(&out),
        Command::Fuzz {
            runs,
            first_seed,
            protocol,
            format,
        } => cmd_fuzz(first_seed..first_seed + runs, protocol, format),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Scenario(ScenarioError::Io { .. }) | CliError::Write { .. } => ExitCode::from(1),
                CliError::Scenario(_) => ExitCode::from(2),
            }
        }
    }
}

fn cmd_run(
    path: &Path,
    seeds: Option<Range<u64>>,
    overrides: Overrides,
    out: Option<&Path>,
    format: Format,
) -> Result<bool, CliError> {
    let sc = Scenario::load(path)?;
    let seeds = seeds.unwrap_or_else(|| sc.seeds.range());
    if let Some(dir) = out {
        create_dir(dir)?;
    }
    let write_error: Mutex<Option<CliError>> = Mutex::new(None);
    let on_trace = |outcome: &RunOutcome| {
        let Some(dir) = out else { return };
        let file = dir.join(format!("{}-seed{}.trace.jsonl", sc.name, outcome.seed));
        if let Err(e) = write_file(&file, outcome.trace.to_jsonl().as_bytes()) {
            write_error.lock().unwrap().get_or_insert(e);
        }
    };
    let report = run_scenario(&sc, seeds, overrides, on_trace)?;
    if let Some(e) = write_error.into_inner().unwrap() {
        return Err(e);
    }
    if let Some(dir) = out {
        for seed in &report.seeds {
            let file = dir.join(format!("{}-seed{}.report.json", report.scenario, seed.seed));
            write_file(&file, &serde_json::to_vec_pretty(seed).expect("reports serialize"))?;
        }
    }
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize")),
        Format::Table => print!("{}", render_run(&report)),
    }
    Ok(report.passed())
}

fn render_run(report: &ScenarioReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "scenario {} ({})", report.scenario, report.protocol.name());
    let _ = writeln!(
        out,
        "{:>6} {:>9} {:>7} {:>7} {:>8} {:>8} {:>8} {:>8} {:>10} {:>8}  trace",
        "seed", "end", "ops", "halted", "causal", "eventual", "storage", "liveness", "invariants", "expect"
    );
    for s in &report.seeds {
        let v = s.checks.verdicts();
        let halted = if s.halted.is_empty() {
            "-".to_string()
        } else {
            s.halted.iter().map(|h| format!("s{h}")).collect::<Vec<_>>().join(",")
        };
        let _ = writeln!(
            out,
            "{:>6} {:>9.3} {:>7} {:>7} {:>8} {:>8} {:>8} {:>8} {:>10} {:>8}  {}",
            s.seed,
            s.end_time,
            format!("{}/{}", s.completed, s.operations),
            halted,
            v[0].1.label(),
            v[1].1.label(),
            v[2].1.label(),
            v[3].1.label(),
            v[4].1.label(),
            v[5].1.label(),
            &s.trace_hash[..12],
        );
    }
    for s in report.seeds.iter().filter(|s| !s.passed) {
        let _ = writeln!(out, "seed {} failed:", s.seed);
        for line in failure_lines(s) {
            let _ = writeln!(out, "  {line}");
        }
    }
    let passed = report.seeds.iter().filter(|s| s.passed).count();
    let _ = writeln!(out, "{passed}/{} seeds passed", report.seeds.len());
    out
}

fn failure_lines(s: &SeedReport) -> Vec<String> {
    let c = &s.checks;
    let mut lines = Vec::new();
    if let Some(w) = &c.causal.witness {
        lines.push(format!(
            "causal: {}",
            serde_json::to_string(w).expect("witnesses serialize")
        ));
    }
    let groups = [
        ("eventual", &c.eventual),
        ("storage", &c.storage.result),
        ("liveness", &c.liveness.result),
        ("invariants", &c.invariants.result),
        ("expectations", &c.expectations),
    ];
    for (name, r) in groups {
        if !r.verdict.ok() {
            lines.extend(r.violations.iter().take(5).map(|v| format!("{name}: {v}")));
        }
    }
    lines
}

fn cmd_latency(path: &Path, format: Format) -> Result<bool, CliError> {
    let sc = Scenario::load(path)?;
    let cmp = latency_comparison(&sc)?;
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&cmp).expect("reports serialize")),
        Format::Table => print!("{}", cmp.render()),
    }
    Ok(true)
}

fn cmd_scenarios(dir: &Path) -> Result<bool, CliError> {
    create_dir(dir)?;
    for sc in bundled_scenarios() {
        let file = dir.join(format!("{}.json", sc.name));
        let mut text = sc.to_json_pretty();
        text.push('\n');
        write_file(&file, text.as_bytes())?;
        println!("{}", file.display());
    }
    Ok(true)
}

fn cmd_fuzz(seeds: Range<u64>, protocol: Protocol, format: Format) -> Result<bool, CliError> {
    let reports = run_fuzz(seeds, protocol, FuzzParams::default());
    let summary = summarize(&reports);
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&summary).expect("summaries serialize")
        ),
        Format::Table => {
            println!(
                "fuzz suite ({}), {} runs, {} with a halted server",
                protocol.name(),
                summary.runs,
                summary.runs_with_halt
            );
            println!("  causal failures       {:?}", summary.causal_failures);
            println!(
                "  write locality        {} violations over {} delivered writes",
                summary.locality_violations, summary.writes_delivered
            );
            println!(
                "  read liveness         {}/{} required reads completed",
                summary.reads_required_completed, summary.reads_required
            );
            println!(
                "  eventual failures     {:?} of {} checked",
                summary.eventual_failures, summary.eventual_checked
            );
            println!(
                "  storage failures      {:?} of {} checked",
                summary.storage_failures, summary.storage_checked
            );
            println!(
                "  invariant failures    {:?} over {} transitions",
                summary.invariant_failures, summary.transitions_probed
            );
            println!("  not quiescent         {:?}", summary.not_quiescent);
        }
    }
    Ok(reports.iter().all(|r| r.passed))
}
