//! `formlab` command-line driver.
//!
//! Exit codes: 0 when every check passes, 1 when the report records a
//! violation, 2 for usage, IO, and scenario errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use formlab::constructions::{builtin, builtin_names};
use formlab::report::{report_json, run_scenario, write_csv, Command, RunOptions};
use formlab::{load_scenario_with_params, Scenario};

#[derive(Parser)]
#[command(
    name = "formlab",
    version,
    about = "Indefinite form diagnostics on operator truncations"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Full pipeline on a scenario file or bundled name.
    Run(Common),
    /// Stability diagnosis only.
    Diagnose(Common),
    /// Bundled example with its canned expectations.
    Reproduce {
        /// Bundled scenario name (see `formlab list`).
        name: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Names of the bundled scenarios.
    List,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Scenario JSON file, or the name of a bundled scenario.
    #[arg(long)]
    scenario: Option<String>,
    /// Truncation sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Textual parameter substitution `key=value`; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, String)>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Report JSON destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV series destination.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(format!("expected key=value, got '{s}'")),
    }
}

/// A usage, IO, or scenario error; always exit code 2.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(Failure(msg)) = configure_threads() {
        eprintln!("formlab: {msg}");
        return ExitCode::from(2);
    }
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("formlab: {msg}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("FORMLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().map_err(|_| {
        Failure(format!(
            "FORMLAB_THREADS must be a nonnegative integer, got '{value}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()?;
    Ok(())
}

fn execute(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Cmd::List => {
            for name in builtin_names() {
                let b = builtin(name).expect("listed");
                println!("{name}\t{}", b.summary);
            }
            Ok(0)
        }
        Cmd::Run(common) => pipeline(Command::Run, None, common),
        Cmd::Diagnose(common) => pipeline(Command::Diagnose, None, common),
        Cmd::Reproduce { name, common } => pipeline(Command::Reproduce, name, common),
    }
}

fn pipeline(command: Command, name: Option<String>, common: Common) -> Result<u8, Failure> {
    let started = Instant::now();
    let mut opts = RunOptions::new(command);
    let mut scenario = match command {
        Command::Reproduce => {
            let name = name
                .or_else(|| common.scenario.clone())
                .ok_or_else(|| Failure("reproduce needs a bundled scenario name".into()))?;
            let b = builtin(&name).ok_or_else(|| {
                Failure(format!(
                    "unknown bundled scenario '{name}' (known: {})",
                    builtin_names().join(", ")
                ))
            })?;
            opts.params = b.resolved_params(&common.params);
            opts.expectations = Some(b.expectations(&common.params)?);
            b.scenario(&common.params)?
        }
        _ => {
            let source = common
                .scenario
                .clone()
                .ok_or_else(|| Failure("--scenario is required".into()))?;
            let (scenario, params) = load(&source, &common.params)?;
            opts.params = params;
            scenario
        }
    };
    if let Some(seed) = common.seed {
        scenario.seed = seed;
    }
    if let Some(dims) = &common.dims {
        opts.dims = Some(normalize_dims(dims)?);
    }

    let report = run_scenario(&scenario, &opts)?;
    let mut json = report_json(&report);
    json.push('\n');
    match &common.out {
        Some(path) => write_file(path, json.as_bytes())?,
        None => print!("{json}"),
    }
    if let Some(path) = &common.csv {
        let mut buf = Vec::new();
        write_csv(&report, &mut buf)?;
        write_file(path, &buf)?;
    }
    eprintln!(
        "formlab: {} {}: consensus {:?}, {} violation(s), {:.3}s",
        match command {
            Command::Run => "run",
            Command::Diagnose => "diagnose",
            Command::Reproduce => "reproduce",
        },
        report.scenario,
        report.stability.consensus,
        report.violations.len(),
        started.elapsed().as_secs_f64()
    );
    for v in &report.violations {
        if v.check == "consensus" {
            eprintln!(
                "formlab: violation consensus: got {}, expected {}",
                consensus_name(v.value),
                consensus_name(v.limit)
            );
            continue;
        }
        eprintln!(
            "formlab: violation {} at N={}: {:e} (limit {:e})",
            v.check,
            v.n.map_or("-".to_string(), |n| n.to_string()),
            v.value,
            v.limit
        );
    }
    Ok(report.exit_code() as u8)
}

/// Inverse of the numeric consensus code carried by a violation.
fn consensus_name(code: f64) -> &'static str {
    if code > 0.0 {
        "stable"
    } else if code < 0.0 {
        "unstable"
    } else {
        "inconclusive"
    }
}

/// Loads a scenario file, falling back to a bundled name when no such file
/// exists.
fn load(
    source: &str,
    params: &[(String, String)],
) -> Result<(Scenario, Vec<(String, String)>), Failure> {
    let path = Path::new(source);
    if path.exists() {
        let bytes = fs::read(path).map_err(|e| Failure(format!("{source}: {e}")))?;
        let scenario = load_scenario_with_params(&bytes, params)
            .map_err(|e| Failure(format!("{source}: {e}")))?;
        return Ok((scenario, params.to_vec()));
    }
    if let Some(b) = builtin(source) {
        return Ok((b.scenario(params)?, b.resolved_params(params)));
    }
    Err(Failure(format!(
        "{source}: no such file or bundled scenario"
    )))
}

fn normalize_dims(dims: &[usize]) -> Result<Vec<usize>, Failure> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Failure(
            "--dims must be a nonempty list of positive integers".into(),
        ));
    }
    let mut out = dims.to_vec();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure(format!("{}: {e}", path.display())))
}
