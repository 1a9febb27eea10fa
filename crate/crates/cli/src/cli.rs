//! Command line: `run`, `sweep`, `validate`, `report`.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage,
//! config or I/O errors.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use echolab::simulation::SimConfig;
use echolab::StrategyProfile;
use rayon::prelude::*;

use crate::config::{apply, load_scenario, sweep_points, ConfigError, Scenario};
use crate::output::{encode_results, write_file, Format};
use crate::pipeline::{run_point, RunResult};
use crate::plots::{emit_plot_data, requested};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "echolab", version, about = "Election game with ads and voter cheap talk")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve, simulate and check one scenario.
    Run {
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run every point of the scenario's sweep grid.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Parse and validate a scenario without running it.
    Validate { config: PathBuf },
    /// Summarize result tables in a directory.
    Report {
        #[arg(default_value = "results")]
        dir: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunOpts {
    /// Override the simulation seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the number of trials; adds a simulation if the scenario has none.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, env = "ECHOLAB_OUT_DIR", default_value = "results")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug)]
pub struct Failure(pub String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure(e.to_string())
    }
}

fn prepare(path: &Path, opts: &RunOpts) -> Result<Scenario, ConfigError> {
    let mut s = load_scenario(path)?;
    if opts.trials.is_some() && s.sim.is_none() {
        s.sim = Some(SimConfig::new(s.params, StrategyProfile::silent()));
    }
    if let Some(sim) = &mut s.sim {
        if let Some(seed) = opts.seed {
            sim.seed = seed;
        }
        if let Some(t) = opts.trials {
            sim.n_trials = t;
        }
        sim.validate().map_err(|e| ConfigError::Invalid { field: "--trials".into(), reason: e.to_string() })?;
    }
    Ok(s)
}

fn verdict(results: &[RunResult]) -> i32 {
    let mut code = EXIT_OK;
    for r in results.iter().filter(|r| !r.all_pass()) {
        eprintln!("FAIL {} point {}: {}", r.scenario, r.point, r.failed().join(", "));
        code = EXIT_FAIL;
    }
    code
}

fn run(config: &Path, opts: &RunOpts) -> Result<i32, Failure> {
    let s = prepare(config, opts)?;
    let result = run_point(&s, 0, Vec::new())?;
    let path = opts.out_dir.join(format!("{}.{}", s.name, opts.format.ext()));
    write_file(&path, &encode_results(std::slice::from_ref(&result), opts.format)?)?;
    println!("{}", path.display());
    for kind in requested(&s) {
        println!("{}", emit_plot_data(&result, &s, kind, &opts.out_dir, opts.format)?.display());
    }
    Ok(verdict(&[result]))
}

fn sweep(config: &Path, opts: &RunOpts) -> Result<i32, Failure> {
    let base = prepare(config, opts)?;
    if base.sweep.is_empty() {
        return Err(Failure(format!("{}: no [[sweep]] axes", config.display())));
    }
    let points = sweep_points(&base.sweep)
        .into_iter()
        .map(|a| apply(&base, &a).map(|s| (s, a)))
        .collect::<Result<Vec<_>, _>>()?;
    let results = points
        .into_par_iter()
        .enumerate()
        .map(|(i, (s, a))| run_point(&s, i, a))
        .collect::<Result<Vec<_>, _>>()?;
    let dir = opts.out_dir.join(&base.name);
    for r in &results {
        let path = dir.join(format!("{}-{}.{}", base.name, r.point, opts.format.ext()));
        write_file(&path, &encode_results(std::slice::from_ref(r), opts.format)?)?;
    }
    let combined = dir.join(format!("sweep.{}", opts.format.ext()));
    write_file(&combined, &encode_results(&results, opts.format)?)?;
    println!("{} ({} points)", combined.display(), results.len());
    Ok(verdict(&results))
}

fn validate(config: &Path) -> Result<i32, Failure> {
    let s = load_scenario(config)?;
    let points = sweep_points(&s.sweep);
    for a in &points {
        apply(&s, a)?;
    }
    println!("{}: ok ({} point{})", s.name, points.len(), if points.len() == 1 { "" } else { "s" });
    Ok(EXIT_OK)
}

/// Splits one CSV record, honoring double-quoted fields.
fn csv_fields(line: &str) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(ch) = chars.next() {
        match (ch, quoted) {
            ('"', true) if chars.peek() == Some(&'"') => {
                chars.next();
                out.last_mut().unwrap().push('"');
            }
            ('"', _) => quoted = !quoted,
            (',', false) => out.push(String::new()),
            _ => out.last_mut().unwrap().push(ch),
        }
    }
    out
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub files: usize,
    pub rows: usize,
    pub failed: Vec<String>,
}

/// (rows, failing rows as "scenario#point: checks") of one result file;
/// None for files that are not result tables.
fn scan_file(path: &Path) -> Result<Option<(usize, Vec<String>)>, Failure> {
    let text = std::fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => {
            let mut lines = text.lines();
            let header = csv_fields(lines.next().unwrap_or(""));
            let col = |name: &str| header.iter().position(|h| h == name);
            let (Some(sc), Some(pt), Some(ok), Some(fl)) = (col("scenario"), col("point"), col("all_pass"), col("failed")) else {
                return Ok(None);
            };
            let mut rows = 0;
            let mut failed = Vec::new();
            for line in lines.filter(|l| !l.is_empty()) {
                let f = csv_fields(line);
                rows += 1;
                if f.get(ok).map(String::as_str) != Some("true") {
                    failed.push(format!("{}#{}: {}", f[sc], f[pt], f[fl]));
                }
            }
            Ok(Some((rows, failed)))
        }
        Some("json") => {
            let v: serde_json::Value = serde_json::from_str(&text)?;
            let Some(arr) = v.as_array() else { return Ok(None) };
            if !arr.iter().all(|r| r.get("checks").is_some()) {
                return Ok(None);
            }
            let failed = arr
                .iter()
                .filter_map(|r| {
                    let bad: Vec<&str> = r["checks"]
                        .as_array()?
                        .iter()
                        .filter(|c| c["pass"] != serde_json::Value::Bool(true))
                        .filter_map(|c| c["name"].as_str())
                        .collect();
                    (!bad.is_empty()).then(|| format!("{}#{}: {}", r["scenario"].as_str().unwrap_or("?"), r["point"], bad.join(";")))
                })
                .collect();
            Ok(Some((arr.len(), failed)))
        }
        _ => Ok(None),
    }
}

pub fn tally(dir: &Path) -> Result<Tally, Failure> {
    let mut t = Tally::default();
    let mut stack = vec![dir.to_path_buf()];
    let mut files = Vec::new();
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| Failure(format!("{}: {e}", d.display())))? {
            let p = entry?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push(p);
            }
        }
    }
    files.sort();
    for f in files {
        // combined sweep tables repeat the per-point rows
        if f.file_stem().and_then(|s| s.to_str()) == Some("sweep") {
            continue;
        }
        if let Some((rows, failed)) = scan_file(&f)? {
            t.files += 1;
            t.rows += rows;
            t.failed.extend(failed);
        }
    }
    Ok(t)
}

fn report(dir: &Path) -> Result<i32, Failure> {
    let t = tally(dir)?;
    println!("{} result files, {} rows, {} failing", t.files, t.rows, t.failed.len());
    for f in &t.failed {
        println!("  FAIL {f}");
    }
    Ok(if t.failed.is_empty() { EXIT_OK } else { EXIT_FAIL })
}

pub fn execute(cli: Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Run { config, opts } | Command::Sweep { config, opts } => {
            if let Some(n) = opts.jobs {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("warning: {e}");
                }
            }
            match cli.command {
                Command::Run { .. } => run(config, opts),
                _ => sweep(config, opts),
            }
        }
        Command::Validate { config } => validate(config),
        Command::Report { dir } => report(dir),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            EXIT_ERROR
        }
    }
}

pub fn main() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => execute(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_ERROR
            } else {
                EXIT_OK
            }
        }
    }
}
