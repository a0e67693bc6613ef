use std::path::PathBuf;
use std::process::ExitCode;

use argprin::emit::{emit, Format};
use argprin::scenario::{load_scenario, LoadError, Scenario};
use argprin::{builtins, run};
use clap::{Parser, Subcommand};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "argprin", version, about = "Argument-principle and disc-family workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenario files or built-ins (`builtin:<id>`) and write reports.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario JSON paths or `builtin:<id>`.
    #[arg(required_unless_present = "list_builtins")]
    scenarios: Vec<String>,
    /// Report directory.
    #[arg(long, default_value = "reports")]
    out: PathBuf,
    /// Comma-separated subset of json,csv,svg.
    #[arg(long, default_value = "json,csv,svg", value_parser = |s: &str| Format::parse_list(s).map(Formats))]
    formats: Formats,
    /// Boundary samples per disc and samples per parameter circle.
    #[arg(long, value_name = "N,M", value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    /// Override a tolerance, e.g. `--tol rank=1e-10`; repeatable.
    #[arg(long, value_name = "NAME=VALUE", value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    /// Print the built-in scenario ids and exit.
    #[arg(long)]
    list_builtins: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone)]
struct Formats(Vec<Format>);

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected N,M")?;
    let n = a.trim().parse().map_err(|e| format!("N: {e}"))?;
    let m = b.trim().parse().map_err(|e| format!("M: {e}"))?;
    Ok((n, m))
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let v: f64 = v.trim().parse().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn prepare(source: &str, a: &RunArgs) -> Result<Scenario, LoadError> {
    let mut s = load_scenario(source)?;
    if let Some((n, m)) = a.grid {
        s.grid.boundary = n;
        s.grid.parameter = m;
    }
    for (k, v) in &a.tol {
        s.tolerances.set(k, *v)?;
    }
    s.validate()?;
    Ok(s)
}

/// 0 when everything passes, 1 on a failed check, 2 on a usage or pipeline error.
fn run_one(source: &str, a: &RunArgs) -> (u8, String) {
    let s = match prepare(source, a) {
        Ok(s) => s,
        Err(e) => return (2, format!("{source}: error: {e}")),
    };
    let start = std::time::Instant::now();
    let report = match run(&s) {
        Ok(r) => r,
        Err(e) => return (2, format!("{}: error in {e}", s.id)),
    };
    let mut out = String::new();
    match emit(&report, &a.out, &a.formats.0) {
        Ok(paths) => {
            for p in paths {
                out.push_str(&format!("  wrote {}\n", p.display()));
            }
        }
        Err(e) => return (2, format!("{}: cannot write reports to {}: {e}", s.id, a.out.display())),
    }
    for (k, v) in &report.verdicts {
        out.push_str(&format!("  {k}: {v}\n"));
    }
    for c in report.failed() {
        out.push_str(&format!("  FAILED {}: {}\n", c.name, c.detail));
    }
    let code = if report.all_pass() { 0 } else { 1 };
    let status = if code == 0 { "ok" } else { "FAILED" };
    (code, format!("{} [{}] {status} in {:.2} s\n{}", s.id, s.kind.name(), start.elapsed().as_secs_f64(), out.trim_end()))
}

fn main() -> ExitCode {
    let Command::Run(a) = Cli::parse().command;
    if a.list_builtins {
        for id in builtins::ids() {
            println!("{id}");
        }
        return ExitCode::SUCCESS;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = a.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        pool = pool.num_threads(j);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let results: Vec<(u8, String)> = pool.install(|| a.scenarios.par_iter().map(|s| run_one(s, &a)).collect());
    let mut code = 0;
    for (c, text) in results {
        if c == 2 {
            eprintln!("{text}");
        } else {
            println!("{text}");
        }
        code = code.max(c);
    }
    ExitCode::from(code)
}
