use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dmc_core::baselines::{ac3_solve, backtrack_solve, static_project};
use dmc_core::io::{fixtures, load_network, serialize};
use dmc_core::{Engine, Network, RunStats, SearchOptions, SolveMode, Task};

#[derive(Parser)]
#[command(name = "dmc", version, about = "Dynamic meta-constraint solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run tasks in order and enumerate solutions.
    Solve(SolveArgs),
    /// Parse and validate a problem file.
    Validate { file: PathBuf },
    /// Run a classic solver on the static projection.
    Baseline {
        solver: Solver,
        file: PathBuf,
        #[arg(long, value_enum)]
        stats: Option<StatsFormat>,
    },
    /// Bundled problems.
    Fixtures {
        #[command(subcommand)]
        command: FixtureCommand,
    },
    /// Start the session service.
    Serve {
        #[arg(long, env = "DMC_PORT", default_value_t = 8080)]
        port: u16,
        /// Idle seconds before a session is dropped.
        #[arg(long, default_value_t = 1800)]
        idle: u64,
    },
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    /// First request, as `satisfy:ID` or `unsatisfy:ID`.
    #[arg(long)]
    task: String,
    /// Further requests, run after `--task`.
    #[arg(long)]
    then: Vec<String>,
    #[arg(long, conflicts_with = "first", required_unless_present = "first")]
    all: bool,
    #[arg(long)]
    first: bool,
    #[arg(long, value_enum)]
    stats: Option<StatsFormat>,
    /// Write solutions here instead of standard output.
    #[arg(long)]
    solutions: Option<PathBuf>,
    /// Turn off the Yet-value short-circuits.
    #[arg(long)]
    no_pruning: bool,
}

#[derive(Subcommand)]
enum FixtureCommand {
    Emit { name: String, path: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Bt,
    Ac3,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StatsFormat {
    Text,
    Json,
}

/// Input that does not parse or validate.
#[derive(Debug)]
struct BadInput(String);

impl std::fmt::Display for BadInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BadInput {}

fn load(path: &Path) -> Result<Network> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_network(&text).map_err(|e| BadInput(format!("{}: {e}", path.display())).into())
}

fn parse_task(net: &Network, spec: &str) -> Result<Task> {
    let (pol, name) = spec
        .split_once(':')
        .ok_or_else(|| BadInput(format!("task `{spec}` is not polarity:id")))?;
    let c = net
        .constraint_by_name(name)
        .ok_or_else(|| BadInput(format!("unknown constraint {name}")))?;
    match pol {
        "satisfy" => Ok(Task::satisfy(c)),
        "unsatisfy" => Ok(Task::unsatisfy(c)),
        _ => Err(BadInput(format!("unknown polarity {pol}")).into()),
    }
}

fn print_stats(stats: &RunStats, format: StatsFormat) {
    match format {
        StatsFormat::Json => println!("{}", serde_json::to_string(stats).unwrap()),
        StatsFormat::Text => {
            println!("solutions: {}", stats.solutions);
            println!("assignments: {}", stats.assignments);
            println!("backtracks: {}", stats.backtracks);
            println!("constraint checks: {}", stats.constraint_checks);
            println!(
                "constraint history: min {} max {} average {:.2}",
                stats.trail.min, stats.trail.max, stats.trail.average
            );
        }
    }
}

fn solve(args: SolveArgs) -> Result<ExitCode> {
    let net = load(&args.file)?;
    let mut tasks = vec![parse_task(&net, &args.task)?];
    for t in &args.then {
        tasks.push(parse_task(&net, t)?);
    }
    let mode = if args.first { SolveMode::FirstSol } else { SolveMode::AllSols };
    let mut engine = Engine::new(net.clone()).with_options(SearchOptions { pruning: !args.no_pruning });
    let out = engine.solve(&tasks, mode);
    let lines: Vec<String> = out.solutions.iter().map(|s| s.to_line(&net)).collect();
    match &args.solutions {
        Some(path) => {
            let mut text = lines.join("\n");
            if !text.is_empty() {
                text.push('\n');
            }
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        None if args.stats != Some(StatsFormat::Json) => {
            for l in &lines {
                println!("{l}");
            }
        }
        None => {}
    }
    match args.stats {
        Some(f) => print_stats(&out.stats, f),
        None => println!("{} solutions", out.solutions.len()),
    }
    if args.first && out.solutions.is_empty() {
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn baseline(solver: Solver, file: &Path, stats: Option<StatsFormat>) -> Result<()> {
    let net = load(file)?;
    let csp = static_project(&net).map_err(|e| BadInput(e.to_string()))?;
    let json = stats == Some(StatsFormat::Json);
    match solver {
        Solver::Bt => {
            let out = backtrack_solve(&csp, SolveMode::AllSols);
            if json {
                println!("{}", serde_json::to_string(&out.stats)?);
            } else {
                for s in &out.solutions {
                    let line: Vec<String> = s
                        .iter()
                        .zip(&csp.variables)
                        .map(|(&x, v)| format!("{}={}", v.name, v.domain[x]))
                        .collect();
                    println!("{}", line.join(" "));
                }
                let st = &out.stats;
                println!(
                    "solutions: {} assignments: {} backtracks: {} constraint checks: {}",
                    st.solutions, st.assignments, st.backtracks, st.constraint_checks
                );
            }
        }
        Solver::Ac3 => {
            let out = ac3_solve(&csp).map_err(|e| BadInput(e.to_string()))?;
            if json {
                println!("{}", serde_json::to_string(&out)?);
            } else {
                println!("consistent: {}", out.consistent);
                for (v, d) in csp.variables.iter().zip(&out.domains) {
                    let vals: Vec<&str> = d.iter().map(|&x| v.domain[x].as_str()).collect();
                    println!("{} {{ {} }}", v.name, vals.join(" ").trim());
                }
                println!("revise calls: {} assignments: {}", out.revise_calls, out.assignments);
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve(args) => solve(args),
        Command::Validate { file } => {
            let net = load(&file)?;
            println!(
                "{}: {} variables, {} constraints, {} activators",
                net.name,
                net.variables.len(),
                net.constraints.len(),
                net.activators.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Baseline { solver, file, stats } => baseline(solver, &file, stats).map(|_| ExitCode::SUCCESS),
        Command::Fixtures {
            command: FixtureCommand::Emit { name, path },
        } => {
            let doc = fixtures::fixture_by_name(&name).ok_or_else(|| BadInput(format!("no fixture named {name}")))?;
            std::fs::write(&path, serialize(&doc)).with_context(|| format!("writing {}", path.display()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve { port, idle } => {
            tracing_subscriber::fmt()
                .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
                .init();
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(dmc_service::serve(port, Duration::from_secs(idle)))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<BadInput>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
