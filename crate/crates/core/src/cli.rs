//! `spacheck` command-line driver.
//!
//! Exit codes: 0 all checks pass, 1 some check fails, 2 parse / validation /
//! evaluation / limit error, 3 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::explorer::{explore, ExploreError, ExploreLimits, StateGraph};
use crate::parser::parse_spec;
use crate::report::{emit_dot, emit_json, emit_text, render_trace, run_checks, Report};
use crate::semantics::{bind_constants, parse_assignment, validate_model, Machine};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "spacheck",
    version,
    about = "Model checker for single-page application workflow specs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Explore the state space and run deadlock and property checks.
    Check(CheckArgs),
    /// Explore the state space and export it as a Graphviz file.
    Graph(GraphArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Path to the `.spa` specification.
    file: PathBuf,
    /// Constant binding, repeatable: name=value.
    #[arg(long = "const", value_name = "NAME=VALUE")]
    constants: Vec<String>,
    #[arg(long, default_value = "1000000")]
    max_states: NonZeroUsize,
    #[arg(long)]
    max_depth: Option<NonZeroUsize>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Skip the deadlock check.
    #[arg(long)]
    no_deadlock: bool,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Also write the state graph as DOT.
    #[arg(long, value_name = "PATH")]
    dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GraphArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_name = "PATH")]
    dot: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputMode {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec_path: PathBuf,
    /// Raw `name=value` assignments in command-line order.
    pub constants: Vec<String>,
    pub deadlock: bool,
    pub output: OutputMode,
    pub dot: Option<PathBuf>,
    pub limits: ExploreLimits,
}

#[derive(Debug)]
pub enum RunError {
    /// Exit code 3.
    Usage(String),
    /// Exit code 2; carries rendered diagnostics.
    Spec(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => EXIT_USAGE,
            RunError::Spec(_) => EXIT_ERROR,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            RunError::Usage(m) | RunError::Spec(m) => m,
        }
    }
}

/// Reads, parses, validates and binds a spec file.
pub fn load_machine(path: &Path, constants: &[String]) -> Result<Machine, RunError> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| RunError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let shown = path.display();
    let spec = parse_spec(&source).map_err(|e| RunError::Spec(format!("{shown}:{e}")))?;
    if let Err(errors) = validate_model(&spec) {
        let lines: Vec<String> = errors.iter().map(|e| format!("{shown}:{e}")).collect();
        return Err(RunError::Spec(lines.join("\n")));
    }
    let assignments = constants
        .iter()
        .map(|c| parse_assignment(c))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| RunError::Usage(e.to_string()))?;
    let bound = bind_constants(spec, &assignments).map_err(|e| RunError::Usage(e.to_string()))?;
    Machine::new(bound).map_err(|errors| {
        let lines: Vec<String> = errors.iter().map(|e| format!("{shown}:{e}")).collect();
        RunError::Spec(lines.join("\n"))
    })
}

fn explore_or_report(machine: &Machine, limits: ExploreLimits) -> Result<StateGraph, RunError> {
    explore(machine, limits).map_err(|err| {
        let mut msg = format!("error: {err}");
        if let ExploreError::Eval {
            trace: Some(trace), ..
        } = &err
        {
            msg.push_str("\nreached by:\n");
            let vars: Vec<String> = machine
                .spec()
                .variables
                .iter()
                .map(|v| v.name.clone())
                .collect();
            render_trace(&mut msg, &vars, trace);
        }
        RunError::Spec(msg.trim_end().to_string())
    })
}

fn write_dot(path: &Path, machine: &Machine, graph: &StateGraph) -> Result<(), RunError> {
    std::fs::write(path, emit_dot(machine.spec(), graph))
        .map_err(|e| RunError::Spec(format!("cannot write {}: {e}", path.display())))
}

/// Runs the full pipeline: parse, validate, bind, explore, check.
pub fn run_check(config: &RunConfig) -> Result<(Report, StateGraph), RunError> {
    let machine = load_machine(&config.spec_path, &config.constants)?;
    let start = Instant::now();
    let graph = explore_or_report(&machine, config.limits)?;
    let results = run_checks(&machine, &graph, config.deadlock);
    let elapsed_ms = start.elapsed().as_secs_f64() * 1000.0;
    if let Some(path) = &config.dot {
        write_dot(path, &machine, &graph)?;
    }
    Ok((Report::new(&machine, &graph, results, elapsed_ms), graph))
}

fn limits(model: &ModelArgs) -> ExploreLimits {
    ExploreLimits {
        max_states: model.max_states.get(),
        max_depth: model.max_depth.map(NonZeroUsize::get),
    }
}

/// Entry point shared by the binary and the tests; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Check(args) => {
            let config = RunConfig {
                spec_path: args.model.file.clone(),
                constants: args.model.constants.clone(),
                deadlock: !args.no_deadlock,
                output: if args.json {
                    OutputMode::Json
                } else {
                    OutputMode::Text
                },
                dot: args.dot.clone(),
                limits: limits(&args.model),
            };
            run_check(&config).map(|(report, _)| {
                let text = match config.output {
                    OutputMode::Json => emit_json(&report),
                    OutputMode::Text => emit_text(&report),
                };
                let _ = stdout.write_all(text.as_bytes());
                report.exit_code()
            })
        }
        Command::Graph(args) => {
            load_machine(&args.model.file, &args.model.constants).and_then(|machine| {
                let graph = explore_or_report(&machine, limits(&args.model))?;
                write_dot(&args.dot, &machine, &graph)?;
                let _ = writeln!(
                    stdout,
                    "wrote {} states, {} transitions to {}",
                    graph.len(),
                    graph.transition_count(),
                    args.dot.display()
                );
                Ok(EXIT_PASS)
            })
        }
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            let _ = writeln!(stderr, "{}", err.message());
            err.exit_code()
        }
    }
}
