//! The `symmc` command line: argument handling, dispatch and reporting.
//!
//! Exit statuses: 0 when a property holds (or exploration finished cleanly),
//! 1 when it fails or `--stop-at-bad` fired, 2 on usage or input errors, 3
//! when a resource limit was hit.

mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use symmc::ctl::{check, full_trace, lift_counter_path, lift_quotient_path, parse_ctl, CheckResult, Trace};
use symmc::explore::{build_model, compare_modes, ExploreOptions, Mode, Model, DEFAULT_STATE_BOUND};
use symmc::frontend::{builtin_example, builtin_source, parse_program, Program, BUILTIN_NAMES};
use symmc::kripke::{DotOptions, Path, TotalizePolicy};
use symmc::{Error, ParseError};

pub use report::{Report, StatsJson, TraceJson, TOOL_VERSION};
use report::{render_counter, render_text, ComparisonJson};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "symmc", version, about = "Explicit-state CTL model checking with symmetry reduction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a CTL property.
    Check {
        #[command(flatten)]
        model: ModelArgs,
        /// CTL formula, e.g. "AG !bad".
        #[arg(long = "prop", short = 'p')]
        property: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Explore the reachable state space and report statistics.
    Reach {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Stop at the first state labeled `bad` (exit status 1).
        #[arg(long)]
        stop_at_bad: bool,
    },
    /// Explore in every applicable mode and compare the counts.
    Compare {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, env = "SYMMC_BOUND", default_value_t = DEFAULT_STATE_BOUND)]
        bound: usize,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        parallel: bool,
    },
    /// Write the explored structure in Graphviz DOT format.
    ExportDot {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "quotient")]
        mode: Mode,
        #[arg(long, env = "SYMMC_BOUND", default_value_t = DEFAULT_STATE_BOUND)]
        bound: usize,
        #[arg(long, default_value = "M")]
        graph_name: String,
        /// Leave atomic propositions out of node labels.
        #[arg(long)]
        no_props: bool,
    },
    /// Print the source of the builtin examples.
    Examples {
        /// One builtin to print; all of them when omitted.
        name: Option<String>,
        #[arg(short, long, default_value_t = 3)]
        n: usize,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct ModelArgs {
    /// Builtin example as `name:n`, e.g. `mutex:4`.
    #[arg(long)]
    builtin: Option<String>,
    /// Path to a model file.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, default_value = "quotient")]
    mode: Mode,
    /// Maximum number of states to explore.
    #[arg(long, env = "SYMMC_BOUND", default_value_t = DEFAULT_STATE_BOUND)]
    bound: usize,
    /// Emit a JSON report instead of text.
    #[arg(long)]
    json: bool,
    /// Expand BFS layers on a thread pool.
    #[arg(long)]
    parallel: bool,
}

/// A failure with its exit status and, for JSON output, the partial report.
struct Failure {
    status: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = if e.is_resource() { EXIT_RESOURCE } else { EXIT_USAGE };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        status: EXIT_USAGE,
        message: message.into(),
    }
}

struct LoadedModel {
    name: String,
    program: Program,
}

fn parse_builtin(spec: &str) -> Result<(String, usize), Failure> {
    let (name, n) = spec
        .split_once(':')
        .ok_or_else(|| usage(format!("builtin `{spec}` must be written as name:n")))?;
    if !BUILTIN_NAMES.contains(&name) {
        return Err(Error::UnknownBuiltin(name.to_string()).into());
    }
    let n: usize = n
        .parse()
        .map_err(|_| usage(format!("process count `{n}` is not a positive integer")))?;
    if n == 0 {
        return Err(Error::InvalidProcessCount.into());
    }
    Ok((name.to_string(), n))
}

fn located(path: &std::path::Path, e: &ParseError) -> Failure {
    usage(format!("{}:{}:{}: {}", path.display(), e.line, e.column, e.kind))
}

fn load(args: &ModelArgs) -> Result<LoadedModel, Failure> {
    match (&args.builtin, &args.model) {
        (Some(spec), _) => {
            let (name, n) = parse_builtin(spec)?;
            Ok(LoadedModel {
                name: format!("{name}:{n}"),
                program: builtin_example(&name, n)?,
            })
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            let program = parse_program(&text).map_err(|e| located(path, &e))?;
            Ok(LoadedModel {
                name: path.display().to_string(),
                program,
            })
        }
        (None, None) => Err(usage("one of --builtin or --model is required")),
    }
}

fn options(bound: usize, parallel: bool, stop_at_bad: bool) -> ExploreOptions {
    ExploreOptions {
        state_bound: bound,
        stop_at_bad,
        parallel,
    }
}

fn lift(program: &Program, model: &Model, path: &Path) -> Result<Trace, Error> {
    match model {
        Model::Full(k) => full_trace(k, path),
        Model::Quotient(q) => lift_quotient_path(program, q, path),
        Model::Counter(c) => lift_counter_path(program, c, path),
    }
}

fn run_check(model_args: &ModelArgs, text: &str, run: &RunArgs, report: &mut Report) -> Result<i32, Failure> {
    report.mode = Some(run.mode);
    report.property = Some(text.to_string());
    let loaded = load(model_args)?;
    report.model = loaded.name;
    let program = loaded.program;
    let formula = parse_ctl(text).map_err(|e| usage(format!("property: {e}")))?;

    let (mut model, stats) = build_model(&program, run.mode, &options(run.bound, run.parallel, false))
        .map_err(|e| explore_failure(e, report))?;
    report.stats = Some((&stats).into());
    let result: CheckResult = match &mut model {
        Model::Full(k) => {
            k.totalize(TotalizePolicy::SelfLoop)?;
            check(k, &formula, k.init())?
        }
        Model::Quotient(q) => {
            q.structure.totalize(TotalizePolicy::SelfLoop)?;
            check(&q.structure, &formula, q.structure.init())?
        }
        Model::Counter(c) => {
            c.totalize(TotalizePolicy::SelfLoop)?;
            check(c, &formula, c.init())?
        }
    };
    report.verdict = Some(result.verdict);
    if let Some(path) = &result.counterexample {
        report.counterexample = Some(TraceJson::new(&program, &lift(&program, &model, path)?));
    }
    if let Some(path) = &result.witness {
        report.witness = Some(TraceJson::new(&program, &lift(&program, &model, path)?));
    }
    Ok(match result.verdict {
        symmc::ctl::Verdict::Holds => EXIT_HOLDS,
        symmc::ctl::Verdict::Fails => EXIT_FAILS,
    })
}

/// Keeps the partial statistics of a bound overrun in the report.
fn explore_failure(e: Error, report: &mut Report) -> Failure {
    if let Error::BoundExceeded { stats, .. } = &e {
        report.stats = Some(stats.as_ref().into());
    }
    e.into()
}

fn run_reach(model_args: &ModelArgs, run: &RunArgs, stop_at_bad: bool, report: &mut Report) -> Result<i32, Failure> {
    report.mode = Some(run.mode);
    let loaded = load(model_args)?;
    report.model = loaded.name;
    let (_, stats) = build_model(&loaded.program, run.mode, &options(run.bound, run.parallel, stop_at_bad))
        .map_err(|e| explore_failure(e, report))?;
    report.stats = Some((&stats).into());
    Ok(if stop_at_bad && stats.bad_reached {
        EXIT_FAILS
    } else {
        EXIT_HOLDS
    })
}

fn run_compare(model_args: &ModelArgs, bound: usize, parallel: bool, report: &mut Report) -> Result<i32, Failure> {
    let loaded = load(model_args)?;
    report.model = loaded.name;
    let comparison = compare_modes(&loaded.program, &options(bound, parallel, false))?;
    report.comparison = Some(ComparisonJson::from(&comparison));
    Ok(EXIT_HOLDS)
}

fn run_export_dot(
    model_args: &ModelArgs,
    mode: Mode,
    bound: usize,
    dot: &DotOptions,
) -> Result<String, Failure> {
    let loaded = load(model_args)?;
    let program = loaded.program;
    let (model, _) = build_model(&program, mode, &options(bound, false, false))?;
    Ok(match &model {
        Model::Full(k) => k.export_dot(dot, |s| program.render_state(s)),
        Model::Quotient(q) => q.structure.export_dot(dot, |s| program.render_state(s)),
        Model::Counter(c) => c.export_dot(dot, |s| render_counter(&program, s)),
    })
}

fn run_examples(name: Option<&str>, n: usize) -> Result<String, Failure> {
    if n == 0 {
        return Err(Error::InvalidProcessCount.into());
    }
    let names: Vec<&str> = match name {
        Some(name) if BUILTIN_NAMES.contains(&name) => vec![name],
        Some(name) => return Err(Error::UnknownBuiltin(name.to_string()).into()),
        None => BUILTIN_NAMES.to_vec(),
    };
    let mut out = String::new();
    for (i, name) in names.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("# {name}:{n}\n"));
        out.push_str(&builtin_source(name, n)?);
        if !out.ends_with('\n') {
            out.push('\n');
        }
    }
    Ok(out)
}

fn emit(report: &Report, json: bool, out: &mut dyn Write) {
    let text = if json {
        let mut s = serde_json::to_string_pretty(report).expect("reports always serialize");
        s.push('\n');
        s
    } else {
        render_text(report)
    };
    let _ = out.write_all(text.as_bytes());
}

/// Runs one invocation. `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(rendered.as_bytes());
                    EXIT_HOLDS
                }
                _ => {
                    let _ = err.write_all(rendered.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };

    let (command, json) = match &cli.command {
        Command::Check { run, .. } | Command::Reach { run, .. } => (command_name(&cli.command), run.json),
        Command::Compare { json, .. } => ("compare", *json),
        Command::ExportDot { .. } | Command::Examples { .. } => (command_name(&cli.command), false),
    };
    let mut report = Report::new(command, String::new());
    if let Some(spec) = model_spec(&cli.command) {
        report.model = spec;
    }

    let outcome: Result<i32, Failure> = match &cli.command {
        Command::Check { model, property, run } => run_check(model, property, run, &mut report),
        Command::Reach { model, run, stop_at_bad } => run_reach(model, run, *stop_at_bad, &mut report),
        Command::Compare {
            model, bound, parallel, ..
        } => run_compare(model, *bound, *parallel, &mut report),
        Command::ExportDot {
            model,
            mode,
            bound,
            graph_name,
            no_props,
        } => {
            let dot = DotOptions {
                graph_name: graph_name.clone(),
                show_props: !no_props,
            };
            return finish_plain(run_export_dot(model, *mode, *bound, &dot), out, err);
        }
        Command::Examples { name, n } => return finish_plain(run_examples(name.as_deref(), *n), out, err),
    };

    match outcome {
        Ok(status) => {
            emit(&report, json, out);
            status
        }
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            if json {
                report.error = Some(failure.message);
                emit(&report, true, out);
            }
            failure.status
        }
    }
}

fn finish_plain(result: Result<String, Failure>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match result {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            EXIT_HOLDS
        }
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            failure.status
        }
    }
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Check { .. } => "check",
        Command::Reach { .. } => "reach",
        Command::Compare { .. } => "compare",
        Command::ExportDot { .. } => "export-dot",
        Command::Examples { .. } => "examples",
    }
}

fn model_spec(command: &Command) -> Option<String> {
    let m = match command {
        Command::Check { model, .. }
        | Command::Reach { model, .. }
        | Command::Compare { model, .. }
        | Command::ExportDot { model, .. } => model,
        Command::Examples { .. } => return None,
    };
    m.builtin
        .clone()
        .or_else(|| m.model.as_ref().map(|p| p.display().to_string()))
}
