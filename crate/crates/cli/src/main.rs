//! Command-line front end: parse a process file, then encode it, run one
//! reduction pipeline on it, or explore its execution space.
//!
//! Exit codes: 0 on success, 1 on input or parse errors, 2 on a validation
//! fault in an encoded graph, 3 when `--strict` is set and a run was cut
//! short by a limit.

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pispace::{
    encode, explore, export_dot, export_json, parse_process, simplify_view, step_traced_seeded,
    DotDetail, ExploreLimits, ProcessTerm, RecursiveSystem, StepError, StepKind, Strategies,
};

#[derive(Parser)]
#[command(
    name = "pispace",
    version,
    about = "Execution spaces for pi-calculus processes via graph rewriting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode the process and write its full and simplified graphs as DOT.
    Encode(Job),
    /// Run the first enabled communication or unfolding pipeline once and
    /// print the resulting state.
    Reduce(Job),
    /// Explore the execution space and write it as DOT and/or JSON.
    Explore(Job),
}

#[derive(Args)]
struct Job {
    /// Input process file (.pi).
    input: PathBuf,

    /// Stop exploring after this many states.
    #[arg(long, default_value_t = 10_000)]
    max_states: usize,

    /// Stop exploring beyond this breadth-first depth.
    #[arg(long, default_value_t = 1_000)]
    max_depth: usize,

    /// Total rewrite steps allowed for settling transitions.
    #[arg(long, default_value_t = 1_000_000)]
    step_budget: usize,

    /// Worker threads settling one exploration level (the result does not
    /// depend on this).
    #[arg(long, default_value_t = 1)]
    jobs: usize,

    /// Directory for output files (default: current directory).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output formats written by explore.
    #[arg(long, value_delimiter = ',', default_values_t = [Format::Dot, Format::Json])]
    format: Vec<Format>,

    /// Draw each explored state as its simplified graph in the DOT export.
    #[arg(long)]
    simplified: bool,

    /// Print every rewrite rule before running the command.
    #[arg(long)]
    dump_rules: bool,

    /// Print the pipeline chain of the performed step (reduce).
    #[arg(long)]
    dump_intermediates: bool,

    /// Exit with status 3 when a limit cut the run short.
    #[arg(long)]
    strict: bool,

    /// Randomize the settling match order from this seed (the settled
    /// states stay isomorphic either way).
    #[arg(long)]
    seed: Option<u64>,

    /// Print progress notes on standard error.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Dot,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Dot => "dot",
            Format::Json => "json",
        })
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()))
}

fn run(cli: Cli) -> u8 {
    let (job, mode) = match cli.command {
        Command::Encode(job) => (job, Mode::Encode),
        Command::Reduce(job) => (job, Mode::Reduce),
        Command::Explore(job) => (job, Mode::Explore),
    };

    let src = match fs::read_to_string(&job.input) {
        Ok(src) => src,
        Err(err) => {
            eprintln!("{}: {err}", job.input.display());
            return 1;
        }
    };
    let (process, sys) = match parse_process(&src) {
        Ok(parsed) => parsed,
        Err(err) => {
            eprintln!("{}:{err}", job.input.display());
            return 1;
        }
    };

    let strategies = Strategies::for_system(&sys);
    if job.dump_rules {
        print!("{}", strategies.com.dump());
        println!();
        print!("{}", strategies.merge.dump());
        println!();
        print!("{}", strategies.gc.dump());
        for set in &strategies.unfolds {
            println!();
            print!("{}", set.dump());
        }
    }

    match mode {
        Mode::Encode => run_encode(&job, &process, &sys),
        Mode::Reduce => run_reduce(&job, &process, &sys, &strategies),
        Mode::Explore => run_explore(&job, &process, &sys),
    }
}

enum Mode {
    Encode,
    Reduce,
    Explore,
}

fn stem(job: &Job) -> String {
    job.input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into())
}

fn write_output(job: &Job, file_name: &str, text: &str) -> Result<PathBuf, u8> {
    let dir = job.out.clone().unwrap_or_else(|| PathBuf::from("."));
    if let Err(err) = fs::create_dir_all(&dir) {
        eprintln!("{}: {err}", dir.display());
        return Err(1);
    }
    let path = dir.join(file_name);
    if let Err(err) = fs::write(&path, text) {
        eprintln!("{}: {err}", path.display());
        return Err(1);
    }
    Ok(path)
}

fn run_encode(job: &Job, process: &ProcessTerm, sys: &RecursiveSystem) -> u8 {
    let encoded = encode(process, sys);
    if let Err(fault) = encoded.validate() {
        eprintln!("{}: encoding failed validation: {fault}", job.input.display());
        return 2;
    }
    if job.verbose > 0 {
        eprintln!(
            "encoded {} vertices, {} edges",
            encoded.graph.vertex_count(),
            encoded.graph.edge_count()
        );
    }
    let name = stem(job);
    let full = encoded.graph.to_dot(&name);
    let view = simplify_view(&encoded).to_dot(&format!("{name}-simplified"));
    let full_path = match write_output(job, &format!("{name}.encoded.dot"), &full) {
        Ok(path) => path,
        Err(code) => return code,
    };
    let view_path = match write_output(job, &format!("{name}.simplified.dot"), &view) {
        Ok(path) => path,
        Err(code) => return code,
    };
    println!("wrote {} and {}", full_path.display(), view_path.display());
    0
}

fn run_reduce(
    job: &Job,
    process: &ProcessTerm,
    sys: &RecursiveSystem,
    strategies: &Strategies,
) -> u8 {
    let encoded = encode(process, sys);
    let traces = match step_traced_seeded(&encoded, sys, strategies, job.step_budget, job.seed) {
        Ok(traces) => traces,
        Err(StepError::Budget { budget }) => {
            eprintln!("step budget of {budget} exhausted before the state settled");
            return if job.strict { 3 } else { 0 };
        }
        Err(err @ StepError::Validation { .. }) => {
            eprintln!("{err}");
            return 2;
        }
    };
    let Some(trace) = traces.into_iter().next() else {
        println!("no step applies");
        return 0;
    };
    if job.verbose > 0 {
        eprintln!("stepped via {} in {} settling steps", trace.rule, trace.steps);
    }
    if job.dump_intermediates {
        println!("== source ==");
        print!("{}", trace.chain.source.dump());
        println!("== stepped ==");
        print!("{}", trace.chain.stepped.dump());
        println!("== merged ==");
        print!("{}", trace.chain.merged.dump());
        println!("== result ==");
        print!("{}", trace.result.graph.dump());
    }
    let kind = match &trace.kind {
        StepKind::Com => "com".to_string(),
        StepKind::Unfold(ident) => format!("unfold({ident})"),
    };
    println!("{kind} -> {}", trace.term);
    0
}

fn run_explore(job: &Job, process: &ProcessTerm, sys: &RecursiveSystem) -> u8 {
    let limits = ExploreLimits {
        max_states: job.max_states,
        max_depth: job.max_depth,
        step_budget: job.step_budget,
        jobs: job.jobs,
        seed: job.seed,
    };
    let space = explore(process, sys, &limits);
    let name = stem(job);
    let detail = if job.simplified {
        DotDetail::SimplifiedGraphs
    } else {
        DotDetail::Decoded
    };
    let mut written = Vec::new();
    for format in dedup(&job.format) {
        let (file_name, text) = match format {
            Format::Dot => (format!("{name}.space.dot"), export_dot(&space, detail)),
            Format::Json => (format!("{name}.space.json"), export_json(&space)),
        };
        match write_output(job, &file_name, &text) {
            Ok(path) => written.push(path.display().to_string()),
            Err(code) => return code,
        }
    }
    let mut summary = format!("{} states, {} edges", space.states.len(), space.edges.len());
    if let Some(limit) = space.truncated {
        summary.push_str(&format!(", truncated by the {limit}"));
    }
    if !written.is_empty() {
        summary.push_str(&format!("; wrote {}", written.join(" and ")));
    }
    println!("{summary}");
    if space.truncated.is_some() && job.strict {
        return 3;
    }
    0
}

fn dedup(formats: &[Format]) -> Vec<Format> {
    let mut seen = Vec::new();
    for f in formats {
        if !seen.contains(f) {
            seen.push(*f);
        }
    }
    seen
}
