use std::io::Read;
use std::process::exit;

use clap::{Args, Parser, Subcommand};

use evpoly::{Error, Result};
use evpoly_cli::doc::{parse_job, JobDocument};
use evpoly_cli::{exit_code, jobs};

/// Batch runner: exact counting jobs in, JSON documents out.
///
/// Each subcommand reads one job document whose "command" field must
/// match it, runs the pipeline, and writes one output document. Outputs
/// are byte-deterministic; rationals are exact "p/q" strings.
#[derive(Parser)]
#[command(name = "evpoly", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dilation lattice-point counts of a rational polytope, fitted.
    Ehrhart(JobArgs),
    /// Color counts of dilations under an additive coloring, fitted.
    Colorcount(JobArgs),
    /// One n-fold sumset, enumerated.
    Sumset(JobArgs),
    /// Growth table for |n_1*A_1 + ... + n_l*A_l|.
    Sep(JobArgs),
    /// Character sum over a growing sumset, as polynomials times roots of unity.
    Charsum(JobArgs),
    /// Generating-function ops: coefficient, substitute, extract, from-numerator.
    Gf(JobArgs),
    /// Orthant-set algebra: union, intersect, complement, contains, gf, from-gf.
    Orthants(JobArgs),
    /// Slice representatives or the excluded upper ideal of a coloring.
    Substantial(JobArgs),
    /// Images of iterated commuting maps, or their growth table.
    Iterimage(JobArgs),
    /// Fit a polynomial, quasipolynomial, growth table or root-of-unity
    /// expansion to supplied samples.
    Fit(JobArgs),
    /// Check a fitted document against supplied samples on a grid.
    Verify(JobArgs),
}

impl Command {
    fn split(&self) -> (&'static str, &JobArgs) {
        match self {
            Command::Ehrhart(a) => ("ehrhart", a),
            Command::Colorcount(a) => ("colorcount", a),
            Command::Sumset(a) => ("sumset", a),
            Command::Sep(a) => ("sep", a),
            Command::Charsum(a) => ("charsum", a),
            Command::Gf(a) => ("gf", a),
            Command::Orthants(a) => ("orthants", a),
            Command::Substantial(a) => ("substantial", a),
            Command::Iterimage(a) => ("iterimage", a),
            Command::Fit(a) => ("fit", a),
            Command::Verify(a) => ("verify", a),
        }
    }
}

#[derive(Args)]
struct JobArgs {
    /// Job document to run; "-" reads standard input.
    #[arg(long)]
    input: String,
    /// Where to write the output document; defaults to the document's
    /// own "output" path, then standard output.
    #[arg(long)]
    output: Option<String>,
    /// Indent the output document. The compact form is canonical.
    #[arg(long)]
    pretty: bool,
    /// Override the box / grid bound from the document's params.
    #[arg(long = "box", value_name = "N")]
    box_limit: Option<u32>,
    /// Override the enumeration budget from the document's params.
    #[arg(long, value_name = "K")]
    cap: Option<u64>,
    /// Seed for generating randomized test corpora; the pipelines
    /// themselves are deterministic and ignore it.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
}

fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Error::Schema(format!("reading standard input: {e}")))?;
        Ok(text)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Error::Schema(format!("reading {path}: {e}")))
    }
}

fn write_output(target: Option<&str>, bytes: &str) -> Result<()> {
    match target {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| Error::Schema(format!("writing {path}: {e}"))),
        None => {
            print!("{bytes}");
            Ok(())
        }
    }
}

fn run(name: &'static str, args: &JobArgs) -> Result<i32> {
    let _ = args.seed;
    let text = read_input(&args.input)?;
    let job: JobDocument = parse_job(&text)?;
    if job.command != name {
        return Err(Error::Schema(format!(
            "document says command {:?} but was run under {name:?}",
            job.command
        )));
    }
    let mut params = job.params.clone();
    if args.box_limit.is_some() {
        params.box_limit = args.box_limit;
    }
    if args.cap.is_some() {
        params.cap = args.cap;
    }
    let outcome = jobs::run(name, job.payload, &params)?;
    let mut rendered = if args.pretty {
        serde_json::to_string_pretty(&outcome.document)
    } else {
        serde_json::to_string(&outcome.document)
    }
    .map_err(|e| Error::Internal(format!("serializing output: {e}")))?;
    rendered.push('\n');
    let target = args.output.as_deref().or(job.output.as_deref());
    write_output(target, &rendered)?;
    match outcome.inconclusive {
        Some(reason) => {
            eprintln!("inconclusive: {reason}");
            Ok(4)
        }
        None => Ok(0),
    }
}

fn main() {
    let cli = Cli::parse();
    let (name, args) = cli.command.split();
    match run(name, args) {
        Ok(code) => exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            exit(exit_code(&err));
        }
    }
}
