use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sl2tree_cli::{run, run_batch, to_json, CliError, Command, JobRequest};

/// Decide whether two SL₂ elements over a non-archimedean local field
/// generate a discrete free group of rank two.
#[derive(Parser, Debug)]
#[command(name = "sl2tree", version)]
struct Args {
    #[command(subcommand)]
    command: Cmd,

    /// Field descriptor: qp:<p> or fqt:<p>.
    #[arg(long, global = true, default_value = "qp:7")]
    field: String,

    /// Run on truncated digit expansions starting at this precision.
    #[arg(long, global = true, allow_negative_numbers = true)]
    precision: Option<i64>,

    #[arg(long = "A", global = true)]
    a: Option<String>,

    #[arg(long = "B", global = true)]
    b: Option<String>,

    #[arg(long = "C", global = true)]
    c: Option<String>,

    /// Accept membership of −C as membership of C.
    #[arg(long, global = true)]
    psl: bool,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    json_out: Option<PathBuf>,

    /// Amalgam spec (JSON) for amalgam-decide.
    #[arg(long, global = true)]
    amalgam: Option<PathBuf>,

    /// Membership query as letters a, b, A, B.
    #[arg(long, global = true)]
    words: Option<String>,

    #[arg(long, global = true)]
    iteration_cap: Option<u64>,
}

#[derive(Subcommand, Debug, Clone)]
enum Cmd {
    /// Run the decision loop on --A, --B.
    Decide,
    /// Decide whether --C (or --words) lies in ⟨A, B⟩ and recover a word.
    Membership,
    /// Translation length of --A.
    Tl,
    /// Axis configuration of --A, --B.
    Overlap,
    /// Decision loop in an amalgam given by --amalgam, words --A, --B.
    AmalgamDecide,
    /// Run a JSON array of jobs in parallel.
    Batch { jobs: PathBuf },
}

fn execute(args: Args) -> Result<String, CliError> {
    let command = match &args.command {
        Cmd::Decide => Command::Decide,
        Cmd::Membership => Command::Membership,
        Cmd::Tl => Command::Tl,
        Cmd::Overlap => Command::Overlap,
        Cmd::AmalgamDecide => Command::AmalgamDecide,
        Cmd::Batch { jobs } => {
            let text = std::fs::read_to_string(jobs).map_err(|source| CliError::Io {
                path: jobs.clone(),
                source,
            })?;
            let jobs: Vec<JobRequest> =
                serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("batch file: {e}")))?;
            return Ok(to_json(&run_batch(&jobs)));
        }
    };
    let job = JobRequest {
        command: Some(command),
        field: Some(args.field),
        precision: args.precision,
        a: args.a,
        b: args.b,
        c: args.c,
        words: args.words,
        psl: args.psl,
        amalgam: args.amalgam,
        iteration_cap: args.iteration_cap,
    };
    Ok(to_json(&run(&job)?))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let out = args.json_out.clone();
    let result = execute(args).and_then(|json| match out {
        Some(path) => std::fs::write(&path, json).map_err(|source| CliError::Io { path, source }),
        None => {
            print!("{json}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
