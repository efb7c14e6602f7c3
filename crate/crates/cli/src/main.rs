use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod fixtures;
mod io;
mod report;

use commands::{Constraint, Global};
use io::InputError;
use report::RunReport;

/// Quantum superchannels: checks, extensions, characterisation, extremality.
///
/// Exit codes: 0 pass, 1 fail, 2 undetermined, 3 input error.
#[derive(Parser)]
#[command(name = "superchannel", version)]
struct Cli {
    /// Replace the default numerical tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Iteration cap for the feasibility search.
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Seed for randomised starting points and demo instances.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print machine-readable reports (one JSON object per line).
    #[arg(long, global = true)]
    json: bool,
    /// Output file (witness, characterisation, report, basis) or directory for `fixtures`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// CP, TP, operator-system membership and Kraus rank of a channel.
    CheckChannel { path: String },
    /// Superchannel conditions, auxiliary dimension and the induced unital map.
    CheckSuper { path: String },
    /// Completely positive extension of a QSC action.
    Extend {
        path: String,
        /// Also require the extension to be trace preserving.
        #[arg(long)]
        tp: bool,
        /// Superchannel file used as a starting point (repeatable).
        #[arg(long = "start")]
        starts: Vec<String>,
    },
    /// Trace-preserving completely positive extension of a QSC action.
    TpExtend {
        path: String,
        #[arg(long = "start")]
        starts: Vec<String>,
    },
    /// Pre/post-processing form of a superchannel.
    Characterize { path: String },
    /// Extremality of a channel in a constraint class, or of a superchannel
    /// among the extensions of its restriction.
    Extreme {
        path: String,
        /// Constraint class for a channel input (default: tp).
        #[arg(long, value_enum)]
        constraint: Option<Constraint>,
    },
    /// Split a unitary on C^d ⊗ C^r as U1 ⊗ U2.
    FactorUnitary {
        path: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        r: usize,
    },
    /// Canonical orthonormal basis of the operator system S(d, r).
    Basis {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        r: usize,
    },
    /// Run the twelve worked-example checks.
    DemoPaper {
        /// Run the checks one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// Regenerate the fixture files (into --out, default `fixtures`).
    Fixtures,
}

/// Writes a line to stdout; a closed pipe is not an error.
fn say(line: impl std::fmt::Display) {
    let _ = writeln!(std::io::stdout(), "{line}");
}

fn emit(report: &RunReport, json: bool) {
    if json {
        say(serde_json::to_string(report).expect("serialisable"));
    } else {
        say(report);
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let g = Global { tol: cli.tol, max_iter: cli.max_iter, seed: cli.seed, out: cli.out.clone() };
    if let Some(t) = cli.tol {
        if !(t.is_finite() && t >= 0.0) {
            return Err(io::input_error(format!("--tol must be a non-negative number, got {t}")));
        }
    }
    let report = match &cli.command {
        Command::CheckChannel { path } => commands::check_channel(path, &g)?,
        Command::CheckSuper { path } => commands::check_super(path, &g)?,
        Command::Extend { path, tp, starts } => commands::extend(path, *tp, starts, &g)?,
        Command::TpExtend { path, starts } => commands::extend(path, true, starts, &g)?,
        Command::Characterize { path } => commands::characterize(path, &g)?,
        Command::Extreme { path, constraint } => commands::extreme(path, *constraint, &g)?,
        Command::FactorUnitary { path, d, r } => commands::factor(path, *d, *r, &g)?,
        Command::Basis { d, r } => {
            let (report, doc) = commands::basis(*d, *r, &g)?;
            match doc {
                Some(doc) => say(serde_json::to_string_pretty(&doc)?),
                None => emit(&report, cli.json),
            }
            return Ok(report.status.exit_code());
        }
        Command::DemoPaper { sequential } => {
            let json = cli.json;
            let summary = commands::demo_reports(&g, *sequential, |item| {
                if json {
                    emit(item, true);
                } else {
                    let c = &item.results[0].value;
                    let detail = item.results[1].value.as_str().unwrap_or_default();
                    let mark = if item.status == report::Status::Pass { "PASS" } else { "FAIL" };
                    say(format!("[{mark}] {:>2}. {}: {detail}", c["id"], c["name"].as_str().unwrap_or_default()));
                }
            });
            if json {
                emit(&summary, true);
            } else {
                let passed = summary.results.iter().filter(|f| f.value == serde_json::Value::Bool(true)).count();
                say(format!("{passed}/12 checks passed"));
            }
            return Ok(summary.status.exit_code());
        }
        Command::Fixtures => {
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("fixtures"));
            let mut report = RunReport::new("fixtures", &[]);
            let files = fixtures::generate();
            for (name, text) in &files {
                let path = dir.join(name);
                std::fs::create_dir_all(path.parent().expect("nested path"))?;
                std::fs::write(&path, text)?;
            }
            report.info("directory", dir.display().to_string());
            report.info("files", files.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>());
            emit(&report, cli.json);
            return Ok(0);
        }
    };
    emit(&report, cli.json);
    Ok(report.status.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // exit code 2 is reserved for undetermined results
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) if e.is::<InputError>() => {
            eprintln!("input error: {e}");
            3
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    ExitCode::from(code as u8)
}
