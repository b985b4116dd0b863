//! Batch interface: check instance files, run their tasks into reports,
//! and emit the curated example instances.
//!
//! Exit codes: 0 pass, 1 verified failure, 2 usage or parse error,
//! 3 inconclusive within bounds.

use clap::{Parser, Subcommand};
use dgkit::examples_gen;
use dgkit::instance;
use dgkit::report;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dgkit", version, about = "exact homological algebra workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an instance file and verify all structural invariants.
    Check { file: PathBuf },
    /// Run the tasks of an instance file and print the report.
    Run {
        file: PathBuf,
        /// Run a single task by name.
        #[arg(long)]
        task: Option<String>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a curated example instance.
    Examples {
        /// One of: recoll-zp2, recoll-fpe, productring-critpb, genk-demo.
        name: String,
        /// Prime parameter where applicable.
        #[arg(long, default_value_t = 2)]
        p: u64,
        /// Window length for the periodic instances.
        #[arg(long, default_value_t = 12)]
        window: usize,
        /// Output path (defaults to <name>.dgi in the working directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Check { file } => {
            let text = match std::fs::read_to_string(&file) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {}", file.display(), e);
                    return ExitCode::from(2);
                }
            };
            let parsed = match instance::parse(&text) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("parse error: {}", e);
                    return ExitCode::from(2);
                }
            };
            let resolved = match instance::resolve(&parsed) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("parse error: {}", e);
                    return ExitCode::from(2);
                }
            };
            let mut all_ok = true;
            for (item, ok, detail) in &resolved.checks {
                println!("{} {}: {}", if *ok { "ok  " } else { "FAIL" }, item, detail);
                all_ok &= ok;
            }
            if all_ok {
                ExitCode::from(0)
            } else {
                ExitCode::from(1)
            }
        }
        Command::Run { file, task, out } => {
            let text = match std::fs::read_to_string(&file) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {}", file.display(), e);
                    return ExitCode::from(2);
                }
            };
            let parsed = match instance::parse(&text) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("parse error: {}", e);
                    return ExitCode::from(2);
                }
            };
            let resolved = match instance::resolve(&parsed) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("parse error: {}", e);
                    return ExitCode::from(2);
                }
            };
            let base = file
                .file_name()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_else(|| "instance".to_string());
            let (rep, status) =
                report::build_report(&base, &text, &parsed, &resolved, task.as_deref());
            let json = report::report_to_json(&rep);
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, json) {
                        eprintln!("error: cannot write {}: {}", path.display(), e);
                        return ExitCode::from(2);
                    }
                }
                None => print!("{}", json),
            }
            ExitCode::from(status.exit_code() as u8)
        }
        Command::Examples {
            name,
            p,
            window,
            out,
        } => {
            let f = match examples_gen::generate(&name, p, window) {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("error: {}", e);
                    return ExitCode::from(2);
                }
            };
            let text = instance::serialize(&f);
            let path = out.unwrap_or_else(|| PathBuf::from(format!("{}.dgi", name)));
            if let Err(e) = std::fs::write(&path, text) {
                eprintln!("error: cannot write {}: {}", path.display(), e);
                return ExitCode::from(2);
            }
            println!("wrote {}", path.display());
            ExitCode::from(0)
        }
    }
}
