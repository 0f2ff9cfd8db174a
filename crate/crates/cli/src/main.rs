mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Format, Output};
use commands::{Failure, Outcome, USAGE};

fn emit(out: &Output, outcome: &Outcome) -> Result<(), Failure> {
    let body = match out.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&outcome.json).expect("json value serializes");
            s.push('\n');
            s
        }
        Format::Text => outcome.text.clone(),
    };
    let io = |e: std::io::Error| Failure { code: USAGE, message: e.to_string() };
    match out.out.as_deref() {
        Some(path) if path.as_os_str() != "stdout" => std::fs::write(path, body).map_err(io),
        _ => std::io::stdout().lock().write_all(body.as_bytes()).map_err(io),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, output) = match &cli.command {
        Command::Compute(a) => (commands::compute(a), &a.job.output),
        Command::Verify(a) => (commands::verify(a), &a.run.job.output),
        Command::Dynkin(a) => (commands::dynkin(a), &a.output),
        Command::Split(a) => (commands::split(a), &a.job.output),
        Command::Oracle(a) => (commands::oracle(a), &a.job.output),
        Command::Table1(a) => (commands::table1(a), &a.job.output),
        Command::Boson(a) => (commands::boson(a), &a.job.output),
    };
    let code = match result.and_then(|o| emit(output, &o).map(|_| o.code)) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    };
    ExitCode::from(code as u8)
}
