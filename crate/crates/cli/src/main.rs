mod args;
mod commands;
mod report;

use std::fs;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Format};
use circlekit::Error;
use report::Table;

const EXIT_USAGE: u8 = 2;
const EXIT_MISMATCH: u8 = 3;
const EXIT_BUDGET: u8 = 4;
const EXIT_INTEGRITY: u8 = 5;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_) => EXIT_USAGE,
        Error::Budget { .. } | Error::Size(_) => EXIT_BUDGET,
        Error::Mismatch(_) => EXIT_MISMATCH,
        Error::Precision(_) | Error::Accuracy { .. } | Error::NumericalIntegrity(_) => {
            EXIT_INTEGRITY
        }
    }
}

fn budget_from_env() -> Result<u128, String> {
    match std::env::var("CIRCLEKIT_BUDGET") {
        Err(_) => Ok(circlekit::DEFAULT_BUDGET),
        Ok(s) => {
            let s = s.trim().replace('_', "");
            s.parse::<u128>().or_else(|_| {
                let v: f64 = s
                    .parse()
                    .map_err(|_| format!("CIRCLEKIT_BUDGET is not a number: {s:?}"))?;
                if v >= 0.0 && v.is_finite() {
                    Ok(v as u128)
                } else {
                    Err(format!("CIRCLEKIT_BUDGET must be non-negative, got {s:?}"))
                }
            })
        }
    }
}

fn write_output(
    format: Format,
    out: Option<&std::path::Path>,
    json: &str,
    tables: &[Table],
) -> std::io::Result<()> {
    match (format, out) {
        (Format::Json, None) => print!("{json}"),
        (Format::Json, Some(path)) => fs::write(path, json)?,
        (Format::Csv, None) => {
            let joined: Vec<&str> = tables.iter().map(|t| t.csv.as_str()).collect();
            print!("{}", joined.join("\n"));
        }
        (Format::Csv, Some(dir)) => {
            fs::create_dir_all(dir)?;
            for t in tables {
                fs::write(dir.join(format!("{}.csv", t.name)), &t.csv)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let budget = match budget_from_env() {
        Ok(b) => b,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let c = &cli.common;
    let result = match cli.command {
        Command::Delta => commands::delta(c, budget),
        Command::Verify => commands::verify(c, budget),
        Command::Series => commands::series(c, budget),
        Command::Integral { which } => commands::integral(c, which, budget),
        Command::Diagnostics { kind, j, y, slack } => {
            commands::diagnostics(c, kind, j, y, slack, budget)
        }
        Command::Sieve => commands::sieve(c, budget),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    if let Err(e) = write_output(
        c.format,
        c.out.as_deref(),
        &outcome.report.to_json(),
        &outcome.tables,
    ) {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    if let Some(msg) = outcome.mismatch {
        eprintln!("mismatch:\n{msg}");
        return ExitCode::from(EXIT_MISMATCH);
    }
    ExitCode::SUCCESS
}
