mod args;
mod commands;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use commands::{run, CliError};

fn invocation() -> String {
    let mut args = std::env::args();
    let program = args
        .next()
        .as_deref()
        .and_then(|p| Path::new(p).file_name().map(|f| f.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "steerlab".into());
    std::iter::once(program).chain(args).collect::<Vec<_>>().join(" ")
}

fn report(err: &CliError, as_json: bool) {
    if as_json {
        let v = serde_json::json!({
            "error": err.kind,
            "message": err.message,
            "exit_code": err.code,
        });
        eprintln!("{v}");
    } else {
        eprintln!("error: {}", err.message);
    }
}

fn main() -> ExitCode {
    let json_errors = std::env::args().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            if json_errors {
                report(&CliError::input(e.to_string().trim_end()), true);
            } else {
                let _ = e.print();
            }
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            report(&CliError::input("--threads must be at least 1"), cli.json_errors);
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            report(&CliError::input(e.to_string()), cli.json_errors);
            return ExitCode::from(2);
        }
    }
    match run(cli.command, &invocation()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e, cli.json_errors);
            ExitCode::from(e.code as u8)
        }
    }
}
