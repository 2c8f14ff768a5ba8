use std::process::ExitCode;

use clap::Parser;
use nulab_cli::config::Cli;
use nulab_cli::{execute_and_write, EXIT_SCHEMA};

fn schema_failure(errors: &[String]) -> ExitCode {
    for e in errors {
        eprintln!("error: {e}");
    }
    ExitCode::from(EXIT_SCHEMA as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (config, dir) = match cli.into_config() {
        Ok(v) => v,
        Err(errors) => return schema_failure(&errors),
    };
    let run = match config.validate() {
        Ok(run) => run,
        Err(errors) => return schema_failure(&errors),
    };
    match execute_and_write(&run, &dir) {
        Ok(code) => {
            if code != 0 {
                eprintln!("error: computation failed; see {}", dir.join("report.json").display());
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: cannot write outputs to {}: {e}", dir.display());
            ExitCode::from(1)
        }
    }
}
