mod commands;
mod config;
mod emit;

use std::process::ExitCode;

fn main() -> ExitCode {
    let matches = match config::cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = config::from_matches(&matches)
        .map_err(commands::CliError::from)
        .and_then(|cfg| commands::run(&cfg));
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("eoq: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
