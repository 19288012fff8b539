use std::process::ExitCode;

use blindqkd::cli::{execute, parse_args};

fn main() -> ExitCode {
    let invocation = match parse_args(std::env::args_os()) {
        Ok(inv) => inv,
        Err(e) => e.exit(),
    };
    let mut stdout = std::io::stdout().lock();
    match execute(&invocation, &mut stdout) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
