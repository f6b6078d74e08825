use std::process::ExitCode;

use indoor_nav::cli::{run_from, CliError};

fn main() -> ExitCode {
    let mut stdout = std::io::stdout().lock();
    match run_from(std::env::args_os(), &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(text)) => {
            eprint!("{text}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
