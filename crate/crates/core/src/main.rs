use std::io::Write;
use std::process::ExitCode;

use ninewalls::cli::{run, Config, EXIT_USAGE};

fn main() -> ExitCode {
    let config = match Config::from_env() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let argv: Vec<String> = std::env::args().collect();
    let result = run(&argv, &config);
    let _ = std::io::stdout().write_all(result.payload.as_bytes());
    let _ = std::io::stderr().write_all(result.diagnostics.as_bytes());
    ExitCode::from(result.code as u8)
}
