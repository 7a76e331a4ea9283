use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use sinebody::cli::{exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let result = run(cli, &mut stdout.lock(), &mut stderr.lock());
    if let Err(e) = &result {
        let _ = writeln!(stderr.lock(), "error: {e}");
    }
    ExitCode::from(exit_code(&result) as u8)
}
