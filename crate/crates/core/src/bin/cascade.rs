use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = cascade::cli::Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match cascade::cli::run(cli, &mut stdout) {
        Ok(outcome) if outcome.all_pass => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
