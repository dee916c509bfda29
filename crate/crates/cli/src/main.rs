use std::process::ExitCode;

use clap::Parser;
use snlw_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(done) => {
            print!("{}", done.summary);
            eprintln!("run directory: {}", done.dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("snlw: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
