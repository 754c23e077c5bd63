use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = aerprov_cli::Cli::parse();
    match aerprov_cli::run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let aerprov_cli::CliError::Infeasible { report } = &e {
                print!("{report}");
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
