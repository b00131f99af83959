use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    mdihu::cli::main_with(mdihu::cli::Cli::parse())
}
