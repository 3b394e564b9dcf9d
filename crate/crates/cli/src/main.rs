use clap::Parser;
use lmep_cli::Cli;

fn main() {
    if let Err(e) = lmep_cli::main_with(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
