use clap::Parser;

use fracmem_cli::app::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    std::process::exit(execute(&cli, std::env::vars()));
}
