use clap::Parser;
use gmtkit::cli::{execute, Cli};

fn main() {
    std::process::exit(execute(&Cli::parse()));
}
