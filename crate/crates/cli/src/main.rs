use clap::Parser;
use morphoseg_cli::{execute, Cli};

fn main() {
    // clap reports usage errors itself, with exit code 2
    let cli = Cli::parse();
    if let Err(e) = execute(&cli) {
        eprintln!("morphoseg: {e}");
        std::process::exit(e.exit_code());
    }
}
