use clap::Parser;
use djm_cli::{config::DIGITS_ENV, run, Cli};

fn main() {
    let cli = Cli::parse();
    let env_digits = std::env::var(DIGITS_ENV).ok();
    if let Err(e) = run(&cli, env_digits.as_deref()) {
        eprintln!("djm: {e}");
        std::process::exit(e.exit_code());
    }
}
