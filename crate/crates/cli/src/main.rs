use clap::Parser;
use gsbm_cli::{configure_threads, run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("{}", e.to_json());
        std::process::exit(e.code);
    }
    std::process::exit(run(&cli));
}
