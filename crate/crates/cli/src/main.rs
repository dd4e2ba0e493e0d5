use clap::Parser;
use neklab_cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("NEKLAB_LOG")).init();
    let cli = Cli::parse();
    std::process::exit(run(&cli));
}
