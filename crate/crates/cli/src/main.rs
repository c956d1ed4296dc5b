use clap::Parser;
use umwave_cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("UMWAVE_LOG", "info")).init();
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("umwave: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
