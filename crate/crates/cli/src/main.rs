use clap::Parser;
use varmatch_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            println!("{}", out.json);
            if let Some(err) = out.failure {
                eprintln!("error[{}]: {err}", err.kind_name());
                std::process::exit(err.exit_code());
            }
        }
        Err(err) => {
            eprintln!("error[{}]: {err}", err.kind_name());
            std::process::exit(err.exit_code());
        }
    }
}
