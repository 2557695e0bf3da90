use clap::Parser;

use seqforge::cli::{Cli, Command};
use seqforge::commands;
use seqforge::error::{exit, Result};
use seqforge::sweep;

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(args) => commands::generate(args).map(drop),
        Command::Evaluate(args) => commands::evaluate_file(args).map(drop),
        Command::Baseline(args) => commands::baseline(args).map(drop),
        Command::Sweep(args) => sweep::sweep(args).map(drop),
        Command::WelchBound(args) => {
            println!("{}", commands::welch(args)?);
            Ok(())
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match dispatch(&cli) {
        Ok(()) => exit::SUCCESS,
        Err(e) => {
            eprintln!("seqforge: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
