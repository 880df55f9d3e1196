mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use output::{Run, UsageError};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let mut run = Run::new(cli.command.name(), argv, cli.data_dir);
    match &cli.command {
        Command::Filter(a) => commands::filter(&mut run, a)?,
        Command::Score(a) => commands::score(&mut run, a)?,
        Command::Aggregate(a) => commands::aggregate_cmd(&mut run, a)?,
        Command::Ingest(a) => commands::ingest(&mut run, a)?,
        Command::Fill(a) => commands::fill(&mut run, a)?,
        Command::Denoise(a) => commands::denoise_cmd(&mut run, a)?,
        Command::Train(a) => commands::train(&mut run, a)?,
        Command::Predict(a) => commands::predict(&mut run, a)?,
        Command::Backtest(a) => commands::backtest_cmd(&mut run, a)?,
        Command::Synth(a) => commands::synth(&mut run, a)?,
    }
    run.finish()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version go to stdout and succeed; everything else
            // clap rejects is a usage error
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<UsageError>()) {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_DATA)
            }
        }
    }
}
