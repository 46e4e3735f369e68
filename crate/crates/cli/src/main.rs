mod args;
mod commands;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::CliError;

fn with_output<F>(out: Option<&Path>, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut Box<dyn Write>) -> Result<(), CliError>,
{
    let mut writer: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    // Write everything (including partial sweeps) before reporting a failure.
    let result = f(&mut writer);
    writer.flush()?;
    result
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Stats(a) => with_output(a.output.out.as_deref(), |w| commands::stats(a, w)),
        Command::Table(a) => with_output(a.output.out.as_deref(), |w| commands::table(a, w)),
        Command::Sweep(a) => with_output(a.output.out.as_deref(), |w| commands::sweep(a, w)),
        Command::Dist(a) => with_output(a.output.out.as_deref(), |w| commands::dist(a, w)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ghacs: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
