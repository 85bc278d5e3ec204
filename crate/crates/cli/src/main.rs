use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use weylchar_cli::{load_config, run, CliError, Task};

/// Characteristic functions on the Heisenberg-Weyl group, batch mode.
#[derive(Debug, Parser)]
#[command(name = "weylchar", version)]
struct Args {
    task: Task,
    /// JSON job config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write plot.py rendering the CSV grids.
    #[arg(long)]
    emit_plotscript: bool,
}

fn execute(args: &Args) -> Result<String, CliError> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let mut outcome = run(args.task, &config, &args.out)?;
    if args.emit_plotscript {
        let script = weylchar_cli::run::write_plotscript(&args.out, &outcome.files)?;
        outcome.files.push(script);
    }
    Ok(outcome.summary())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Config(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match execute(&args) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
