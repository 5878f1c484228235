mod args;
mod commands;
mod record;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::StratumInfo { stratum, format } => commands::stratum_info_cmd(stratum, *format),
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Table(a) => commands::table(a),
        Command::Deviation(a) => commands::deviation(a),
        Command::CheckPeriodic(a) => commands::check_periodic(a),
        Command::Catalog { stratum, component, format } => commands::catalog_cmd(stratum.as_deref(), component, *format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        pool = pool.num_threads(j);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
