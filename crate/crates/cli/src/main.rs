mod args;
mod commands;
mod config;
mod error;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use config::Settings;
use error::{CliError, CliResult};

fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("INSTASEL_LOG", "info"))
        .target(env_logger::Target::Stderr)
        .format(|buf, record| {
            writeln!(buf, "{} {} {} {}", record.level(), buf.timestamp_millis(), record.target(), record.args())
        })
        .init();
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let settings = Settings::new(cli.config.as_deref(), cli.seed, cli.jobs)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = settings.jobs {
        if jobs == 0 {
            return Err(CliError::usage("--jobs must be at least 1"));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Features(a) => commands::features::run(a, &settings),
        Command::Splits(a) => commands::splits::run(a, &settings),
        Command::Testbed(a) => commands::testbed::run(a, &settings),
        Command::Run(a) => commands::run::run(a, &settings),
        Command::Select(a) => commands::select::run(a, &settings),
        Command::Report(a) => commands::report::run(a, &settings),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    init_logging();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
