mod args;
mod commands;
mod render;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::ReportArgs;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Ingest { log, state, ledger } => commands::ingest(log, &state.dir, ledger),
        Command::Report {
            state,
            ledger,
            app,
            from,
            to,
            group,
            tz,
            format,
        } => commands::report(
            &state.dir,
            ledger,
            ReportArgs {
                app: app.as_deref(),
                from: from.as_deref(),
                to: to.as_deref(),
                group,
                tz,
                format: *format,
            },
        ),
        Command::Trace {
            id,
            state,
            ledger,
            app,
            format,
        } => commands::trace(&state.dir, ledger, id, app.as_deref(), *format),
        Command::Casestudy { strategy, scale } => commands::casestudy(*strategy, *scale),
        Command::Serve { config } => commands::serve(config),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message().is_empty() {
                eprintln!("error: {}", f.message());
            }
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
