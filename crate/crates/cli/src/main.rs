use std::process::ExitCode;

use clap::Parser;

mod args;
mod chat;
mod commands;

use args::{Cli, Command};

fn main() -> ExitCode {
    // usage errors are configuration errors (exit 1); 2 is reserved for scripts
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let opts = &cli.global;
    let result = match &cli.command {
        Command::Ingest { dir } => commands::ingest(opts, dir),
        Command::Query { text, k } => commands::query(opts, text, *k),
        Command::Inspect { wav } => commands::inspect(opts, wav),
        Command::Validate { script, canonical } => commands::validate(opts, script, *canonical),
        Command::Render {
            script,
            out,
            length,
        } => commands::render_script(opts, script, out, *length),
        Command::Chat { mock, out_dir, k } => chat::chat(opts, mock.as_deref(), out_dir, *k),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code)
        }
    }
}
