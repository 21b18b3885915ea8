use std::process::ExitCode;

use clap::Parser;

use dmt::cli::{resolve, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(cli, |k| std::env::var(k).ok())
        .and_then(|cfg| run(&cfg, &mut std::io::stdout().lock(), &mut std::io::stderr().lock()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
