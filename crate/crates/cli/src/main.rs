use std::io::{self, Write};
use std::process::ExitCode;

use clap::error::ErrorKind;
use mblayout_cli::{bench, parse_flags, run};

fn main() -> ExitCode {
    let cfg = match parse_flags(std::env::args()) {
        Ok(cfg) => cfg,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            let body = msg.split("Usage:").next().unwrap_or_default();
            let line = body.split_whitespace().collect::<Vec<_>>().join(" ");
            eprintln!("mblayout: {}", line.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    let result = if cfg.bench {
        let stdout = io::stdout();
        bench(&cfg, &mut stdout.lock()).map(|_| ())
    } else {
        run(&cfg).map(|summary| {
            print!("{summary}");
            let _ = io::stdout().flush();
        })
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mblayout: {e:#}");
            ExitCode::FAILURE
        }
    }
}
