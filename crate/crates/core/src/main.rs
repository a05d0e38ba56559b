use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use predpath::cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(n) = std::env::var("PREDPATH_THREADS") {
        match n.parse::<usize>() {
            Ok(n) => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: thread pool: {e}");
                    return ExitCode::FAILURE;
                }
            }
            Err(_) => {
                eprintln!("error: invalid argument: PREDPATH_THREADS must be a number, got `{n}`");
                return ExitCode::FAILURE;
            }
        }
    }
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out).and_then(|_| {
        out.flush().map_err(|e| predpath::Error::Io {
            path: "<stdout>".into(),
            source: e,
        })
    }) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
