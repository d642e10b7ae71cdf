mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

fn main() -> ExitCode {
    let argv = match args::expand_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => return manifest::report_error("config", &e),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            return manifest::report_error("usage", &anyhow::anyhow!(e.render().to_string().trim().to_string()))
        }
    };
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return manifest::report_error("workers", &e.into());
        }
    }
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => manifest::report_error("runtime", &e),
    }
}
