mod cli;
mod config;
mod error;
mod manifest;
mod run;

use clap::Parser;

use cli::Cli;
use config::FileConfig;
use error::{Failure, Outcome};
use run::Env;

fn main() {
    std::process::exit(match Cli::try_parse() {
        Ok(cli) => match start(cli) {
            Ok(()) => 0,
            Err(f) => {
                eprintln!("error: {:#}", f.error());
                f.exit_code()
            }
        },
        Err(e) => {
            let _ = e.print();
            // usage errors are validation errors; --help and --version are not errors
            if e.use_stderr() {
                1
            } else {
                0
            }
        }
    });
}

fn start(cli: Cli) -> Outcome<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let threads = cli.threads.or(file.threads).unwrap_or(0);
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(Failure::runtime)?;
    let env = Env { file, threads: rayon::current_num_threads(), manifest: cli.manifest };
    run::run(cli.command, &env)
}
