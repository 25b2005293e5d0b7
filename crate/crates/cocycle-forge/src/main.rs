use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cocycle_forge::error::Error;
use cocycle_forge::{config, experiment};

#[derive(Parser)]
#[command(
    name = "cocycle-forge",
    version,
    about = "Hyperbolized cohomological equations for cocycles by isometries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for grid parallelism; overrides COCYCLE_FORGE_THREADS
    /// and the config `threads` key.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for run artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// List the registry entries configs can reference.
    List {
        /// Custom registry file; its `cocycle.*` entries are appended.
        #[arg(long)]
        registry: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::List { registry } => {
            let custom = match &registry {
                Some(path) => Some(std::fs::read_to_string(path)?),
                None => None,
            };
            for row in experiment::registry_listing(custom.as_deref())? {
                println!("{row}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config: path } => {
            let cfg = config::load(&path)?;
            if let Some(n) = resolve_threads(cli.threads, cfg.threads)? {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            }
            let outcome = experiment::run(&cfg, &cli.out)?;
            eprintln!(
                "{}: wrote {} files to {} in {} ms",
                outcome.manifest.experiment,
                outcome.manifest.outputs.len(),
                outcome.out_dir.display(),
                outcome.manifest.wall_ms
            );
            match outcome.anomaly {
                Some(msg) => {
                    eprintln!("anomaly: {msg}");
                    Ok(ExitCode::from(3))
                }
                None => Ok(ExitCode::SUCCESS),
            }
        }
    }
}

/// CLI flag beats the environment, which beats the config key.
fn resolve_threads(flag: Option<usize>, from_config: Option<usize>) -> Result<Option<usize>, Error> {
    if let Some(n) = flag {
        if n == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        return Ok(Some(n));
    }
    if let Ok(raw) = std::env::var("COCYCLE_FORGE_THREADS") {
        let n: usize = raw
            .parse()
            .map_err(|_| Error::Config(format!("COCYCLE_FORGE_THREADS = `{raw}` is not a positive integer")))?;
        if n == 0 {
            return Err(Error::Config("COCYCLE_FORGE_THREADS must be positive".into()));
        }
        return Ok(Some(n));
    }
    Ok(from_config)
}
