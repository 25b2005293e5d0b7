//! The config-driven pipeline behind the CLI: parse a flat key = value
//! config, run the experiment it describes, and inspect the artifacts.
//! Identical config and seed give byte-identical tables, and every table
//! carries the config hash in its header.

use cocycle_forge::{config, experiment};

const CONFIG: &str = "\
experiment.kind = sweep
base.alpha = golden
cocycle.psi.kind = constant_rotation
cocycle.beta = 1.0
cocycle.rho.kind = fourier
cocycle.rho.fourier = 1:1,0; 2:-0.4,0.3
grid.size = 128
lambda.schedule = 0.9, 0.99, 0.999
solver.eps = 1e-9
seed = 7
";

fn main() -> cocycle_forge::Result<()> {
    let cfg = config::parse(CONFIG)?;
    println!("config hash {}", experiment::config_hash(&cfg));

    let dir = std::env::temp_dir().join(format!("cocycle-forge-demo-{}", std::process::id()));
    let outcome = experiment::run(&cfg, &dir)?;
    println!(
        "experiment `{}` wrote {} files in {} ms:",
        outcome.manifest.experiment,
        outcome.manifest.outputs.len(),
        outcome.manifest.wall_ms
    );
    for name in &outcome.manifest.outputs {
        println!("  {}", outcome.out_dir.join(name).display());
    }

    let table = std::fs::read_to_string(outcome.out_dir.join("sweep.csv"))?;
    println!("\nsweep.csv:");
    for line in table.lines().take(6) {
        println!("  {line}");
    }

    // rerun into a second directory and compare bytes
    let dir2 = dir.join("again");
    let outcome2 = experiment::run(&cfg, &dir2)?;
    let a = std::fs::read(outcome.out_dir.join("sweep.csv"))?;
    let b = std::fs::read(outcome2.out_dir.join("sweep.csv"))?;
    println!("\nrerun is byte-identical: {}", a == b);

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
