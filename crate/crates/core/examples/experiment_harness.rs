//! The config-driven pipeline used by the `bosonhl` binary.
//!
//! cargo run --release --example experiment_harness [config.toml]

use std::path::PathBuf;

use bosonhl::harness::{cmd_learn, cmd_simulate, plot_run, ExperimentConfig};

fn main() -> bosonhl::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/smoke.toml"));
    let cfg = ExperimentConfig::load(&path)?;
    let out = std::env::temp_dir().join(format!("bosonhl-{}", cfg.name));

    let sim = cmd_simulate(&cfg, &out.join("simulate"))?;
    println!("simulate: ⟨N⟩ {:?} -> {:?}", sim.input_mean_photons, sim.mean_photons);
    for r in cmd_learn(&cfg, &out.join("learn"))? {
        println!("learn seed {}: error {:.3e}", r.seed, r.max_error);
    }
    for fig in plot_run(&out.join("learn"))? {
        println!("wrote {}", fig.display());
    }
    Ok(())
}
