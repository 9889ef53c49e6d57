use std::path::PathBuf;
use std::process::ExitCode;

use bosonhl::harness::{cmd_learn, cmd_simulate, cmd_verify, plot_run, Check, ExperimentConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bosonhl", version, about = "Simulate, learn and verify bosonic lattice Hamiltonians")]
struct Cli {
    /// Worker threads (default: $BOSONHL_THREADS, else all cores).
    #[arg(long, global = true, env = "BOSONHL_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evolve the configured input and dump observables and samples.
    Simulate(Common),
    /// Run the learning protocol end to end.
    Learn(Common),
    /// Run numerical checks; exits nonzero if any fails.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        check: Check,
    },
    /// Render SVG figures for a run directory.
    Plot {
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(c: &Common) -> bosonhl::Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = ExperimentConfig::load(&c.config)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    let out = cfg.output_dir(c.out.as_deref());
    Ok((cfg, out))
}

fn run(cli: Cli) -> bosonhl::Result<bool> {
    match cli.cmd {
        Cmd::Simulate(c) => {
            let (cfg, out) = load(&c)?;
            let r = cmd_simulate(&cfg, &out)?;
            println!("{} samples, leakage {:.2e} -> {}", r.samples, r.leakage, out.display());
        }
        Cmd::Learn(c) => {
            let (cfg, out) = load(&c)?;
            for r in cmd_learn(&cfg, &out)? {
                println!(
                    "seed {}: max error {:.3e} (eps {}), shots/setting {} of budget {:.3e}",
                    r.seed, r.max_error, r.eps, r.shots_per_setting, r.budget_shots
                );
            }
        }
        Cmd::Verify { common, check } => {
            let (cfg, out) = load(&common)?;
            let o = cmd_verify(&cfg, check, &out)?;
            for r in &o.results {
                println!("{:<14} {}", r.name, if r.pass { "pass" } else { "FAIL" });
                for n in &r.notes {
                    println!("    {n}");
                }
            }
            return Ok(o.pass);
        }
        Cmd::Plot { out } => {
            for p in plot_run(&out)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
