//! Config-driven commands behind the `bosonhl` binary.
//!
//! Every command writes into one run directory: its outputs plus a
//! [`RunManifest`].

pub mod config;
pub mod manifest;
pub mod plot;

use std::fs::{self, File};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{build_liouvillian, evolve, EvolveOptions, Variant};
use crate::error::{Error, Result};
use crate::fock::{CMat, FockBasis, C64};
use crate::learner::{end_to_end, LearnReport};
use crate::measurement::{partition_edges, prepare_input_state, run_plan, EvolvedPlan, MeasurementPlan};
use crate::verify::{
    check_coherent_sobolev, check_lr_decay, check_moment_stability, check_norm_bounds, check_trotter_rate, LocalityCheck,
    MomentCheck, SweepResult,
};

pub use config::ExperimentConfig;
pub use manifest::RunManifest;
pub use plot::plot_run;

pub const SAMPLES_FILE: &str = "samples.csv";
pub const OBSERVABLES_FILE: &str = "observables.json";
pub const SUMMARY_FILE: &str = "summary.csv";

/// `⟨N_s⟩` for every site.
pub fn mean_photons(rho: &CMat, basis: &FockBasis) -> Vec<f64> {
    let mut out = vec![0.0; basis.modes()];
    for i in 0..basis.dim() {
        let w = rho[(i, i)].re;
        for (o, &n) in out.iter_mut().zip(basis.occupation(i)) {
            *o += w * n as f64;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateRecord {
    pub t: f64,
    pub edges: Vec<usize>,
    pub input_mean_photons: Vec<f64>,
    pub mean_photons: Vec<f64>,
    pub trace: f64,
    pub leakage: f64,
    pub method: String,
    pub samples: usize,
}

fn prepare_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    Ok(())
}

/// Evolves the configured input, dumps observables and heterodyne samples
/// for the edges of one partition set.
pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<SimulateRecord> {
    let s = cfg.simulate.as_ref().ok_or_else(|| Error::Config("missing [simulate] section".into()))?;
    let (h, diss) = cfg.model()?;
    let sets = partition_edges(&h.graph, s.partition())?;
    let edges = sets
        .get(s.partition_set)
        .cloned()
        .ok_or_else(|| Error::Config(format!("partition has {} sets", sets.len())))?;
    let mut alpha = s.input(&diss);
    if s.input_alpha.is_none() {
        let support: Vec<usize> = edges.iter().flat_map(|&e| [h.graph.edges[e].0, h.graph.edges[e].1]).collect();
        for (site, a) in alpha.iter_mut().enumerate() {
            if !support.contains(&site) {
                *a = C64::new(0.0, 0.0);
            }
        }
    }
    let basis = s.basis(h.n_modes())?;
    let rho0 = prepare_input_state(&alpha, &edges, &h.graph, &basis, s.projected)?;
    let l = build_liouvillian(&h, &diss, &basis, Variant::Full)?;
    let res = evolve(&rho0, &l, s.t, &EvolveOptions::default()).map_err(Error::at("evolve"))?;
    let states = edges
        .iter()
        .map(|&e| basis.reduce(&res.rho, &[h.graph.edges[e].0, h.graph.edges[e].1]))
        .collect::<Result<_>>()?;
    let plan = MeasurementPlan {
        plan_id: 0,
        partition_index: s.partition_set,
        edges: edges.clone(),
        alpha,
        t: s.t,
        phase_tag: 0,
        shots: s.shots,
        seed: cfg.seed,
        projected: s.projected,
    };
    let ev = EvolvedPlan {
        edges: edges.clone(),
        states,
        leakage: res.leakage,
    };
    let batch = run_plan(&plan, &ev).map_err(Error::at("sample"))?;
    let record = SimulateRecord {
        t: s.t,
        edges,
        input_mean_photons: mean_photons(&rho0, &basis),
        mean_photons: mean_photons(&res.rho, &basis),
        trace: res.rho.trace().re,
        leakage: res.leakage,
        method: format!("{:?}", res.method),
        samples: batch.outcomes.len(),
    };
    prepare_dir(out)?;
    batch.write_csv(&h.graph, File::create(out.join(SAMPLES_FILE))?)?;
    fs::write(out.join(OBSERVABLES_FILE), serde_json::to_string_pretty(&record)?)?;
    RunManifest::new("simulate", cfg)?.write(out)?;
    Ok(record)
}

pub fn report_file(seed: u64) -> String {
    format!("report_{seed}.json")
}

/// One [`end_to_end`] run per trial seed; JSON report each plus a CSV summary.
pub fn cmd_learn(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<LearnReport>> {
    let l = cfg.learn.as_ref().ok_or_else(|| Error::Config("missing [learn] section".into()))?;
    let (h, _) = cfg.model()?;
    let mut lc = cfg.learn_config()?;
    prepare_dir(out)?;
    let mut reports = Vec::new();
    for trial in 0..l.trials {
        lc.seed = cfg.seed + trial;
        let r = end_to_end(&h, &lc)?;
        log::info!("seed {}: max error {:.3e}, shots/setting {}", lc.seed, r.max_error, r.shots_per_setting);
        r.write_json(&out.join(report_file(lc.seed)))?;
        reports.push(r);
    }
    LearnReport::write_csv(&reports, File::create(out.join(SUMMARY_FILE))?)?;
    RunManifest::new("learn", cfg)?.write(out)?;
    Ok(reports)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Moments,
    Lr,
    Trotter,
    Norms,
    Sobolev,
    All,
}

impl Check {
    fn expand(self) -> Vec<Check> {
        match self {
            Check::All => vec![Check::Moments, Check::Lr, Check::Trotter, Check::Norms, Check::Sobolev],
            c => vec![c],
        }
    }

    pub fn file_stem(self) -> &'static str {
        match self {
            Check::Moments => "moments",
            Check::Lr => "lr",
            Check::Trotter => "trotter",
            Check::Norms => "norms",
            Check::Sobolev => "sobolev",
            Check::All => "all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub results: Vec<SweepResult>,
    pub pass: bool,
}

/// Runs the selected checks; the caller turns `pass = false` into a
/// nonzero exit.
pub fn cmd_verify(cfg: &ExperimentConfig, which: Check, out: &Path) -> Result<VerifyOutcome> {
    let v = cfg.verify.as_ref().ok_or_else(|| Error::Config("missing [verify] section".into()))?;
    let (h, diss) = cfg.model()?;
    let basis = v.basis(h.n_modes())?;
    let psi = basis.coherent(&v.input(h.n_modes()));
    let rho0 = &psi * psi.adjoint() / C64::new(psi.norm_squared(), 0.0);
    let opts = EvolveOptions {
        method: v.method,
        ..EvolveOptions::default()
    };
    prepare_dir(out)?;
    let mut results = Vec::new();
    for check in which.expand() {
        let r = match check {
            Check::Moments => {
                let mc = MomentCheck {
                    k: v.moment_k,
                    times: v.moment_times.clone(),
                    region: (0..h.n_modes()).collect(),
                    rate_multiple: v.rate_multiple,
                    leakage_tol: v.leakage_tol,
                    dissipation: v.dissipation,
                };
                check_moment_stability(&h, &diss, &basis, &rho0, &mc, &opts)
            }
            Check::Lr => {
                let lc = LocalityCheck {
                    edge: v.lr_edge,
                    t: v.lr_t,
                    max_dim: 5000,
                    tol: 1e-9,
                };
                check_lr_decay(&h, &diss, &basis, &rho0, &v.lr_radii, None, &lc, &opts)
            }
            Check::Trotter => check_trotter_rate(&h, &diss, &basis, &rho0, v.trotter_t, &v.trotter_ns, &opts),
            Check::Norms => check_norm_bounds(&h, &diss, &v.norm_cutoffs),
            Check::Sobolev => check_coherent_sobolev(&v.sobolev_alphas, &v.sobolev_ks, 120),
            Check::All => unreachable!("expanded above"),
        }
        .map_err(Error::at(check.file_stem()))?;
        log::info!("{}: {}", check.file_stem(), if r.pass { "pass" } else { "FAIL" });
        r.write_csv(File::create(out.join(format!("{}.csv", check.file_stem())))?)?;
        results.push(r);
    }
    let outcome = VerifyOutcome {
        pass: results.iter().all(|r| r.pass),
        results,
    };
    fs::write(out.join("verify.json"), serde_json::to_string_pretty(&outcome)?)?;
    RunManifest::new("verify", cfg)?.write(out)?;
    Ok(outcome)
}
