//! End-to-end runs and their reports.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::refined::{refined_estimates, refined_reconstruct, refined_sensitivity, RefinedPlan};
use super::vanilla::{vanilla_estimates, vanilla_reconstruct, vanilla_sensitivity, VanillaPlan};
use super::{sample_budget, BudgetInput, CoefficientEstimate, EstimateSource, RunStats};
use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::lattice::{EdgeCoefficients, HamiltonianSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Vanilla,
    Refined,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LearnConfig {
    pub protocol: Protocol,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    /// Per-mode simulation cutoff.
    pub cutoff: usize,
    /// Optional cap on the total photon number of the simulation basis.
    pub total_cap: Option<usize>,
    /// Upper limit on shots per setting; the budget is reported either way.
    pub shot_cap: Option<u64>,
    /// Replace sampling by exact box quadrature.
    pub noiseless: bool,
    pub vanilla: VanillaPlan,
    pub refined: RefinedPlan,
}

impl LearnConfig {
    pub fn new(protocol: Protocol, d: usize, eps: f64, delta: f64, seed: u64) -> Self {
        let refined = RefinedPlan::new(d, 2 * d as u32 + 2);
        Self {
            protocol,
            eps,
            delta,
            seed,
            cutoff: refined.min_cutoff(),
            total_cap: None,
            shot_cap: None,
            noiseless: false,
            vanilla: VanillaPlan::new(d, 0.01, 2 * d as u32 + 2),
            refined,
        }
    }

    pub fn basis(&self, modes: usize) -> Result<FockBasis> {
        FockBasis::with_cutoffs(vec![self.cutoff; modes], self.total_cap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub edge: usize,
    pub index: [usize; 4],
    pub estimate_re: f64,
    pub estimate_im: f64,
    pub truth_re: f64,
    pub truth_im: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnReport {
    pub protocol: Protocol,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    /// Worst `λ` error per unit estimator error.
    pub sensitivity: f64,
    pub eps_stat: f64,
    /// Summand range entering the Hoeffding bound.
    pub range: f64,
    /// Shots per setting required by the budget.
    pub budget_shots: f64,
    /// Shots per setting actually used (zero when noiseless).
    pub shots_per_setting: u64,
    pub capped: bool,
    pub noiseless: bool,
    pub stats: RunStats,
    pub max_error: f64,
    pub success: bool,
    pub coefficients: Vec<CoefficientRow>,
    #[serde(skip)]
    pub estimate: Option<CoefficientEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub protocol: Protocol,
    pub seed: u64,
    pub eps: f64,
    pub delta: f64,
    pub shots_per_setting: u64,
    pub budget_shots: f64,
    pub total_shots: u64,
    pub total_evolution_time: f64,
    pub max_error: f64,
    pub success: bool,
}

impl LearnReport {
    pub fn summary(&self) -> SummaryRow {
        SummaryRow {
            protocol: self.protocol,
            seed: self.seed,
            eps: self.eps,
            delta: self.delta,
            shots_per_setting: self.shots_per_setting,
            budget_shots: self.budget_shots,
            total_shots: self.stats.total_shots,
            total_evolution_time: self.stats.total_evolution_time,
            max_error: self.max_error,
            success: self.success,
        }
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(std::fs::File::open(path)?)?)
    }

    pub fn write_csv<W: Write>(reports: &[LearnReport], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in reports {
            w.serialize(r.summary())?;
        }
        w.flush()?;
        Ok(())
    }
}

fn rows(est: &CoefficientEstimate, truth: &HamiltonianSpec) -> Vec<CoefficientRow> {
    let mut out = Vec::new();
    for (&e, lam) in est.edges.iter().zip(&est.lambda) {
        let t: &EdgeCoefficients = &truth.coeffs[e];
        for idx in EdgeCoefficients::admissible(lam.d) {
            let [k, l, k2, l2] = idx;
            let (a, b) = (lam.get(k, l, k2, l2), t.get(k, l, k2, l2));
            out.push(CoefficientRow {
                edge: e,
                index: idx,
                estimate_re: a.re,
                estimate_im: a.im,
                truth_re: b.re,
                truth_im: b.im,
                error: (a - b).norm(),
            });
        }
    }
    out
}

/// Budget, estimation and reconstruction for one protocol on a synthetic
/// model. Deterministic for a fixed config.
pub fn end_to_end(h: &HamiltonianSpec, cfg: &LearnConfig) -> Result<LearnReport> {
    if !(cfg.eps > 0.0) || !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::InvalidArgument("eps must be positive and delta in (0, 1)".into()));
    }
    let basis = cfg.basis(h.n_modes()).map_err(Error::at("basis"))?;
    let n_edges = h.graph.edges.len();
    let (sensitivity, range, budget) = match cfg.protocol {
        Protocol::Vanilla => {
            let mut plan = cfg.vanilla.clone();
            plan.seed = cfg.seed;
            let s = vanilla_sensitivity(&plan).map_err(Error::at("sensitivity"))?;
            let (na, nb) = plan.net_sizes();
            (s, plan.range(), (vec![na, nb], Some(plan.t)))
        }
        Protocol::Refined => {
            let plan = &cfg.refined;
            let s = refined_sensitivity(plan).map_err(Error::at("sensitivity"))?;
            let na = plan.alpha_net().len();
            let nb = plan.beta_pairs().len().pow(2);
            (s, plan.range(), (vec![na, nb, plan.time_nodes], None))
        }
    };
    let eps_stat = (cfg.eps / sensitivity).min(0.999);
    let budget_shots = sample_budget(&BudgetInput {
        eps_stat,
        delta: cfg.delta,
        range,
        n_edges,
        net_sizes: budget.0,
        t: budget.1,
    })
    .map_err(Error::at("budget"))?;
    let (source, shots, capped) = if cfg.noiseless {
        (EstimateSource::Exact, 0, false)
    } else {
        let want = budget_shots.min(u64::MAX as f64) as u64;
        let used = cfg.shot_cap.map_or(want, |c| c.min(want)).max(1);
        (EstimateSource::Sampled { shots: used as usize }, used, used < want)
    };
    if capped {
        log::warn!("shot budget {budget_shots:.3e} capped at {shots}");
    }
    let (est, stats) = match cfg.protocol {
        Protocol::Vanilla => {
            let mut plan = cfg.vanilla.clone();
            plan.seed = cfg.seed;
            let (table, stats) = vanilla_estimates(&plan, h, &basis, source).map_err(Error::at("estimate"))?;
            (vanilla_reconstruct(&table, &plan).map_err(Error::at("reconstruct"))?, stats)
        }
        Protocol::Refined => {
            let mut plan = cfg.refined.clone();
            plan.seed = cfg.seed;
            let (table, stats) = refined_estimates(&plan, h, &basis, source).map_err(Error::at("estimate"))?;
            (refined_reconstruct(&table, &plan).map_err(Error::at("reconstruct"))?, stats)
        }
    };
    let coefficients = rows(&est, h);
    let max_error = coefficients.iter().map(|r| r.error).fold(0.0, f64::max);
    Ok(LearnReport {
        protocol: cfg.protocol,
        eps: cfg.eps,
        delta: cfg.delta,
        seed: cfg.seed,
        sensitivity,
        eps_stat,
        range,
        budget_shots,
        shots_per_setting: shots,
        capped,
        noiseless: cfg.noiseless,
        stats,
        max_error,
        success: max_error <= cfg.eps,
        coefficients,
        estimate: Some(est),
    })
}
