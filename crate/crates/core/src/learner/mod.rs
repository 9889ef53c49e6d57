//! The two learning protocols and their bookkeeping.
//!
//! Both build an [`EstimateTable`] from heterodyne samples (or from exact
//! box integrals of the evolved state) and reconstruct edge coefficients
//! from it by linear post-processing.

pub mod boxint;
pub mod refined;
pub mod report;
pub mod vanilla;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{EdgeCoefficients, HamiltonianSpec, LatticeGraph};

pub use refined::{refined_estimates, refined_reconstruct, RefinedPlan};
pub use report::{end_to_end, LearnConfig, LearnReport, Protocol};
pub use vanilla::{vanilla_estimates, vanilla_reconstruct, VanillaPlan};

/// Where estimator values come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EstimateSource {
    /// Empirical means over this many shots per plan.
    Sampled { shots: usize },
    /// Expectations computed by quadrature of the evolved state.
    Exact,
}

/// Estimator values indexed by `(edge, α node, time node, β node)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateTable {
    pub edges: Vec<usize>,
    pub n_alpha: usize,
    pub n_time: usize,
    pub n_beta: usize,
    pub phase_tag: u32,
    /// Shots behind each value (zero for exact tables).
    pub shots: u64,
    values: Vec<f64>,
}

impl EstimateTable {
    pub fn new(edges: Vec<usize>, n_alpha: usize, n_time: usize, n_beta: usize, shots: u64) -> Self {
        let n = edges.len() * n_alpha * n_time * n_beta;
        Self {
            edges,
            n_alpha,
            n_time,
            n_beta,
            phase_tag: 0,
            shots,
            values: vec![f64::NAN; n],
        }
    }

    fn idx(&self, e: usize, a: usize, t: usize, b: usize) -> usize {
        ((e * self.n_alpha + a) * self.n_time + t) * self.n_beta + b
    }

    /// Position of a graph edge in the table.
    pub fn edge_pos(&self, edge: usize) -> Option<usize> {
        self.edges.iter().position(|&e| e == edge)
    }

    pub fn get(&self, e: usize, a: usize, t: usize, b: usize) -> f64 {
        self.values[self.idx(e, a, t, b)]
    }

    pub fn set(&mut self, e: usize, a: usize, t: usize, b: usize, v: f64) {
        let i = self.idx(e, a, t, b);
        self.values[i] = v;
    }

    /// Values over the β net for one `(edge, α, t)`.
    pub fn beta_slice(&self, e: usize, a: usize, t: usize) -> &[f64] {
        let s = self.idx(e, a, t, 0);
        &self.values[s..s + self.n_beta]
    }

    pub fn set_beta_slice(&mut self, e: usize, a: usize, t: usize, vals: &[f64]) {
        let s = self.idx(e, a, t, 0);
        self.values[s..s + self.n_beta].copy_from_slice(vals);
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-edge `λ̂` in table edge order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEstimate {
    pub edges: Vec<usize>,
    pub lambda: Vec<EdgeCoefficients>,
    pub protocol: String,
}

impl CoefficientEstimate {
    /// Worst absolute coefficient error per edge against a known model.
    pub fn errors(&self, truth: &HamiltonianSpec) -> Vec<f64> {
        self.edges
            .iter()
            .zip(&self.lambda)
            .map(|(&e, l)| l.max_diff(&truth.coeffs[e]))
            .collect()
    }
}

/// Bookkeeping over the evolutions behind a table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    /// Distinct simulated settings (one evolution each).
    pub settings: usize,
    pub total_shots: u64,
    /// `Σ shots · t` over settings: the physical evolution time spent.
    pub total_evolution_time: f64,
    pub max_leakage: f64,
    pub mean_acceptance: f64,
}

impl RunStats {
    fn record(&mut self, t: f64, shots: usize, leakage: f64, acceptance: f64) {
        let n = self.settings as f64;
        self.mean_acceptance = (self.mean_acceptance * n + acceptance) / (n + 1.0);
        self.settings += 1;
        self.total_shots += shots as u64;
        self.total_evolution_time += shots as f64 * t;
        self.max_leakage = self.max_leakage.max(leakage);
    }
}

/// Rejects sets in which two edges are joined by a bond: the inputs on one
/// would then leak into the other's first-order signal.
pub fn check_isolated_sets(graph: &LatticeGraph, sets: &[Vec<usize>]) -> Result<()> {
    for set in sets {
        let sites: Vec<(usize, usize)> = set.iter().map(|&e| graph.edges[e]).collect();
        for (x, &(a, b)) in sites.iter().enumerate() {
            for &(c, d) in &sites[x + 1..] {
                let linked = graph
                    .edges
                    .iter()
                    .any(|&(u, v)| ([a, b].contains(&u) && [c, d].contains(&v)) || ([a, b].contains(&v) && [c, d].contains(&u)));
                if linked {
                    return Err(Error::InvalidArgument(format!(
                        "edges ({a},{b}) and ({c},{d}) share a set but are coupled; use a rectangle partition"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Inputs to the Hoeffding shot budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetInput {
    pub eps_stat: f64,
    pub delta: f64,
    /// Width of the range of one estimator summand.
    pub range: f64,
    pub n_edges: usize,
    pub net_sizes: Vec<usize>,
    /// Evolution time dividing the vanilla estimator; `None` for refined.
    pub t: Option<f64>,
}

/// `⌈R²/(2 (t ε)²) · ln(2 |E| Π|N| / δ)⌉`, Hoeffding with a union bound over
/// all estimated values.
pub fn sample_budget(b: &BudgetInput) -> Result<f64> {
    if !(b.eps_stat > 0.0 && b.eps_stat < 1.0) || !(b.delta > 0.0 && b.delta < 1.0) {
        return Err(Error::InvalidArgument("eps_stat and delta must lie in (0, 1)".into()));
    }
    let scale = b.t.unwrap_or(1.0);
    let count = b.n_edges as f64 * b.net_sizes.iter().map(|&n| n as f64).product::<f64>();
    let eff = scale * b.eps_stat;
    Ok((b.range * b.range / (2.0 * eff * eff) * (2.0 * count / b.delta).ln()).ceil())
}
