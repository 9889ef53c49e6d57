//! Single-time protocol: heterodyne box estimators at one short time, a
//! polynomial fit in `(α, β)`, and four β-derivatives giving `g_e`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::boxint::{box_values_grid, signed_indicator, signed_volume};
use super::{check_isolated_sets, CoefficientEstimate, EstimateSource, EstimateTable, RunStats};
use crate::dynamics::EvolveOptions;
use crate::error::{Error, Result};
use crate::fock::{FockBasis, C64};
use crate::lattice::{coefficients_from_g, EdgeCoefficients, HamiltonianSpec, G_VARS};
use crate::measurement::{edge_samplers, evolve_plan, partition_edges, run_shot, MeasurementPlan, PartitionMode};
use crate::poly::Poly;
use crate::polyfit::{chebyshev_arc_nodes, tensor_exponents, InterpolationSystem};

/// Variables of the fitted `Q̃`: `[α_i, α_j, β_iR, β_iI, β_jR, β_jI]` with real `α`.
pub const Q_VARS: usize = 6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VanillaPlan {
    pub d: usize,
    pub t: f64,
    /// Power of the stabilizing jump `a^p - α^p`.
    pub p: u32,
    /// Half-width of the α net per real coordinate.
    pub alpha_scale: f64,
    /// Half-width of the β net per real coordinate.
    pub beta_scale: f64,
    pub partition: PartitionMode,
    pub seed: u64,
    pub evolve: EvolveOptions,
}

impl VanillaPlan {
    pub fn new(d: usize, t: f64, p: u32) -> Self {
        Self {
            d,
            t,
            p,
            alpha_scale: 0.5f64.sqrt(),
            beta_scale: 0.5,
            partition: PartitionMode::EdgeDisjoint,
            seed: 0,
            evolve: EvolveOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || !(self.t > 0.0) {
            return Err(Error::InvalidArgument("vanilla plan needs d >= 1 and t > 0".into()));
        }
        if self.alpha_scale * 2f64.sqrt() > 1.0 + 1e-12 || self.beta_scale * 2.0 > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument("nets must stay inside the unit balls".into()));
        }
        Ok(())
    }

    /// Degree bound per variable of `Q̃`.
    pub fn degrees(&self) -> Vec<usize> {
        let d = self.d;
        vec![d, d, d + 1, d + 1, d + 1, d + 1]
    }

    pub fn alpha_axis(&self) -> Vec<f64> {
        chebyshev_arc_nodes(self.d + 1).into_iter().map(|x| x * self.alpha_scale).collect()
    }

    pub fn beta_axis(&self) -> Vec<f64> {
        chebyshev_arc_nodes(self.d + 2).into_iter().map(|x| x * self.beta_scale).collect()
    }

    pub fn alpha_net(&self) -> Vec<[f64; 2]> {
        let ax = self.alpha_axis();
        ax.iter().flat_map(|&x| ax.iter().map(move |&y| [x, y])).collect()
    }

    /// Tensor β net, `β_jI` fastest.
    pub fn beta_net(&self) -> Vec<[f64; 4]> {
        let ax = self.beta_axis();
        let mut out = Vec::with_capacity(ax.len().pow(4));
        for &a in &ax {
            for &b in &ax {
                for &c in &ax {
                    for &e in &ax {
                        out.push([a, b, c, e]);
                    }
                }
            }
        }
        out
    }

    /// Interpolation points in table order (α major, β minor).
    pub fn points(&self) -> Vec<Vec<f64>> {
        let betas = self.beta_net();
        self.alpha_net()
            .iter()
            .flat_map(|a| betas.iter().map(move |b| vec![a[0], a[1], b[0], b[1], b[2], b[3]]))
            .collect()
    }

    /// Largest summand `e^{|α-b|²}` over all boxes and α nodes.
    pub fn range(&self) -> f64 {
        let ra = self.alpha_axis().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let rb = self.beta_axis().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        // each real coordinate contributes at most (|α|+|b|)², or |b|² for the imaginary parts
        (2.0 * (ra + rb).powi(2) + 2.0 * rb * rb).exp()
    }

    pub fn net_sizes(&self) -> (usize, usize) {
        ((self.d + 1).pow(2), (self.d + 2).pow(4))
    }

    fn system(&self) -> Result<InterpolationSystem> {
        InterpolationSystem::new(&self.points(), &tensor_exponents(&self.degrees()))
    }
}

fn alpha_vector(graph_edges: &[(usize, usize)], set: &[usize], n: usize, a: [f64; 2]) -> Vec<C64> {
    let mut alpha = vec![C64::new(0.0, 0.0); n];
    for &e in set {
        let (i, j) = graph_edges[e];
        alpha[i] = C64::new(a[0], 0.0);
        alpha[j] = C64::new(a[1], 0.0);
    }
    alpha
}

/// Fills `Q̂` for every edge, α node and β node. `Exact` uses box quadrature
/// of the evolved reduced states instead of shots.
pub fn vanilla_estimates(
    plan: &VanillaPlan,
    h: &HamiltonianSpec,
    basis: &FockBasis,
    source: EstimateSource,
) -> Result<(EstimateTable, RunStats)> {
    plan.validate()?;
    let graph = &h.graph;
    let sets = partition_edges(graph, plan.partition)?;
    check_isolated_sets(graph, &sets)?;
    let alphas = plan.alpha_net();
    let betas = plan.beta_net();
    let shots = match source {
        EstimateSource::Sampled { shots } => shots,
        EstimateSource::Exact => 0,
    };
    let mut table = EstimateTable::new((0..graph.edges.len()).collect(), alphas.len(), 1, betas.len(), shots as u64);
    let ax = plan.beta_axis();
    let pairs: Vec<(f64, f64)> = ax.iter().flat_map(|&x| ax.iter().map(move |&y| (x, y))).collect();
    let range = plan.range();
    let b_max = plan.beta_axis().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut stats = RunStats::default();

    for (s, set) in sets.iter().enumerate() {
        let jobs: Vec<(usize, [f64; 2])> = alphas.iter().copied().enumerate().collect();
        let rows: Vec<(usize, Vec<(usize, Vec<f64>)>, f64, f64)> = jobs
            .par_iter()
            .map(|&(ai, a)| {
                let mp = MeasurementPlan {
                    plan_id: (s * alphas.len() + ai) as u64,
                    partition_index: s,
                    edges: set.clone(),
                    alpha: alpha_vector(&graph.edges, set, graph.n_vertices(), a),
                    t: plan.t,
                    phase_tag: 0,
                    shots,
                    seed: plan.seed,
                    projected: None,
                };
                let ev = evolve_plan(&mp, h, plan.p, basis, &plan.evolve)?;
                let alpha_e = [C64::new(a[0], 0.0), C64::new(a[1], 0.0)];
                let mut per_edge = Vec::with_capacity(set.len());
                let mut acc_rate = 1.0;
                match source {
                    EstimateSource::Exact => {
                        for (k, &e) in set.iter().enumerate() {
                            let (rho, b) = &ev.states[k];
                            let vals = box_values_grid(rho, b, alpha_e, &pairs, &pairs);
                            let q = vals
                                .iter()
                                .zip(&betas)
                                .map(|(v, beta)| (v - signed_volume(beta) / (PI * PI)) / plan.t)
                                .collect();
                            per_edge.push((e, q));
                        }
                    }
                    EstimateSource::Sampled { shots } => {
                        let samplers = edge_samplers(&ev)?;
                        let mut sums = vec![vec![0.0; betas.len()]; set.len()];
                        for shot in 0..shots as u64 {
                            for (k, o) in run_shot(&mp, shot, set, &samplers)?.into_iter().enumerate() {
                                let b = o.beta;
                                // outside every box the summand vanishes
                                if b.iter().any(|x| x.abs() > b_max) {
                                    continue;
                                }
                                let w = ((a[0] - b[0]).powi(2) + b[1].powi(2) + (a[1] - b[2]).powi(2) + b[3].powi(2)).exp();
                                if w > range * (1.0 + 1e-12) {
                                    return Err(Error::InvalidArgument(format!("summand {w} exceeds range bound {range}")));
                                }
                                for (bi, beta) in betas.iter().enumerate() {
                                    sums[k][bi] += signed_indicator(beta, &b) * w;
                                }
                            }
                        }
                        acc_rate = samplers.iter().map(|x| x.acceptance_rate()).sum::<f64>() / samplers.len().max(1) as f64;
                        for (k, &e) in set.iter().enumerate() {
                            let q = sums[k]
                                .iter()
                                .zip(&betas)
                                .map(|(sum, beta)| (sum / shots as f64 - signed_volume(beta) / (PI * PI)) / plan.t)
                                .collect();
                            per_edge.push((e, q));
                        }
                    }
                }
                Ok((ai, per_edge, ev.leakage, acc_rate))
            })
            .collect::<Result<_>>()?;
        for (ai, per_edge, leak, acc) in rows {
            for (e, q) in per_edge {
                table.set_beta_slice(e, ai, 0, &q);
            }
            stats.record(plan.t, shots, leak, acc);
        }
    }
    Ok((table, stats))
}

/// Embedding of the six `Q̃` variables into the eight-variable `g` layout
/// (imaginary parts of `α` stay zero).
fn embed_forms() -> Vec<Vec<(usize, f64)>> {
    [0, 2, 4, 5, 6, 7].iter().map(|&v| vec![(v, 1.0)]).collect()
}

/// `λ` from a fitted `Q̃`: `g = -iπ² ∂_{β_iR}∂_{β_iI}∂_{β_jR}∂_{β_jI} Q̃`.
pub fn lambda_from_q(q: &Poly, d: usize) -> Result<EdgeCoefficients> {
    if q.nvars() != Q_VARS {
        return Err(Error::DegreeMismatch(format!("Q̃ needs {Q_VARS} variables, got {}", q.nvars())));
    }
    let h = q.derivative(&[0, 0, 1, 1, 1, 1]);
    let g = h.scale(C64::new(0.0, -PI * PI)).compose_linear(G_VARS, &embed_forms());
    Ok(coefficients_from_g(&g, d)?.symmetrized())
}

/// Interpolates each edge's table and extracts `λ̂`.
pub fn vanilla_reconstruct(table: &EstimateTable, plan: &VanillaPlan) -> Result<CoefficientEstimate> {
    if !table.is_complete() {
        return Err(Error::InvalidArgument("estimate table has unpopulated entries".into()));
    }
    let (na, nb) = plan.net_sizes();
    if table.n_alpha != na || table.n_beta != nb || table.n_time != 1 {
        return Err(Error::InvalidArgument("table shape does not match the plan nets".into()));
    }
    let sys = plan.system().map_err(Error::at("interpolate"))?;
    let mut lambda = Vec::with_capacity(table.edges.len());
    for e in 0..table.edges.len() {
        let vals: Vec<f64> = (0..na).flat_map(|a| table.beta_slice(e, a, 0).to_vec()).collect();
        let q = sys.solve(&vals)?;
        lambda.push(lambda_from_q(&q, plan.d)?);
    }
    Ok(CoefficientEstimate {
        edges: table.edges.clone(),
        lambda,
        protocol: "vanilla".into(),
    })
}

/// Largest ℓ1 row norm of the linear map from table values to any `λ`
/// component (real and imaginary parts counted separately).
pub fn vanilla_sensitivity(plan: &VanillaPlan) -> Result<f64> {
    let sys = plan.system()?;
    let n = sys.len();
    let unit: Vec<EdgeCoefficients> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut v = vec![0.0; n];
            v[k] = 1.0;
            lambda_from_q(&sys.solve(&v)?, plan.d)
        })
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for idx in EdgeCoefficients::admissible(plan.d) {
        let [k, l, k2, l2] = idx;
        let re: f64 = unit.iter().map(|c| c.get(k, l, k2, l2).re.abs()).sum();
        let im: f64 = unit.iter().map(|c| c.get(k, l, k2, l2).im.abs()).sum();
        worst = worst.max(re).max(im);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::g_polynomial;

    /// `Q(α, β) = (i/π²) ∫_{R_β} g` for real `α`, integrated symbolically.
    fn exact_q(c: &EdgeCoefficients) -> Poly {
        let g = g_polynomial(c);
        let forms: Vec<Vec<(usize, f64)>> = vec![
            vec![(0, 1.0)],
            vec![],
            vec![(1, 1.0)],
            vec![],
            vec![(2, 1.0)],
            vec![(3, 1.0)],
            vec![(4, 1.0)],
            vec![(5, 1.0)],
        ];
        g.compose_linear(Q_VARS, &forms)
            .integrate_from_zero(&[2, 3, 4, 5])
            .scale(C64::new(0.0, 1.0 / (PI * PI)))
    }

    #[test]
    fn noiseless_polynomial_table_round_trips() {
        let plan = VanillaPlan::new(1, 0.01, 4);
        let mut c = EdgeCoefficients::zeros(1);
        c.set_hermitian(0, 1, 0, 1, C64::new(0.3, -0.1));
        c.set_hermitian(1, 1, 0, 1, C64::new(-0.2, 0.15));
        c.set_hermitian(1, 1, 1, 1, C64::new(0.4, 0.0));
        let c = c.symmetrized();
        let q = exact_q(&c);
        let (na, nb) = plan.net_sizes();
        let mut table = EstimateTable::new(vec![0], na, 1, nb, 0);
        for (idx, p) in plan.points().iter().enumerate() {
            let v = q.eval(p);
            assert!(v.im.abs() < 1e-12, "Q must be real");
            table.set(0, idx / nb, 0, idx % nb, v.re);
        }
        let est = vanilla_reconstruct(&table, &plan).unwrap();
        assert!(est.lambda[0].max_diff(&c) < 1e-9);
    }

    #[test]
    fn zero_table_gives_zero() {
        let plan = VanillaPlan::new(1, 0.01, 4);
        let (na, nb) = plan.net_sizes();
        let mut table = EstimateTable::new(vec![0], na, 1, nb, 0);
        for a in 0..na {
            table.set_beta_slice(0, a, 0, &vec![0.0; nb]);
        }
        assert!(vanilla_reconstruct(&table, &plan).unwrap().lambda[0].max_abs() < 1e-15);
    }

    #[test]
    fn sensitivity_is_finite_and_range_bounded() {
        let plan = VanillaPlan::new(1, 0.01, 4);
        let s = vanilla_sensitivity(&plan).unwrap();
        assert!(s.is_finite() && s > 1.0);
        assert!(plan.range() <= 4f64.exp());
    }
}
