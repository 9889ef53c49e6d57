//! Multi-time protocol with projected coherent inputs: a time derivative at
//! zero, derivatives of the box table at the origin in `(α, β)`, and matrix
//! elements of `H_e` read off from Wirtinger coefficients.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::boxint::{box_values_grid, signed_indicator};
use super::{check_isolated_sets, CoefficientEstimate, EstimateSource, EstimateTable, RunStats};
use crate::dynamics::{build_liouvillian, evolve_times, EvolveOptions, Method, Variant};
use crate::error::{Error, Result};
use crate::fock::{annihilation_op, factorial, CMat, FockBasis, TruncationSpec, C64};
use crate::lattice::{
    lambda_condition_factor, lambda_from_matrix_elements, DissipatorSpec, EdgeCoefficients, HamiltonianSpec,
    LatticeGraph, MatrixElementTable,
};
use crate::measurement::{
    edge_samplers, partition_edges, prepare_input_state, projected_weight, run_shot, EvolvedPlan, MeasurementPlan,
    PartitionMode,
};
use crate::polyfit::{poly_derivatives_from_values, DerivativeGrid, DerivativeTable, TimeDerivativeRule};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinedPlan {
    pub d: usize,
    /// Per-mode projection level of the inputs.
    pub m: usize,
    pub p: u32,
    /// Polynomial degree of the time fit.
    pub time_degree: usize,
    pub time_nodes: usize,
    /// Time window scale: samples lie in `τ·[b₁, b₂]`.
    pub tau: f64,
    /// Rectangle radius of the partition.
    pub r: usize,
    pub alpha_scale: f64,
    pub beta_scale: f64,
    pub seed: u64,
    /// Largest `|λ̂|` tolerated by the zero-Hamiltonian offset check.
    pub offset_tol: f64,
    pub evolve: EvolveOptions,
}

impl RefinedPlan {
    pub fn new(d: usize, p: u32) -> Self {
        Self {
            d,
            m: d,
            p,
            time_degree: 2,
            time_nodes: 3,
            tau: 0.01,
            r: 1,
            alpha_scale: 0.5f64.sqrt(),
            beta_scale: 0.5,
            seed: 0,
            offset_tol: 1e-6,
            evolve: EvolveOptions {
                method: Method::RungeKutta,
                tol: 1e-12,
                ..EvolveOptions::default()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.m < self.d {
            return Err(Error::InvalidArgument("refined plan needs d >= 1 and m >= d".into()));
        }
        if self.time_nodes <= self.time_degree || self.r == 0 {
            return Err(Error::InvalidArgument("need more time nodes than the fit degree and r >= 1".into()));
        }
        if self.alpha_scale * 2f64.sqrt() > 1.0 + 1e-12 || self.beta_scale * 2.0 > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument("nets must stay inside the unit balls".into()));
        }
        Ok(())
    }

    /// Smallest per-mode cutoff that keeps the first-order signal exact.
    pub fn min_cutoff(&self) -> usize {
        self.m + self.p as usize
    }

    /// `[α_iR, α_iI, α_jR, α_jI, β_iR, β_iI, β_jR, β_jI]` with one node more
    /// than the degree per variable.
    pub fn grid(&self) -> DerivativeGrid {
        let da = 2 * self.m;
        let db = 2 * (self.m + self.d) + 1;
        let mut degrees = vec![da; 4];
        degrees.extend([db; 4]);
        let mut scales = vec![self.alpha_scale; 4];
        scales.extend([self.beta_scale; 4]);
        DerivativeGrid {
            nodes: degrees.iter().map(|d| d + 1).collect(),
            degrees,
            scales,
            k_max: self.d + 1,
        }
    }

    pub fn time_rule(&self) -> Result<TimeDerivativeRule> {
        TimeDerivativeRule::new(self.time_degree, self.time_nodes, self.tau)
    }

    fn axis(&self, v: usize) -> Vec<f64> {
        self.grid().axis_points(v)
    }

    /// α nodes as complex pairs, tensor order with `α_jI` fastest.
    pub fn alpha_net(&self) -> Vec<[C64; 2]> {
        let ax = self.axis(0);
        let mut out = Vec::new();
        for &a in &ax {
            for &b in &ax {
                for &c in &ax {
                    for &e in &ax {
                        out.push([C64::new(a, b), C64::new(c, e)]);
                    }
                }
            }
        }
        out
    }

    /// Per-mode `(re, im)` box corners; the β net is their product.
    pub fn beta_pairs(&self) -> Vec<(f64, f64)> {
        let ax = self.axis(4);
        ax.iter().flat_map(|&x| ax.iter().map(move |&y| (x, y))).collect()
    }

    pub fn beta_net(&self) -> Vec<[f64; 4]> {
        let pairs = self.beta_pairs();
        pairs
            .iter()
            .flat_map(|&(a, b)| pairs.iter().map(move |&(c, e)| [a, b, c, e]))
            .collect()
    }

    /// Largest summand `C_α e^{|b|²}`.
    pub fn range(&self) -> f64 {
        let ra = self.axis(0).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let rb = self.axis(4).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let a = C64::new(ra, ra);
        projected_weight(&[a, a], self.m) * (4.0 * rb * rb).exp()
    }
}

/// `Σ_i (L_i X L_i† - ½{L_i†L_i, X})` with `L_i = a_i^p - α_i^p` on a
/// two-mode product basis.
fn dissipator_two_mode(x: &CMat, alpha: [C64; 2], p: u32, cutoff: usize) -> CMat {
    let a = annihilation_op(&TruncationSpec::new(cutoff, 1).expect("one mode"));
    let id = CMat::identity(cutoff + 1, cutoff + 1);
    let mut ap = id.clone();
    for _ in 0..p {
        ap = &ap * &a;
    }
    let mut out = CMat::zeros(x.nrows(), x.ncols());
    for (site, &al) in alpha.iter().enumerate() {
        let local = &ap - &id * al.powu(p);
        let l = if site == 0 { local.kronecker(&id) } else { id.kronecker(&local) };
        let ld = l.adjoint();
        let ll = &ld * &l;
        out += &l * x * &ld - (&ll * x + x * &ll) * C64::new(0.5, 0.0);
    }
    out
}

/// Box values of the dissipator applied to the unnormalized projected input,
/// over the plan's β net.
pub fn dissipator_offset(plan: &RefinedPlan, alpha: [C64; 2]) -> Result<Vec<f64>> {
    let cutoff = plan.min_cutoff();
    let basis = FockBasis::product(&TruncationSpec::new(cutoff, 2)?);
    let mut factors = Vec::with_capacity(2);
    for a in alpha {
        let mut f = Vec::with_capacity(cutoff + 1);
        let mut c = C64::new(1.0, 0.0);
        for w in 0..=cutoff {
            if w > 0 {
                c = c * a / (w as f64).sqrt();
            }
            f.push(if w <= plan.m { c } else { C64::new(0.0, 0.0) });
        }
        factors.push(f);
    }
    let psi = basis.product_state(&factors);
    let x = &psi * psi.adjoint();
    let dx = dissipator_two_mode(&x, alpha, plan.p, cutoff);
    let pairs = plan.beta_pairs();
    Ok(box_values_grid(&dx, &basis, [C64::new(0.0, 0.0); 2], &pairs, &pairs))
}

fn check_basis(plan: &RefinedPlan, basis: &FockBasis, sets: &[Vec<usize>]) -> Result<()> {
    let need = plan.min_cutoff();
    if let Some(&c) = basis.cutoffs().iter().find(|&&c| c < need) {
        return Err(Error::CutoffExceeded { requested: need, available: c });
    }
    if let Some(cap) = basis.total_cap() {
        let widest = sets.iter().map(|s| s.len()).max().unwrap_or(1);
        let need = 2 * plan.m * widest + plan.p as usize;
        if cap < need {
            return Err(Error::CutoffExceeded { requested: need, available: cap });
        }
    }
    Ok(())
}

/// Fills `L̂ = C_α ∫_{R_β} e^{|β′|²} Q_t(β′)` at every edge, α node, time
/// node and β node.
pub fn refined_estimates(
    plan: &RefinedPlan,
    h: &HamiltonianSpec,
    basis: &FockBasis,
    source: EstimateSource,
) -> Result<(EstimateTable, RunStats)> {
    plan.validate()?;
    let graph: &LatticeGraph = &h.graph;
    let sets = if graph.edges.len() == 1 {
        vec![vec![0]]
    } else {
        partition_edges(graph, PartitionMode::RectangleDisjoint(plan.r))?
    };
    check_isolated_sets(graph, &sets)?;
    check_basis(plan, basis, &sets)?;
    let rule = plan.time_rule()?;
    let mut order: Vec<usize> = (0..rule.times.len()).collect();
    order.sort_by(|&a, &b| rule.times[a].total_cmp(&rule.times[b]));
    let sorted_times: Vec<f64> = order.iter().map(|&k| rule.times[k]).collect();
    let alphas = plan.alpha_net();
    let betas = plan.beta_net();
    let pairs = plan.beta_pairs();
    let shots = match source {
        EstimateSource::Sampled { shots } => shots,
        EstimateSource::Exact => 0,
    };
    let mut table = EstimateTable::new(
        (0..graph.edges.len()).collect(),
        alphas.len(),
        rule.times.len(),
        betas.len(),
        shots as u64,
    );
    let range = plan.range();
    let mut stats = RunStats::default();
    let n_t = rule.times.len();

    for (s, set) in sets.iter().enumerate() {
        type Row = (usize, usize, Vec<(usize, Vec<f64>)>, f64, f64, f64);
        let rows: Vec<Vec<Row>> = alphas
            .par_iter()
            .enumerate()
            .map(|(ai, a)| {
                let mut alpha = vec![C64::new(0.0, 0.0); graph.n_vertices()];
                for &e in set {
                    let (i, j) = graph.edges[e];
                    alpha[i] = a[0];
                    alpha[j] = a[1];
                }
                let c = projected_weight(a, plan.m);
                let rho0 = prepare_input_state(&alpha, set, graph, basis, Some(plan.m))?;
                let dspec = DissipatorSpec::new(plan.p, alpha.clone())?;
                let l = build_liouvillian(h, &dspec, basis, Variant::Full)?;
                let evolved = evolve_times(&rho0, &l, &sorted_times, &plan.evolve).map_err(Error::at("evolve"))?;
                let mut out = Vec::with_capacity(n_t);
                for (pos, res) in evolved.into_iter().enumerate() {
                    let tk = order[pos];
                    let states = set
                        .iter()
                        .map(|&e| {
                            let (i, j) = graph.edges[e];
                            basis.reduce(&res.rho, &[i, j])
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let mut per_edge = Vec::with_capacity(set.len());
                    let mut acc = 1.0;
                    match source {
                        EstimateSource::Exact => {
                            for (k, &e) in set.iter().enumerate() {
                                let (rho, b) = &states[k];
                                let zero = [C64::new(0.0, 0.0); 2];
                                let v = box_values_grid(rho, b, zero, &pairs, &pairs);
                                per_edge.push((e, v.into_iter().map(|x| c * x).collect()));
                            }
                        }
                        EstimateSource::Sampled { shots } => {
                            let ev = EvolvedPlan {
                                edges: set.clone(),
                                states,
                                leakage: res.leakage,
                            };
                            let mp = MeasurementPlan {
                                plan_id: ((s * alphas.len() + ai) * n_t + tk) as u64,
                                partition_index: s,
                                edges: set.clone(),
                                alpha: alpha.clone(),
                                t: rule.times[tk],
                                phase_tag: 0,
                                shots,
                                seed: plan.seed,
                                projected: Some(plan.m),
                            };
                            let samplers = edge_samplers(&ev)?;
                            let mut sums = vec![vec![0.0; betas.len()]; set.len()];
                            for shot in 0..shots as u64 {
                                for (k, o) in run_shot(&mp, shot, set, &samplers)?.into_iter().enumerate() {
                                    let b = o.beta;
                                    let w = c * b.iter().map(|x| x * x).sum::<f64>().exp();
                                    if w > range * (1.0 + 1e-12) {
                                        // outside every box in the net: contributes zero
                                        continue;
                                    }
                                    for (bi, beta) in betas.iter().enumerate() {
                                        sums[k][bi] += signed_indicator(beta, &b) * w;
                                    }
                                }
                            }
                            acc = samplers.iter().map(|x| x.acceptance_rate()).sum::<f64>() / samplers.len().max(1) as f64;
                            for (k, &e) in set.iter().enumerate() {
                                per_edge.push((e, sums[k].iter().map(|x| x / shots as f64).collect()));
                            }
                        }
                    }
                    out.push((ai, tk, per_edge, res.leakage, acc, rule.times[tk]));
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        for (ai, tk, per_edge, leak, acc, t) in rows.into_iter().flatten() {
            for (e, v) in per_edge {
                table.set_beta_slice(e, ai, tk, &v);
            }
            stats.record(t, shots, leak, acc);
        }
    }
    Ok((table, stats))
}

fn binom(n: usize, k: usize) -> f64 {
    factorial(n as u32) / (factorial(k as u32) * factorial((n - k) as u32))
}

/// Real-derivative expansion of `∂_z^a` (`sign = -1`) or `∂_z̄^a` (`sign = +1`):
/// pairs `((order_x, order_y), weight)`.
fn wirtinger(a: usize, sign: f64) -> Vec<((u8, u8), C64)> {
    let unit = C64::new(0.0, sign);
    (0..=a)
        .map(|r| {
            let w = unit.powu((a - r) as u32) * binom(a, r) / 2f64.powi(a as i32);
            ((r as u8, (a - r) as u8), w)
        })
        .collect()
}

/// Linear combination of table derivatives giving the Wirtinger coefficient
/// of `α_i^{w_i} α_j^{w_j} β̄_i^{u_i} β̄_j^{u_j}` in the integrand.
fn coefficient_terms(w: [usize; 2], u: [usize; 2]) -> Vec<(Vec<u8>, C64)> {
    let norm = 1.0 / (factorial(w[0] as u32) * factorial(w[1] as u32) * factorial(u[0] as u32) * factorial(u[1] as u32));
    let mut out = Vec::new();
    for (ai, wa) in wirtinger(w[0], -1.0) {
        for (aj, wb) in wirtinger(w[1], -1.0) {
            for (bi, wc) in wirtinger(u[0], 1.0) {
                for (bj, wd) in wirtinger(u[1], 1.0) {
                    let key = vec![ai.0, ai.1, aj.0, aj.1, bi.0 + 1, bi.1 + 1, bj.0 + 1, bj.1 + 1];
                    out.push((key, wa * wb * wc * wd * norm));
                }
            }
        }
    }
    out
}

/// `⟨u|H_e|w⟩ = i π² √(u! w!) · coef(α^w β̄^u)`.
fn matrix_elements(table: &DerivativeTable, d: usize) -> Result<MatrixElementTable> {
    let mut out = MatrixElementTable::zeros(d);
    for ui in 0..=d {
        for uj in 0..=d {
            for wi in 0..=d {
                for wj in 0..=d {
                    let mut coef = C64::new(0.0, 0.0);
                    for (key, g) in coefficient_terms([wi, wj], [ui, uj]) {
                        let v = table
                            .get(&key)
                            .ok_or_else(|| Error::DegreeMismatch(format!("missing derivative {key:?}")))?;
                        coef += g * *v;
                    }
                    let f = (factorial(ui as u32) * factorial(uj as u32) * factorial(wi as u32) * factorial(wj as u32)).sqrt();
                    out.set(ui, uj, wi, wj, C64::new(0.0, PI * PI * f) * coef);
                }
            }
        }
    }
    Ok(out)
}

/// Time derivative, offset subtraction, `(α, β)` derivatives and matrix
/// element back-substitution for every edge of the table.
pub fn refined_reconstruct(table: &EstimateTable, plan: &RefinedPlan) -> Result<CoefficientEstimate> {
    if !table.is_complete() {
        return Err(Error::InvalidArgument("estimate table has unpopulated entries".into()));
    }
    let rule = plan.time_rule()?;
    let alphas = plan.alpha_net();
    let nb = plan.beta_pairs().len().pow(2);
    if table.n_alpha != alphas.len() || table.n_time != rule.times.len() || table.n_beta != nb {
        return Err(Error::InvalidArgument("table shape does not match the plan".into()));
    }
    let offsets: Vec<Vec<f64>> = alphas
        .par_iter()
        .map(|&a| dissipator_offset(plan, a))
        .collect::<Result<_>>()?;
    let grid = plan.grid();
    let mut lambda = Vec::with_capacity(table.edges.len());
    for e in 0..table.edges.len() {
        let mut values = Vec::with_capacity(alphas.len() * nb);
        for (a, off) in offsets.iter().enumerate() {
            let slices: Vec<&[f64]> = (0..rule.times.len()).map(|t| table.beta_slice(e, a, t)).collect();
            for b in 0..nb {
                let series: Vec<f64> = slices.iter().map(|s| s[b]).collect();
                values.push(rule.apply(&series) - off[b]);
            }
        }
        let ders = poly_derivatives_from_values(&grid, &values).map_err(Error::at("derivatives"))?;
        let me = matrix_elements(&ders, plan.d)?;
        lambda.push(lambda_from_matrix_elements(&me, plan.d)?);
    }
    Ok(CoefficientEstimate {
        edges: table.edges.clone(),
        lambda,
        protocol: "refined".into(),
    })
}

/// Worst-case `λ` error per unit error of one table entry.
pub fn refined_sensitivity(plan: &RefinedPlan) -> Result<f64> {
    let grid = plan.grid();
    let rule = plan.time_rule()?;
    let d = plan.d;
    let mut worst: f64 = 0.0;
    for ui in 0..=d {
        for uj in 0..=d {
            for wi in 0..=d {
                for wj in 0..=d {
                    let mut s = 0.0;
                    for (key, g) in coefficient_terms([wi, wj], [ui, uj]) {
                        s += g.norm() * grid.entry_l1(&key)?;
                    }
                    let f = (factorial(ui as u32) * factorial(uj as u32) * factorial(wi as u32) * factorial(wj as u32)).sqrt();
                    worst = worst.max(PI * PI * f * s);
                }
            }
        }
    }
    let time_l1: f64 = rule.weights.iter().map(|w| w.abs()).sum();
    Ok(worst * time_l1 * lambda_condition_factor(d))
}

/// Runs the pipeline on exact tables with `H = 0` and fails if any `|λ̂|`
/// exceeds the plan tolerance. Returns the largest `|λ̂|`.
pub fn offset_self_check(plan: &RefinedPlan, graph: &LatticeGraph, basis: &FockBasis) -> Result<f64> {
    let h = HamiltonianSpec::zero(graph.clone(), plan.d);
    let (table, _) = refined_estimates(plan, &h, basis, EstimateSource::Exact)?;
    let est = refined_reconstruct(&table, plan)?;
    let residual = est.lambda.iter().map(EdgeCoefficients::max_abs).fold(0.0, f64::max);
    if residual > plan.offset_tol {
        return Err(Error::OffsetMismatch {
            residual,
            tol: plan.offset_tol,
        });
    }
    Ok(residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::matrix_element_table;
    use crate::poly::Poly;

    #[test]
    fn wirtinger_weights() {
        // ∂_z̄ = ½(∂_x + i∂_y)
        let w = wirtinger(1, 1.0);
        assert_eq!(w[0].0, (0, 1));
        assert!((w[0].1 - C64::new(0.0, 0.5)).norm() < 1e-15);
        assert!((w[1].1 - C64::new(0.5, 0.0)).norm() < 1e-15);
        // ∂_z² z² = 2 through x² - y² + 2ixy
        let f = |(rx, ry): (u8, u8)| match (rx, ry) {
            (2, 0) => C64::new(2.0, 0.0),
            (0, 2) => C64::new(-2.0, 0.0),
            (1, 1) => C64::new(0.0, 2.0),
            _ => C64::new(0.0, 0.0),
        };
        let v: C64 = wirtinger(2, -1.0).into_iter().map(|(k, w)| w * f(k)).sum();
        assert!((v - C64::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn vacuum_offset_vanishes_without_amplitude() {
        let plan = RefinedPlan::new(1, 4);
        let off = dissipator_offset(&plan, [C64::new(0.0, 0.0); 2]).unwrap();
        assert!(off.iter().all(|v| v.abs() < 1e-15));
    }

    /// Box table of a pure first-order signal `-i[H, ψψ†]`, integrated
    /// symbolically; its derivatives must return the matrix elements.
    #[test]
    fn matrix_elements_from_synthetic_table() {
        let plan = RefinedPlan::new(1, 4);
        let mut c = EdgeCoefficients::zeros(1);
        c.set_hermitian(0, 1, 1, 0, C64::new(0.3, 0.2));
        c.set_hermitian(1, 1, 0, 1, C64::new(-0.1, 0.0));
        c.set_hermitian(1, 0, 1, 1, C64::new(0.05, -0.07));
        let c = c.symmetrized();
        let m = plan.m;
        let cut = m + plan.d;
        let me = matrix_element_table(&c, cut).unwrap();
        let n = 8;
        let a = [Poly::complex_var(n, 0, 1), Poly::complex_var(n, 2, 3)];
        let ac = [Poly::conj_var(n, 0, 1), Poly::conj_var(n, 2, 3)];
        let b = [Poly::complex_var(n, 4, 5), Poly::complex_var(n, 6, 7)];
        let bc = [Poly::conj_var(n, 4, 5), Poly::conj_var(n, 6, 7)];
        let inv = |k: usize| C64::new(1.0 / factorial(k as u32).sqrt(), 0.0);
        let states: Vec<(usize, usize)> = (0..=cut).flat_map(|x| (0..=cut).map(move |y| (x, y))).collect();
        let psi = |x: usize, y: usize, conj: bool| -> Poly {
            if x > m || y > m {
                return Poly::zero(n);
            }
            let s = if conj { &ac } else { &a };
            (&s[0].pow(x as u32) * &s[1].pow(y as u32)).scale(inv(x) * inv(y))
        };
        let hpsi = |x: usize, y: usize, conj: bool| -> Poly {
            let mut acc = Poly::zero(n);
            for &(v, w) in &states {
                let h = me.get(x, y, v, w);
                acc = acc + psi(v, w, conj).scale(if conj { h.conj() } else { h });
            }
            acc
        };
        let i = C64::new(0.0, 1.0);
        let mut dens = Poly::zero(n);
        for &(u0, u1) in &states {
            let left = (&bc[0].pow(u0 as u32) * &bc[1].pow(u1 as u32)).scale(inv(u0) * inv(u1));
            let (hl, pl) = (hpsi(u0, u1, false), psi(u0, u1, false));
            for &(v0, v1) in &states {
                let right = (&b[0].pow(v0 as u32) * &b[1].pow(v1 as u32)).scale(inv(v0) * inv(v1));
                let x = (&hl * &psi(v0, v1, true)).scale(-i) + (&pl * &hpsi(v0, v1, true)).scale(i);
                dens = dens + &(&left * &x) * &right;
            }
        }
        let table_poly = dens.scale(C64::new(1.0 / (PI * PI), 0.0)).integrate_from_zero(&[4, 5, 6, 7]);
        let grid = plan.grid();
        let values: Vec<f64> = grid.points().iter().map(|p| table_poly.eval(p).re).collect();
        let ders = poly_derivatives_from_values(&grid, &values).unwrap();
        let got = matrix_elements(&ders, 1).unwrap();
        for u in 0..=1 {
            for u2 in 0..=1 {
                for v in 0..=1 {
                    for v2 in 0..=1 {
                        let diff = (got.get(u, u2, v, v2) - me.get(u, u2, v, v2)).norm();
                        assert!(diff < 1e-8, "{u}{u2}{v}{v2}: {diff}");
                    }
                }
            }
        }
        assert!(lambda_from_matrix_elements(&got, 1).unwrap().max_diff(&c) < 1e-8);
    }
}
