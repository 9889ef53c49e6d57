//! Polynomial recovery from noisy evaluations and derivative estimation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fock::{factorial, C64};
use crate::poly::Poly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Monomial,
    Chebyshev,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnivariatePoly {
    pub basis: Basis,
    pub coeffs: Vec<f64>,
}

/// `T_0..T_n` at `x`.
fn chebyshev_values(x: f64, n: usize) -> Vec<f64> {
    let mut t = vec![1.0; n + 1];
    if n >= 1 {
        t[1] = x;
    }
    for k in 2..=n {
        t[k] = 2.0 * x * t[k - 1] - t[k - 2];
    }
    t
}

/// Monomial coefficients of `T_0..T_n`, row `k` holding `T_k`.
fn chebyshev_monomials(n: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; n + 1]; n + 1];
    rows[0][0] = 1.0;
    if n >= 1 {
        rows[1][1] = 1.0;
    }
    for k in 2..=n {
        for i in 0..=n {
            let shifted = if i > 0 { 2.0 * rows[k - 1][i - 1] } else { 0.0 };
            rows[k][i] = shifted - rows[k - 2][i];
        }
    }
    rows
}

impl UnivariatePoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.basis {
            Basis::Monomial => self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            Basis::Chebyshev => chebyshev_values(x, self.degree())
                .iter()
                .zip(&self.coeffs)
                .map(|(t, c)| t * c)
                .sum(),
        }
    }

    pub fn to_monomial(&self) -> UnivariatePoly {
        match self.basis {
            Basis::Monomial => self.clone(),
            Basis::Chebyshev => {
                let rows = chebyshev_monomials(self.degree());
                let mut out = vec![0.0; self.coeffs.len()];
                for (k, c) in self.coeffs.iter().enumerate() {
                    for (i, r) in rows[k].iter().enumerate() {
                        out[i] += c * r;
                    }
                }
                UnivariatePoly { basis: Basis::Monomial, coeffs: out }
            }
        }
    }

    /// `k`-th derivative at `x`.
    pub fn derivative_at(&self, x: f64, k: usize) -> f64 {
        let m = self.to_monomial();
        m.coeffs
            .iter()
            .enumerate()
            .skip(k)
            .map(|(i, c)| c * factorial(i as u32) / factorial((i - k) as u32) * x.powi((i - k) as i32))
            .sum()
    }
}

/// Rows of `(point, value, noise bound)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NoisyEvaluationTable {
    pub rows: Vec<(Vec<f64>, f64, f64)>,
}

impl NoisyEvaluationTable {
    pub fn univariate(xs: &[f64], ys: &[f64], sigma: f64) -> Self {
        Self {
            rows: xs.iter().zip(ys).map(|(&x, &y)| (vec![x], y, sigma)).collect(),
        }
    }
}

/// Midpoints of the `n` Chebyshev arcs, `x_j = cos(π(j - ½)/n)`, descending.
pub fn chebyshev_arc_nodes(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|j| (std::f64::consts::PI * (j as f64 - 0.5) / n as f64).cos())
        .collect()
}

/// Checks that the points occupy the `n` arcs `[cos(πj/n), cos(π(j-1)/n)]` once each.
pub fn check_arc_coverage(xs: &[f64]) -> Result<()> {
    let n = xs.len();
    if n == 0 {
        return Err(Error::NodePlacement("no nodes".into()));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let slack = 1e-12;
    for (j0, &x) in sorted.iter().enumerate() {
        let j = (j0 + 1) as f64;
        let lo = (std::f64::consts::PI * j / n as f64).cos();
        let hi = (std::f64::consts::PI * (j - 1.0) / n as f64).cos();
        if x < lo - slack || x > hi + slack {
            return Err(Error::NodePlacement(format!("node {x} outside arc {j} [{lo}, {hi}]")));
        }
    }
    Ok(())
}

/// Least-squares map from values at `xs` to Chebyshev coefficients of degree `degree`.
fn cheb_lsq_operator(xs: &[f64], degree: usize) -> Result<DMatrix<f64>> {
    if xs.len() < degree + 1 {
        return Err(Error::NodePlacement(format!(
            "{} nodes cannot determine degree {degree}",
            xs.len()
        )));
    }
    let v = DMatrix::from_fn(xs.len(), degree + 1, |i, k| chebyshev_values(xs[i], degree)[k]);
    v.pseudo_inverse(1e-13).map_err(|e| Error::Singular(e.to_string()))
}

/// Degree-`degree` least-squares fit in the Chebyshev basis on `[-1, 1]`.
pub fn robust_cheb_fit(table: &NoisyEvaluationTable, degree: usize) -> Result<UnivariatePoly> {
    let xs: Vec<f64> = table.rows.iter().map(|r| r.0[0]).collect();
    check_arc_coverage(&xs)?;
    let ys = DVector::from_iterator(xs.len(), table.rows.iter().map(|r| r.1));
    let c = cheb_lsq_operator(&xs, degree)? * ys;
    Ok(UnivariatePoly {
        basis: Basis::Chebyshev,
        coeffs: c.iter().copied().collect(),
    })
}

/// `T_D^{(k)}(1) = D²(D²-1)⋯(D²-(k-1)²) / (1·3⋯(2k-1))`.
pub fn markov_factor(d: usize, k: usize) -> Result<f64> {
    if k > d {
        return Err(Error::InvalidArgument(format!("derivative order {k} exceeds degree {d}")));
    }
    let d2 = (d * d) as f64;
    Ok((0..k).map(|i| (d2 - (i * i) as f64) / (2 * i + 1) as f64).product())
}

/// Interpolant with the log-magnitude of its generalized Vandermonde determinant.
#[derive(Debug, Clone)]
pub struct Interpolant {
    pub poly: Poly,
    pub log10_abs_det: f64,
}

/// Exponents with total degree `≤ n` in `m` variables.
pub fn total_degree_exponents(m: usize, n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; m];
    fn rec(v: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if v == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[v] = e as u8;
            rec(v + 1, left - e, cur, out);
        }
        cur[v] = 0;
    }
    rec(0, n, &mut cur, &mut out);
    out
}

/// Exponents bounded per variable.
pub fn tensor_exponents(degrees: &[usize]) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for &d in degrees {
        out = out
            .into_iter()
            .flat_map(|p: Vec<u8>| {
                (0..=d).map(move |e| {
                    let mut q = p.clone();
                    q.push(e as u8);
                    q
                })
            })
            .collect();
    }
    out
}

/// Interpolation points for a lower exponent set: exponent `ν` maps to the
/// point whose `v`-th coordinate is the `ν_v`-th Chebyshev node of variable
/// `v` (with `max ν_v + 1` nodes), scaled by `scales[v]`.
pub fn lower_set_points(exponents: &[Vec<u8>], scales: &[f64]) -> Vec<Vec<f64>> {
    let m = scales.len();
    let maxes: Vec<usize> = (0..m)
        .map(|v| exponents.iter().map(|e| e[v] as usize).max().unwrap_or(0))
        .collect();
    let nodes: Vec<Vec<f64>> = maxes.iter().map(|&d| chebyshev_arc_nodes(d + 1)).collect();
    exponents
        .iter()
        .map(|e| (0..m).map(|v| scales[v] * nodes[v][e[v] as usize]).collect())
        .collect()
}

/// Factorized generalized Vandermonde system for repeated solves.
pub struct InterpolationSystem {
    exponents: Vec<Vec<u8>>,
    lu: nalgebra::linalg::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    pub log10_abs_det: f64,
}

impl InterpolationSystem {
    pub fn new(points: &[Vec<f64>], exponents: &[Vec<u8>]) -> Result<Self> {
        let rho = exponents.len();
        if points.len() != rho {
            return Err(Error::InvalidArgument(format!("need exactly {rho} points, got {}", points.len())));
        }
        let v = DMatrix::from_fn(rho, rho, |i, j| {
            exponents[j]
                .iter()
                .zip(&points[i])
                .map(|(&k, &x)| x.powi(k as i32))
                .product::<f64>()
        });
        let lu = v.lu();
        let diag = lu.u().diagonal();
        let scale = diag.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if diag.iter().any(|x| x.abs() <= 1e-14 * scale.max(1e-300)) {
            return Err(Error::Singular("generalized Vandermonde determinant vanishes".into()));
        }
        let log10_abs_det = diag.iter().map(|x| x.abs().log10()).sum();
        Ok(Self {
            exponents: exponents.to_vec(),
            lu,
            log10_abs_det,
        })
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn solve(&self, values: &[f64]) -> Result<Poly> {
        if values.len() != self.len() {
            return Err(Error::InvalidArgument(format!("need {} values, got {}", self.len(), values.len())));
        }
        let c = self
            .lu
            .solve(&DVector::from_column_slice(values))
            .ok_or_else(|| Error::Singular("interpolation system".into()))?;
        let m = self.exponents.first().map_or(0, |e| e.len());
        let mut poly = Poly::zero(m);
        for (e, &ci) in self.exponents.iter().zip(c.iter()) {
            poly.add_term(e.clone(), C64::new(ci, 0.0));
        }
        Ok(poly)
    }
}

/// Solves the generalized Vandermonde system for the given exponent set.
pub fn interpolate(points: &[Vec<f64>], values: &[f64], exponents: &[Vec<u8>]) -> Result<Interpolant> {
    if values.len() != exponents.len() {
        return Err(Error::InvalidArgument(format!(
            "need exactly {} values, got {}",
            exponents.len(),
            values.len()
        )));
    }
    let sys = InterpolationSystem::new(points, exponents)?;
    Ok(Interpolant {
        poly: sys.solve(values)?,
        log10_abs_det: sys.log10_abs_det,
    })
}

/// Total-degree Lagrange interpolation through `C(n+m, n)` points.
pub fn lagrange_multivariate(points: &[Vec<f64>], values: &[f64], m: usize, n: usize) -> Result<Interpolant> {
    interpolate(points, values, &total_degree_exponents(m, n))
}

/// Derivatives `∂^{i_1..i_a} f(0)` keyed by multi-index.
pub type DerivativeTable = BTreeMap<Vec<u8>, f64>;

/// Grid layout for [`poly_derivatives_with`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeGrid {
    /// Degree bound per variable.
    pub degrees: Vec<usize>,
    /// Nodes per variable.
    pub nodes: Vec<usize>,
    /// Half-width of the domain per variable (nodes live on `[-s, s]`).
    pub scales: Vec<f64>,
    pub k_max: usize,
}

impl DerivativeGrid {
    /// Equal degree `m` in `a` variables on `[-1, 1]^a` with `4m` nodes each.
    pub fn uniform(a: usize, m: usize, k_max: usize) -> Self {
        Self {
            degrees: vec![m; a],
            nodes: vec![4 * m.max(1); a],
            scales: vec![1.0; a],
            k_max,
        }
    }

    pub fn arity(&self) -> usize {
        self.degrees.len()
    }

    pub fn axis_points(&self, v: usize) -> Vec<f64> {
        chebyshev_arc_nodes(self.nodes[v]).into_iter().map(|x| x * self.scales[v]).collect()
    }

    /// All grid points, last variable fastest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = (0..self.arity()).map(|v| self.axis_points(v)).collect();
        let mut out = vec![vec![]];
        for ax in &axes {
            out = out
                .into_iter()
                .flat_map(|p: Vec<f64>| {
                    ax.iter().map(move |&x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        out
    }

    /// Linear map from node values along variable `v` to derivatives
    /// `0..=k_max` at zero.
    pub fn axis_operator(&self, v: usize) -> Result<DMatrix<f64>> {
        let deg = self.degrees[v];
        let xs = chebyshev_arc_nodes(self.nodes[v]);
        let fit = cheb_lsq_operator(&xs, deg)?;
        let mono = chebyshev_monomials(deg);
        let s = self.scales[v];
        Ok(DMatrix::from_fn(self.k_max + 1, self.nodes[v], |k, j| {
            if k > deg {
                return 0.0;
            }
            let ck: f64 = (0..=deg).map(|c| mono[c][k] * fit[(c, j)]).sum();
            ck * factorial(k as u32) / s.powi(k as i32)
        }))
    }
}

/// Iterated one-variable fits over a tensor grid. `values` follows the order
/// of [`DerivativeGrid::points`].
pub fn poly_derivatives_from_values(grid: &DerivativeGrid, values: &[f64]) -> Result<DerivativeTable> {
    let a = grid.arity();
    let total: usize = grid.nodes.iter().product();
    if values.len() != total {
        return Err(Error::InvalidArgument(format!("expected {total} grid values, got {}", values.len())));
    }
    let mut shape: Vec<usize> = grid.nodes.clone();
    let mut data = values.to_vec();
    for v in 0..a {
        let op = grid.axis_operator(v)?;
        let outer: usize = shape[..v].iter().product();
        let inner: usize = shape[v + 1..].iter().product();
        let n = shape[v];
        let kk = grid.k_max + 1;
        let mut next = vec![0.0; outer * kk * inner];
        for o in 0..outer {
            for i in 0..inner {
                for k in 0..kk {
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += op[(k, j)] * data[(o * n + j) * inner + i];
                    }
                    next[(o * kk + k) * inner + i] = acc;
                }
            }
        }
        shape[v] = kk;
        data = next;
    }
    let mut out = DerivativeTable::new();
    for (idx, e) in tensor_exponents(&vec![grid.k_max; a]).into_iter().enumerate() {
        out.insert(e, data[idx]);
    }
    Ok(out)
}

impl DerivativeGrid {
    /// ℓ1 norm of the linear functional giving the derivative of the given
    /// orders from grid values.
    pub fn entry_l1(&self, orders: &[u8]) -> Result<f64> {
        let mut total = 1.0;
        for (v, &k) in orders.iter().enumerate() {
            let op = self.axis_operator(v)?;
            total *= op.row(k as usize).iter().map(|x| x.abs()).sum::<f64>();
        }
        Ok(total)
    }
}

pub fn poly_derivatives_with(grid: &DerivativeGrid, oracle: impl Fn(&[f64]) -> f64) -> Result<DerivativeTable> {
    let values: Vec<f64> = grid.points().iter().map(|p| oracle(p)).collect();
    poly_derivatives_from_values(grid, &values)
}

/// All derivatives of order `≤ k_max` per variable at the origin of
/// `[-1, 1]^a`, for a degree-`m` oracle.
pub fn poly_derivatives(oracle: impl Fn(&[f64]) -> f64, a: usize, m: usize, k_max: usize) -> Result<DerivativeTable> {
    poly_derivatives_with(&DerivativeGrid::uniform(a, m, k_max), oracle)
}

/// `(3·2^{2k-1}·M^{2k})^a`.
pub fn poly_derivative_bound(m: usize, k_max: usize, a: usize) -> f64 {
    let k = k_max.max(1) as i32;
    (3.0 * 2f64.powi(2 * k - 1) * (m as f64).powi(2 * k)).powi(a as i32)
}

/// Sampling times and weights for `f'(0)` from values on `τ·[b₁, b₂]`,
/// `b₁ = M⁻²`, `b₂ = 2 + b₁`, with Chebyshev arcs mapped affinely onto the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeDerivativeRule {
    pub degree: usize,
    pub tau: f64,
    pub times: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TimeDerivativeRule {
    pub fn new(degree: usize, nodes: usize, tau: f64) -> Result<Self> {
        if degree == 0 || tau <= 0.0 {
            return Err(Error::InvalidArgument("time rule needs degree >= 1 and tau > 0".into()));
        }
        let b1 = 1.0 / (degree * degree) as f64;
        let us = chebyshev_arc_nodes(nodes);
        let fit = cheb_lsq_operator(&us, degree)?;
        // f(t) = p(t/τ - b₁ - 1), so f'(0) = p'(-1 - b₁)/τ
        let u0 = -1.0 - b1;
        let mono = chebyshev_monomials(degree);
        let dmono: Vec<f64> = (0..=degree)
            .map(|c| (1..=degree).map(|i| mono[c][i] * i as f64 * u0.powi(i as i32 - 1)).sum())
            .collect();
        let weights = (0..nodes)
            .map(|j| (0..=degree).map(|c| dmono[c] * fit[(c, j)]).sum::<f64>() / tau)
            .collect();
        let times = us.iter().map(|u| tau * (u + 1.0 + b1)).collect();
        Ok(Self { degree, tau, times, weights })
    }

    pub fn default_for(degree: usize, tau: f64) -> Result<Self> {
        Self::new(degree, 4 * degree, tau)
    }

    pub fn apply(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// `3eM²σ/τ`.
    pub fn error_bound(&self, sigma: f64) -> f64 {
        3.0 * std::f64::consts::E * (self.degree * self.degree) as f64 * sigma / self.tau
    }
}

/// `f'(0)` from a degree-`degree` oracle sampled on `[b₁, b₂]`.
pub fn derivative_at_zero_time(oracle: impl Fn(f64) -> f64, degree: usize) -> Result<f64> {
    let rule = TimeDerivativeRule::default_for(degree, 1.0)?;
    let vals: Vec<f64> = rule.times.iter().map(|&t| oracle(t)).collect();
    Ok(rule.apply(&vals))
}

/// Same estimate from explicit samples, checking node placement.
pub fn derivative_at_zero_time_from(times: &[f64], values: &[f64], degree: usize) -> Result<f64> {
    if degree == 0 {
        return Err(Error::InvalidArgument("degree must be >= 1".into()));
    }
    let b1 = 1.0 / (degree * degree) as f64;
    let us: Vec<f64> = times.iter().map(|t| t - 1.0 - b1).collect();
    check_arc_coverage(&us)?;
    let table = NoisyEvaluationTable::univariate(&us, values, 0.0);
    let p = robust_cheb_fit(&table, degree)?;
    Ok(p.derivative_at(-1.0 - b1, 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn line_through_two_points() {
        let it = lagrange_multivariate(&[vec![0.0], vec![1.0]], &[1.0, 3.0], 1, 1).unwrap();
        assert!((it.poly.coefficient(&[0]).re - 1.0).abs() < 1e-14);
        assert!((it.poly.coefficient(&[1]).re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn multivariate_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (m, n) = (3, 4);
        let exps = total_degree_exponents(m, n);
        assert_eq!(exps.len(), 35);
        let truth: Vec<f64> = exps.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        let pts = lower_set_points(&exps, &[1.0; 3]);
        let vals: Vec<f64> = pts
            .iter()
            .map(|p| {
                exps.iter()
                    .zip(&truth)
                    .map(|(e, c)| c * e.iter().zip(p).map(|(&k, &x)| x.powi(k as i32)).product::<f64>())
                    .sum()
            })
            .collect();
        let it = lagrange_multivariate(&pts, &vals, m, n).unwrap();
        for (e, c) in exps.iter().zip(&truth) {
            assert!((it.poly.coefficient(e).re - c).abs() < 1e-8);
        }
        let zero = lagrange_multivariate(&pts, &vec![0.0; 35], m, n).unwrap();
        assert!(zero.poly.terms().all(|(_, c)| c.norm() == 0.0));
        let dup = vec![vec![0.5]; 2];
        assert!(matches!(lagrange_multivariate(&dup, &[1.0, 1.0], 1, 1), Err(Error::Singular(_))));
    }

    #[test]
    fn markov_values() {
        assert_eq!(markov_factor(2, 1).unwrap(), 4.0);
        assert_eq!(markov_factor(2, 2).unwrap(), 4.0);
        assert_eq!(markov_factor(1, 1).unwrap(), 1.0);
        assert!(markov_factor(1, 2).is_err());
        for d in 1..=12 {
            let mut c = vec![0.0; d + 1];
            c[d] = 1.0;
            let t = UnivariatePoly { basis: Basis::Chebyshev, coeffs: c };
            for k in 1..=d {
                let exact = t.derivative_at(1.0, k);
                let f = markov_factor(d, k).unwrap();
                assert!((exact - f).abs() <= 1e-9 * f.abs().max(1.0), "d={d} k={k}");
            }
        }
    }

    #[test]
    fn cheb_fit_noiseless_and_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let coeffs: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = UnivariatePoly { basis: Basis::Monomial, coeffs };
        let xs = chebyshev_arc_nodes(32);
        let ys: Vec<f64> = xs.iter().map(|&x| p.eval(x)).collect();
        let fit = robust_cheb_fit(&NoisyEvaluationTable::univariate(&xs, &ys, 0.0), 8).unwrap();
        for i in 0..=100 {
            let x = -1.0 + i as f64 / 50.0;
            assert!((fit.eval(x) - p.eval(x)).abs() < 1e-9);
        }
        let sigma = 1e-3;
        let ys: Vec<f64> = xs.iter().map(|_| 0.7 + rng.random_range(-sigma..sigma)).collect();
        let fit = robust_cheb_fit(&NoisyEvaluationTable::univariate(&xs, &ys, sigma), 0).unwrap();
        assert!((fit.eval(0.3) - 0.7).abs() <= sigma);
        assert!(robust_cheb_fit(&NoisyEvaluationTable::univariate(&[0.1, 0.2], &[0.0, 0.0], 0.0), 1).is_err());
    }

    #[test]
    fn time_derivative_linear_and_constant() {
        let d = derivative_at_zero_time(|t| 0.5 - 1.25 * t, 3).unwrap();
        assert!((d + 1.25).abs() < 1e-9);
        let c = derivative_at_zero_time(|_| 2.0, 3).unwrap();
        assert!(c.abs() < 1e-9);
        let rule = TimeDerivativeRule::default_for(3, 1.0).unwrap();
        let vals: Vec<f64> = rule.times.iter().map(|t| t * t * t - t).collect();
        let d2 = derivative_at_zero_time_from(&rule.times, &vals, 3).unwrap();
        assert!((d2 + 1.0).abs() < 1e-9);
        let scaled = TimeDerivativeRule::default_for(3, 0.01).unwrap();
        let vals: Vec<f64> = scaled.times.iter().map(|t| 2.0 * t + 30.0 * t * t).collect();
        assert!((scaled.apply(&vals) - 2.0).abs() < 1e-8);
    }

    #[test]
    fn derivatives_of_zero_and_exact_polynomial() {
        let zero = poly_derivatives(|_| 0.0, 2, 3, 2).unwrap();
        assert!(zero.values().all(|v| *v == 0.0));
        // f = 1 + 2x - y² + 3x²y
        let f = |p: &[f64]| 1.0 + 2.0 * p[0] - p[1] * p[1] + 3.0 * p[0] * p[0] * p[1];
        let t = poly_derivatives(f, 2, 3, 2).unwrap();
        assert!((t[&vec![0, 0]] - 1.0).abs() < 1e-9);
        assert!((t[&vec![1, 0]] - 2.0).abs() < 1e-9);
        assert!((t[&vec![0, 2]] + 2.0).abs() < 1e-9);
        assert!((t[&vec![2, 1]] - 6.0).abs() < 1e-9);
        assert!(t[&vec![1, 1]].abs() < 1e-9);
    }
}
