//! Numerical checks of moment growth, locality, product-formula rate and
//! the operator-norm and Sobolev bounds.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{build_liouvillian, evolve, evolve_times, trotter_evolve, EvolveOptions, Liouvillian, Variant};
use crate::error::{Error, Result};
use crate::fock::{annihilation_op, factorial, number_moment, CMat, FockBasis, TruncationSpec, C64};
use crate::lattice::{build_edge_hamiltonian, DissipatorSpec, HamiltonianSpec};
use crate::linalg::{op_norm, trace_norm_hermitian};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub label: String,
    pub param: f64,
    pub measured: f64,
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub name: String,
    pub parameter: String,
    pub rows: Vec<SweepRow>,
    /// Derived scalars (fitted rates, slopes, leakage).
    pub summary: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl SweepResult {
    fn new(name: &str, parameter: &str) -> Self {
        Self {
            name: name.into(),
            parameter: parameter.into(),
            rows: Vec::new(),
            summary: BTreeMap::new(),
            notes: Vec::new(),
            pass: true,
        }
    }

    fn push(&mut self, label: &str, param: f64, measured: f64, bound: Option<f64>) {
        self.rows.push(SweepRow {
            label: label.into(),
            param,
            measured,
            bound,
        });
    }

    /// Whether every bounded row satisfies `measured <= bound`.
    pub fn within_bounds(&self) -> bool {
        self.rows.iter().all(|r| r.bound.is_none_or(|b| r.measured <= b))
    }

    pub fn measured(&self, label: &str) -> Vec<f64> {
        self.rows.iter().filter(|r| r.label == label).map(|r| r.measured).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["check", "label", &self.parameter, "measured", "bound"])?;
        for r in &self.rows {
            w.write_record([
                self.name.clone(),
                r.label.clone(),
                format!("{}", r.param),
                format!("{:e}", r.measured),
                r.bound.map_or(String::new(), |b| format!("{b:e}")),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// `⌈2kd/(k-d) + 2⌉`, the dissipation power needed for `k`-th moments.
pub fn moment_power(k: u32, d: usize) -> Result<u32> {
    if k as usize <= d {
        return Err(Error::InvalidArgument(format!("moment order k = {k} must exceed d = {d}")));
    }
    let (k, d) = (k as f64, d as f64);
    Ok((2.0 * k * d / (k - d) + 2.0).ceil() as u32)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentCheck {
    pub k: u32,
    pub times: Vec<f64>,
    pub region: Vec<usize>,
    /// Allowed rate in units of `k|R| ln(k|R|)`.
    pub rate_multiple: f64,
    /// Largest boundary weight accepted as truncation-converged.
    pub leakage_tol: f64,
    /// Evolve without jump operators (the comparison run).
    pub dissipation: bool,
}

/// `M_R^{(k)}(t)` along the time grid and its fitted exponential rate.
pub fn check_moment_stability(
    h: &HamiltonianSpec,
    dspec: &DissipatorSpec,
    basis: &FockBasis,
    rho0: &CMat,
    cfg: &MomentCheck,
    opts: &EvolveOptions,
) -> Result<SweepResult> {
    if cfg.dissipation {
        let need = moment_power(cfg.k, h.d)?;
        if dspec.p < need {
            return Err(Error::InvalidArgument(format!("p = {} below the moment condition {need}", dspec.p)));
        }
    }
    let mut l = build_liouvillian(h, dspec, basis, Variant::Full)?;
    if !cfg.dissipation {
        l = l.without_dissipation();
    }
    let res = evolve_times(rho0, &l, &cfg.times, opts)?;
    let name = if cfg.dissipation { "moments" } else { "moments_undamped" };
    let mut out = SweepResult::new(name, "t");
    let mut logs = Vec::with_capacity(res.len());
    let mut leak: f64 = 0.0;
    for (t, r) in cfg.times.iter().zip(&res) {
        let m = number_moment(&r.rho, basis, &cfg.region, cfg.k)?;
        logs.push(m.ln());
        leak = leak.max(basis.boundary_weight(&r.rho));
        out.push("moment", *t, m, None);
    }
    let rate = fit_slope(&cfg.times, &logs);
    let kr = (cfg.k as usize * cfg.region.len()) as f64;
    let allowed = cfg.rate_multiple * kr * kr.ln();
    out.summary.insert("rate".into(), rate);
    out.summary.insert("allowed_rate".into(), allowed);
    out.summary.insert("max_leakage".into(), leak);
    out.push("rate", cfg.k as f64, rate, Some(allowed));
    let converged = leak <= cfg.leakage_tol;
    if !converged {
        out.notes.push(format!("truncation not converged: boundary weight {leak:.2e}"));
    }
    out.pass = converged && rate <= allowed && rate.is_finite();
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalityCheck {
    pub edge: usize,
    pub t: f64,
    pub max_dim: usize,
    /// Slack on monotonicity from integrator tolerance.
    pub tol: f64,
}

fn localized_error(
    h: &HamiltonianSpec,
    dspec: &DissipatorSpec,
    basis: &FockBasis,
    rho0: &CMat,
    reference: &CMat,
    cfg: &LocalityCheck,
    radius: usize,
    m_prime: Option<usize>,
    opts: &EvolveOptions,
) -> Result<f64> {
    let region = h.graph.ball_around_edge(cfg.edge, radius);
    let variant = match m_prime {
        Some(m) => Variant::Projected { region, m_prime: m },
        None => Variant::Region(region),
    };
    let l = build_liouvillian(h, dspec, basis, variant)?;
    let (a, b) = h.graph.edges[cfg.edge];
    let local = basis.reduce(&evolve(rho0, &l, cfg.t, opts)?.rho, &[a, b])?.0;
    Ok(trace_norm_hermitian(&(local - reference)))
}

fn reference_state(
    h: &HamiltonianSpec,
    dspec: &DissipatorSpec,
    basis: &FockBasis,
    rho0: &CMat,
    cfg: &LocalityCheck,
    opts: &EvolveOptions,
) -> Result<CMat> {
    if basis.dim() > cfg.max_dim {
        return Err(Error::DimensionOverflow {
            dim: basis.dim(),
            limit: cfg.max_dim,
        });
    }
    let full = build_liouvillian(h, dspec, basis, Variant::Full)?;
    let (a, b) = h.graph.edges[cfg.edge];
    Ok(basis.reduce(&evolve(rho0, &full, cfg.t, opts)?.rho, &[a, b])?.0)
}

/// Edge-reduced distance between full and localized evolution per radius,
/// with an exponential envelope fitted to the sweep.
pub fn check_lr_decay(
    h: &HamiltonianSpec,
    dspec: &DissipatorSpec,
    basis: &FockBasis,
    rho0: &CMat,
    radii: &[usize],
    m_prime: Option<usize>,
    cfg: &LocalityCheck,
    opts: &EvolveOptions,
) -> Result<SweepResult> {
    if (dspec.p as usize) < 2 * h.d + 2 {
        return Err(Error::InvalidArgument(format!("p = {} below 2d + 2", dspec.p)));
    }
    let reference = reference_state(h, dspec, basis, rho0, cfg, opts)?;
    let errs: Vec<f64> = radii
        .par_iter()
        .map(|&r| localized_error(h, dspec, basis, rho0, &reference, cfg, r, m_prime, opts))
        .collect::<Result<_>>()?;
    let mut out = SweepResult::new("lr", "radius");
    let positive: Vec<(f64, f64)> = radii
        .iter()
        .zip(&errs)
        .filter(|(_, e)| **e > 0.0)
        .map(|(r, e)| (*r as f64, e.ln()))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = positive.iter().copied().unzip();
    let (slope, icpt) = if xs.len() >= 2 {
        let s = fit_slope(&xs, &ys);
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        (s, my - s * mx)
    } else {
        (0.0, ys.first().copied().unwrap_or(0.0))
    };
    // the envelope allows one decade of scatter around the fit
    for (&r, &e) in radii.iter().zip(&errs) {
        let env = 10.0 * (icpt + slope * r as f64).exp();
        out.push("error", r as f64, e, Some(env.max(cfg.tol)));
    }
    out.summary.insert("log_slope".into(), slope);
    let monotone = errs.windows(2).all(|w| w[1] <= w[0] + cfg.tol);
    if !monotone {
        out.notes.push("error increases with radius".into());
    }
    out.pass = monotone && out.within_bounds();
    Ok(out)
}

/// Same distance at a fixed radius over a ladder of projection levels.
pub fn check_lr_truncation(
    h: &HamiltonianSpec,
    dspec: &DissipatorSpec,
    basis: &FockBasis,
    rho0: &CMat,
    radius: usize,
    m_primes: &[usize],
    cfg: &LocalityCheck,
    opts: &EvolveOptions,
) -> Result<SweepResult> {
    let reference = reference_state(h, dspec, basis, rho0, cfg, opts)?;
    let errs: Vec<f64> = m_primes
        .par_iter()
        .map(|&m| localized_error(h, dspec, basis, rho0, &reference, cfg, radius, Some(m), opts))
        .collect::<Result<_>>()?;
    let mut out = SweepResult::new("lr_truncation", "m_prime");
    for (&m, &e) in m_primes.iter().zip(&errs) {
        out.push("error", m as f64, e, None);
    }
    out.pass = errs.windows(2).all(|w| w[1] <= w[0] + cfg.tol);
    Ok(out)
}

/// `‖trotter(n) - evolve‖₁` over `ns` with the log-log slope.
pub fn check_trotter_rate(
    h: &HamiltonianSpec,
    dspec: &DissipatorSpec,
    basis: &FockBasis,
    rho0: &CMat,
    t: f64,
    ns: &[usize],
    opts: &EvolveOptions,
) -> Result<SweepResult> {
    if (dspec.p as usize) < 2 * h.d + 2 {
        return Err(Error::InvalidArgument(format!("p = {} below 2d + 2", dspec.p)));
    }
    let full = build_liouvillian(h, dspec, basis, Variant::Full)?;
    let tight = EvolveOptions {
        tol: opts.tol.min(1e-11),
        ..opts.clone()
    };
    let oracle = evolve(rho0, &full, t, &tight)?.rho;
    let errs: Vec<f64> = ns
        .par_iter()
        .map(|&n| Ok(trace_norm_hermitian(&(trotter_evolve(rho0, h, dspec, basis, t, n, &tight)? - &oracle))))
        .collect::<Result<_>>()?;
    let mut out = SweepResult::new("trotter", "n");
    for (&n, &e) in ns.iter().zip(&errs) {
        out.push("error", n as f64, e, None);
    }
    let lx: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ly: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let slope = fit_slope(&lx, &ly);
    out.summary.insert("log_slope".into(), slope);
    let monotone = errs.windows(2).all(|w| w[1] < w[0]);
    out.pass = monotone && (-1.1..=-0.45).contains(&slope);
    Ok(out)
}

/// `L (d+1)⁴ d! (M+1)^{2d}`.
pub fn hamiltonian_norm_bound(l_bound: f64, d: usize, m: usize) -> f64 {
    l_bound * ((d + 1) as f64).powi(4) * factorial(d as u32) * ((m + 1) as f64).powi(2 * d as i32)
}

/// `√(p!) (M+1)^{p/2} + |α|^p`.
pub fn jump_norm_bound(p: u32, m: usize, alpha: C64) -> f64 {
    factorial(p).sqrt() * ((m + 1) as f64).powf(p as f64 / 2.0) + alpha.norm().powi(p as i32)
}

/// Truncated `‖P H_e P‖` for every edge and `‖P L_i‖` for every site, per `M`.
pub fn check_norm_bounds(h: &HamiltonianSpec, dspec: &DissipatorSpec, ms: &[usize]) -> Result<SweepResult> {
    let mut out = SweepResult::new("norms", "M");
    for &m in ms {
        let trunc = TruncationSpec::new(m, 2)?;
        let bound = hamiltonian_norm_bound(h.l_bound, h.d, m);
        for c in &h.coeffs {
            let he = build_edge_hamiltonian(c, &trunc)?;
            out.push("hamiltonian", m as f64, op_norm(&he), Some(bound));
        }
        let single = TruncationSpec::new(m, 1)?;
        let a = annihilation_op(&single);
        let mut ap = CMat::identity(m + 1, m + 1);
        for _ in 0..dspec.p {
            ap = &ap * &a;
        }
        for &al in &dspec.alpha {
            let l = &ap - CMat::identity(m + 1, m + 1) * al.powu(dspec.p);
            out.push("jump", m as f64, op_norm(&l), Some(jump_norm_bound(dspec.p, m, al)));
        }
    }
    out.pass = out.within_bounds();
    Ok(out)
}

/// `Σ_{n≤M} e^{-x} xⁿ/n! (n+1)^k` with `x = |α|²`.
pub fn coherent_moment(alpha: f64, k: u32, m: usize) -> f64 {
    let x = alpha * alpha;
    let mut w = (-x).exp();
    let mut acc = 0.0;
    for n in 0..=m {
        if n > 0 {
            w *= x / n as f64;
        }
        acc += w * ((n + 1) as f64).powi(k as i32);
    }
    acc
}

/// `2^k (k / ln(k/|α|² + 1))^k`, as printed.
pub fn coherent_sobolev_literal(alpha: f64, k: u32) -> f64 {
    let x = alpha * alpha;
    if x == 0.0 {
        return 0.0;
    }
    let k = k as f64;
    2f64.powf(k) * (k / (k / x + 1.0).ln()).powf(k)
}

/// `2^k max(1, (k / ln(k/|α|² + 1))^k)`: the zeroth Poisson moment equals one
/// and dominates for small `|α|`.
pub fn coherent_sobolev_bound(alpha: f64, k: u32) -> f64 {
    let lit = coherent_sobolev_literal(alpha, k);
    lit.max(2f64.powi(k as i32))
}

/// `⟨α|(N+I)^k|α⟩` against the bound for every `(α, k)`; rows are labelled
/// by `k`, parameter `|α|`.
pub fn check_coherent_sobolev(alphas: &[f64], ks: &[u32], m: usize) -> Result<SweepResult> {
    let mut out = SweepResult::new("sobolev", "alpha");
    let mut literal_violations = 0usize;
    for &k in ks {
        for &a in alphas {
            let v = coherent_moment(a, k, m);
            if v > coherent_sobolev_literal(a, k) {
                literal_violations += 1;
            }
            out.push(&format!("k={k}"), a, v, Some(coherent_sobolev_bound(a, k)));
        }
    }
    out.summary.insert("literal_violations".into(), literal_violations as f64);
    out.pass = out.within_bounds();
    Ok(out)
}

/// Liouvillian of a model with its dissipation removed.
pub fn undamped(h: &HamiltonianSpec, basis: &FockBasis) -> Result<Liouvillian> {
    let d = DissipatorSpec::vacuum(1, h.n_modes());
    Ok(build_liouvillian(h, &d, basis, Variant::Full)?.without_dissipation())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{EdgeCoefficients, LatticeGraph};

    fn all_l(d: usize, l: f64) -> EdgeCoefficients {
        let mut c = EdgeCoefficients::zeros(d);
        for [k, a, k2, b] in EdgeCoefficients::admissible(d) {
            c.set(k, a, k2, b, C64::new(l, 0.0));
        }
        c
    }

    #[test]
    fn norm_bounds_hold_and_vanish_at_zero() {
        let g = LatticeGraph::single_edge();
        let h = HamiltonianSpec::new(g.clone(), vec![all_l(1, 0.7)], 1, 0.7).unwrap();
        let r = check_norm_bounds(&h, &DissipatorSpec::vacuum(1, 2), &[2, 4, 6]).unwrap();
        assert!(r.pass);
        let z = HamiltonianSpec::zero(g, 1);
        let r = check_norm_bounds(&z, &DissipatorSpec::vacuum(1, 2), &[3]).unwrap();
        assert_eq!(r.measured("hamiltonian"), vec![0.0]);
        // ‖P a‖ = √M
        assert!((r.measured("jump")[0] - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sobolev_examples() {
        assert_eq!(coherent_moment(0.0, 3, 10), 1.0);
        let v = coherent_moment(1.0, 4, 60);
        assert!((v - 52.0).abs() < 1e-9);
        assert!(v <= coherent_sobolev_bound(1.0, 4));
        let r = check_coherent_sobolev(&[0.0, 0.3, 1.0], &[1, 2, 4], 80).unwrap();
        assert!(r.pass);
        // the printed form alone fails near the vacuum
        assert!(r.summary["literal_violations"] > 0.0);
    }

    #[test]
    fn slope_of_a_line() {
        assert!((fit_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-12);
        assert_eq!(moment_power(2, 1).unwrap(), 6);
        assert!(moment_power(1, 1).is_err());
    }
}
