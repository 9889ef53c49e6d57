//! GKLS generators on truncated Fock spaces and their time evolution.
//!
//! The generator is `L(ρ) = -i[H,ρ] + Σ_j L_j ρ L_j† - ½{L_j†L_j, ρ}` with
//! `L_j = a_j^p - α_j^p`. It is stored in operator form and applied as
//! `Kρ + (Kρ)† + Σ_j L_j ρ L_j†` with `K = -iH - ½ Σ_j L_j†L_j`, which is
//! valid for Hermitian `ρ`.

use nalgebra_sparse::CsrMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{annihilation_op, fock_projector, CMat, FockBasis, Projector, SparseOp, TruncationSpec, C64};
use crate::lattice::{DissipatorSpec, HamiltonianSpec};
use crate::linalg::{expm, hermitize, MaxAbs};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Variant {
    Full,
    /// Edges inside the region and dissipators on its sites.
    Region(Vec<usize>),
    /// Region generator with every operator sandwiched by the projector onto
    /// local levels `≤ m_prime` on the region.
    Projected { region: Vec<usize>, m_prime: usize },
}

#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub basis: FockBasis,
    pub variant: Variant,
    pub hamiltonian: SparseOp,
    pub jumps: Vec<SparseOp>,
    /// Dense single-mode jump operators by site, used by the split-step
    /// integrator on product bases.
    pub site_jumps: Vec<(usize, CMat)>,
    k_eff: SparseOp,
    projector: Option<Projector>,
}

fn single_mode_jump(cutoff: usize, p: u32, alpha: C64) -> CMat {
    let t = TruncationSpec { cutoff, modes: 1 };
    let a = annihilation_op(&t);
    let mut ap = CMat::identity(cutoff + 1, cutoff + 1);
    for _ in 0..p {
        ap = &ap * &a;
    }
    ap - CMat::identity(cutoff + 1, cutoff + 1) * alpha.powu(p)
}

fn sparse_adjoint(m: &SparseOp) -> SparseOp {
    let t = m.transpose();
    let mut out = t.clone();
    for v in out.values_mut() {
        *v = v.conj();
    }
    out
}

fn is_zero(m: &SparseOp) -> bool {
    m.values().iter().all(|v| v.norm() == 0.0)
}

pub fn build_liouvillian(
    h: &HamiltonianSpec,
    dspec: &DissipatorSpec,
    basis: &FockBasis,
    variant: Variant,
) -> Result<Liouvillian> {
    let modes = basis.modes();
    if h.n_modes() != modes || dspec.alpha.len() != modes {
        return Err(Error::InvalidArgument(format!(
            "model has {} modes, dissipator {}, basis {modes}",
            h.n_modes(),
            dspec.alpha.len()
        )));
    }
    let (sites, edges, projector): (Vec<usize>, Vec<usize>, Option<Projector>) = match &variant {
        Variant::Full => ((0..modes).collect(), (0..h.graph.edges.len()).collect(), None),
        Variant::Region(r) => {
            basis.check_sites(r)?;
            (r.clone(), h.graph.edges_within(r), None)
        }
        Variant::Projected { region, m_prime } => {
            basis.check_sites(region)?;
            let p = fock_projector(*m_prime, region, basis)?;
            (region.clone(), h.graph.edges_within(region), Some(p))
        }
    };
    let mut hamiltonian = h.operator(basis, &edges);
    let mut jumps = Vec::new();
    let mut site_jumps = Vec::new();
    for &s in &sites {
        let dense = single_mode_jump(basis.cutoff(s), dspec.p, dspec.alpha[s]);
        let mut op = basis.site_op(s, &dense);
        if let Some(p) = &projector {
            op = p.sandwich_sparse(&op);
        }
        if !is_zero(&op) {
            jumps.push(op);
            site_jumps.push((s, dense));
        }
    }
    if let Some(p) = &projector {
        hamiltonian = p.sandwich_sparse(&hamiltonian);
    }
    let minus_i = C64::new(0.0, -1.0);
    let mut k_eff = &hamiltonian * minus_i;
    for l in &jumps {
        let ldl = &sparse_adjoint(l) * l;
        k_eff = &k_eff - &(&ldl * C64::new(0.5, 0.0));
    }
    Ok(Liouvillian {
        basis: basis.clone(),
        variant,
        hamiltonian,
        jumps,
        site_jumps,
        k_eff,
        projector,
    })
}

impl Liouvillian {
    /// Drops every jump operator, leaving `-i[H, ·]`.
    pub fn without_dissipation(mut self) -> Self {
        self.jumps.clear();
        self.site_jumps.clear();
        self.k_eff = &self.hamiltonian * C64::new(0.0, -1.0);
        self
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn is_projected(&self) -> bool {
        self.projector.is_some()
    }

    /// `L(ρ)` for Hermitian `ρ`.
    pub fn apply(&self, rho: &CMat) -> CMat {
        let kr = &self.k_eff * rho;
        let mut out = &kr + kr.adjoint();
        for l in &self.jumps {
            let x = l * rho;
            let y = l * x.adjoint();
            out += y.adjoint();
        }
        out
    }

    /// `L(X)` for arbitrary `X`.
    pub fn apply_general(&self, x: &CMat) -> CMat {
        let kx = &self.k_eff * x;
        let xk = (&self.k_eff * x.adjoint()).adjoint();
        let mut out = kx + xk;
        for l in &self.jumps {
            let lx = l * x;
            out += (l * lx.adjoint()).adjoint();
        }
        out
    }

    /// Dense superoperator acting on column-major `vec(ρ)`.
    pub fn to_dense(&self) -> CMat {
        let d = self.dim();
        let mut s = CMat::zeros(d * d, d * d);
        let mut e = CMat::zeros(d, d);
        for j in 0..d {
            for i in 0..d {
                e[(i, j)] = C64::new(1.0, 0.0);
                let col = self.apply_general(&e);
                e[(i, j)] = C64::new(0.0, 0.0);
                for (k, v) in col.iter().enumerate() {
                    s[(k, i + j * d)] = *v;
                }
            }
        }
        s
    }

    /// Upper bound on the superoperator norm used for step heuristics.
    pub fn norm_estimate(&self) -> f64 {
        let row_sum = |m: &SparseOp| -> f64 {
            m.row_iter()
                .map(|r| r.values().iter().map(|v| v.norm()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        let mut n = 2.0 * row_sum(&self.k_eff);
        for l in &self.jumps {
            n += row_sum(l) * row_sum(&sparse_adjoint(l));
        }
        n
    }

    fn hamiltonian_is_zero(&self) -> bool {
        is_zero(&self.hamiltonian)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Method {
    /// Expm for tiny spaces, split-step for stiff product-basis problems,
    /// Runge-Kutta otherwise.
    Auto,
    RungeKutta,
    Expm,
    SplitStep,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub method: Method,
    pub tol: f64,
    pub max_steps: usize,
    /// Largest `dim²` for which the dense superoperator exponential is used.
    pub expm_threshold: usize,
    /// `‖L‖·t` above which a product-basis problem counts as stiff.
    pub stiffness_threshold: f64,
    /// Learning cutoff for the leakage report; `None` reports boundary weight.
    pub leakage_cutoff: Option<usize>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            tol: 1e-9,
            max_steps: 2_000_000,
            expm_threshold: 1600,
            stiffness_threshold: 400.0,
            leakage_cutoff: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub rho: CMat,
    /// Weight outside the learning-cutoff subspace (or on the basis boundary).
    pub leakage: f64,
    pub trace_drift: f64,
    pub steps: usize,
    pub method: Method,
}

fn leakage(basis: &FockBasis, rho: &CMat, cutoff: Option<usize>) -> f64 {
    let w = match cutoff {
        Some(m) => (0..basis.dim())
            .filter(|&i| basis.occupation(i).iter().any(|&n| n as usize > m))
            .map(|i| rho[(i, i)].re)
            .sum(),
        None => basis.boundary_weight(rho),
    };
    w.clamp(0.0, 1.0)
}

fn choose_method(l: &Liouvillian, t: f64, opts: &EvolveOptions) -> Method {
    match opts.method {
        Method::Auto => {
            let d = l.dim();
            if d * d <= opts.expm_threshold {
                Method::Expm
            } else if l.basis.is_product() && l.projector.is_none() && l.norm_estimate() * t > opts.stiffness_threshold {
                Method::SplitStep
            } else {
                Method::RungeKutta
            }
        }
        m => m,
    }
}

pub fn evolve(rho0: &CMat, l: &Liouvillian, t: f64, opts: &EvolveOptions) -> Result<EvolutionResult> {
    let mut out = evolve_times(rho0, l, &[t], opts)?;
    Ok(out.pop().expect("one time requested"))
}

/// States at each of the (nondecreasing) times.
pub fn evolve_times(rho0: &CMat, l: &Liouvillian, times: &[f64], opts: &EvolveOptions) -> Result<Vec<EvolutionResult>> {
    if times.iter().any(|&t| t < 0.0 || !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("times must be finite, nonnegative and sorted".into()));
    }
    if rho0.nrows() != l.dim() {
        return Err(Error::InvalidArgument(format!(
            "state dimension {} does not match generator {}",
            rho0.nrows(),
            l.dim()
        )));
    }
    let t_max = times.last().copied().unwrap_or(0.0);
    let method = choose_method(l, t_max, opts);
    let trace0 = rho0.trace().re;
    let raw: Vec<(CMat, usize)> = match method {
        Method::Expm => expm_path(rho0, l, times),
        Method::SplitStep => times
            .iter()
            .map(|&t| split_step_extrapolated(rho0, l, t, opts))
            .collect::<Result<_>>()?,
        _ => rk45(rho0, l, times, opts)?,
    };
    Ok(raw
        .into_iter()
        .map(|(rho, steps)| EvolutionResult {
            leakage: leakage(&l.basis, &rho, opts.leakage_cutoff),
            trace_drift: rho.trace().re - trace0,
            rho,
            steps,
            method,
        })
        .collect())
}

fn expm_path(rho0: &CMat, l: &Liouvillian, times: &[f64]) -> Vec<(CMat, usize)> {
    let d = l.dim();
    let s = l.to_dense();
    let v0 = nalgebra::DVector::from_column_slice(rho0.as_slice());
    times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return (rho0.clone(), 0);
            }
            let v = expm(&(&s * C64::new(t, 0.0))) * &v0;
            (hermitize(&CMat::from_column_slice(d, d, v.as_slice())), 1)
        })
        .collect()
}

const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Dormand-Prince 5(4) with FSAL and Hermitization after every accepted step.
fn rk45(rho0: &CMat, l: &Liouvillian, times: &[f64], opts: &EvolveOptions) -> Result<Vec<(CMat, usize)>> {
    let mut y = rho0.clone();
    let mut t = 0.0;
    let mut h = (0.1 / l.norm_estimate().max(1e-12)).min(times.last().copied().unwrap_or(0.0).max(1e-12));
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(times.len());
    let mut k1 = l.apply(&y);
    for &target in times {
        while t < target {
            if steps >= opts.max_steps {
                return Err(Error::StepBudget { steps, t });
            }
            let last = t + h >= target;
            let step = if last { target - t } else { h };
            let mut ks: Vec<CMat> = Vec::with_capacity(7);
            ks.push(k1.clone());
            for s in 1..7 {
                let mut ys = y.clone();
                for (j, kj) in ks.iter().enumerate() {
                    let a = DP_A[s][j];
                    if a != 0.0 {
                        ys += kj * C64::new(a * step, 0.0);
                    }
                }
                let _ = DP_C[s];
                ks.push(l.apply(&ys));
                if s == 6 {
                    // ys is the fifth-order solution (FSAL)
                    let mut err = CMat::zeros(y.nrows(), y.ncols());
                    for (j, kj) in ks.iter().enumerate() {
                        if DP_E[j] != 0.0 {
                            err += kj * C64::new(DP_E[j] * step, 0.0);
                        }
                    }
                    let scale = opts.tol * (1.0 + ys.max_modulus().max(y.max_modulus()));
                    let ratio = err.max_modulus() / scale;
                    if ratio <= 1.0 {
                        t = if last { target } else { t + step };
                        y = hermitize(&ys);
                        k1 = ks[6].clone();
                        steps += 1;
                    }
                    let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
                    if !(last && ratio <= 1.0) {
                        h = step * factor;
                    }
                }
            }
        }
        out.push((y.clone(), steps));
    }
    Ok(out)
}

/// Exact channel `exp(τ D_s)` of one site's dissipator as a dense matrix on
/// the column-major single-mode `vec`.
fn site_channel(jump: &CMat, tau: f64) -> CMat {
    let n = jump.nrows();
    let ldl = jump.adjoint() * jump;
    let mut s = CMat::zeros(n * n, n * n);
    let mut e = CMat::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            e[(i, j)] = C64::new(1.0, 0.0);
            let col = jump * &e * jump.adjoint() - (&ldl * &e + &e * &ldl) * C64::new(0.5, 0.0);
            e[(i, j)] = C64::new(0.0, 0.0);
            for (k, v) in col.iter().enumerate() {
                s[(k, i + j * n)] = *v;
            }
        }
    }
    expm(&(s * C64::new(tau, 0.0)))
}

/// Applies a single-mode superoperator (column-major vec convention) at `site`
/// of a product-basis density matrix.
fn apply_site_superop(rho: &CMat, basis: &FockBasis, site: usize, e: &CMat) -> CMat {
    let modes = basis.modes();
    let loc = basis.cutoff(site) + 1;
    let inner: usize = (site + 1..modes).map(|s| basis.cutoff(s) + 1).product();
    let outer: usize = (0..site).map(|s| basis.cutoff(s) + 1).product();
    let idx = |o: usize, m: usize, i: usize| (o * loc + m) * inner + i;
    let mut out = CMat::zeros(rho.nrows(), rho.ncols());
    let mut block = nalgebra::DVector::<C64>::zeros(loc * loc);
    for o1 in 0..outer {
        for i1 in 0..inner {
            for o2 in 0..outer {
                for i2 in 0..inner {
                    for n in 0..loc {
                        for m in 0..loc {
                            block[m + n * loc] = rho[(idx(o1, m, i1), idx(o2, n, i2))];
                        }
                    }
                    let res = e * &block;
                    for n in 0..loc {
                        for m in 0..loc {
                            out[(idx(o1, m, i1), idx(o2, n, i2))] = res[m + n * loc];
                        }
                    }
                }
            }
        }
    }
    out
}

struct SplitOps {
    half_channels: Vec<(usize, CMat)>,
    unitary: Option<CMat>,
}

fn split_ops(l: &Liouvillian, h: f64) -> SplitOps {
    let half_channels = l.site_jumps.iter().map(|(s, j)| (*s, site_channel(j, h / 2.0))).collect();
    let unitary = if l.hamiltonian_is_zero() {
        None
    } else {
        let hd = CMat::from(&l.hamiltonian);
        Some(expm(&(hd * C64::new(0.0, -h))))
    };
    SplitOps { half_channels, unitary }
}

fn split_run(rho0: &CMat, l: &Liouvillian, n: usize, ops: &SplitOps) -> CMat {
    let mut rho = rho0.clone();
    for _ in 0..n {
        for (s, e) in &ops.half_channels {
            rho = apply_site_superop(&rho, &l.basis, *s, e);
        }
        if let Some(u) = &ops.unitary {
            rho = u * rho * u.adjoint();
        }
        for (s, e) in &ops.half_channels {
            rho = apply_site_superop(&rho, &l.basis, *s, e);
        }
    }
    hermitize(&rho)
}

/// Strang splitting (exact site channels around an exact unitary step) with
/// two levels of Richardson extrapolation; refines until successive
/// extrapolants agree within the tolerance.
fn split_step_extrapolated(rho0: &CMat, l: &Liouvillian, t: f64, opts: &EvolveOptions) -> Result<(CMat, usize)> {
    if !l.basis.is_product() || l.projector.is_some() {
        return Err(Error::InvalidArgument("split-step needs an unprojected product basis".into()));
    }
    if t == 0.0 {
        return Ok((rho0.clone(), 0));
    }
    if l.hamiltonian_is_zero() {
        // site channels commute, one step is exact
        let ops = split_ops(l, t);
        return Ok((split_run(rho0, l, 1, &ops), 1));
    }
    let hnorm = CMat::from(&l.hamiltonian).norm().max(1e-12);
    let mut n = ((t * hnorm / 0.5).ceil() as usize).max(2);
    let run = |n: usize| split_run(rho0, l, n, &split_ops(l, t / n as f64));
    let mut y1 = run(n);
    let mut y2 = run(2 * n);
    let mut total = 3 * n;
    loop {
        let y4 = run(4 * n);
        total += 4 * n;
        let r1a = (&y2 * C64::new(4.0, 0.0) - &y1) / C64::new(3.0, 0.0);
        let r1b = (&y4 * C64::new(4.0, 0.0) - &y2) / C64::new(3.0, 0.0);
        let r2 = (&r1b * C64::new(16.0, 0.0) - &r1a) / C64::new(15.0, 0.0);
        let err = (&r2 - &r1b).max_modulus();
        if err <= opts.tol {
            return Ok((hermitize(&r2), total));
        }
        if total > opts.max_steps {
            return Err(Error::StepBudget { steps: total, t });
        }
        n *= 2;
        y1 = y2;
        y2 = y4;
    }
}

/// Product formula `(e^{τ H-part} ∘ e^{τ D-part})^n ρ0` with `τ = t/n`; the
/// Hamiltonian factor is unitary conjugation by `exp(-iHτ)`.
pub fn trotter_evolve(
    rho0: &CMat,
    h: &HamiltonianSpec,
    dspec: &DissipatorSpec,
    basis: &FockBasis,
    t: f64,
    n: usize,
    opts: &EvolveOptions,
) -> Result<CMat> {
    if n < 1 {
        return Err(Error::InvalidArgument("trotter steps n must be >= 1".into()));
    }
    let tau = t / n as f64;
    let diss_only = build_liouvillian(&HamiltonianSpec::zero(h.graph.clone(), h.d), dspec, basis, Variant::Full)?;
    let hd = CMat::from(&h.full_operator(basis));
    let u = expm(&(hd * C64::new(0.0, -tau)));
    let mut rho = rho0.clone();
    for _ in 0..n {
        rho = evolve(&rho, &diss_only, tau, opts)?.rho;
        rho = hermitize(&(&u * rho * u.adjoint()));
    }
    Ok(rho)
}

/// `tr[O X]` for dense matrices.
pub fn trace_product(o: &CMat, x: &CMat) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            acc += o[(j, i)] * x[(i, j)];
        }
    }
    acc
}

/// `{tr[L^j(ρ0) O]}_{j ≤ degree}`.
pub fn taylor_coefficients(l: &Liouvillian, rho0: &CMat, observable: &CMat, degree: usize) -> Vec<f64> {
    let mut x = rho0.clone();
    let mut out = Vec::with_capacity(degree + 1);
    for j in 0..=degree {
        out.push(trace_product(observable, &x).re);
        if j < degree {
            x = l.apply(&x);
        }
    }
    out
}

/// Reduced Taylor terms `tr_{sites^c}[L^j(ρ0)]` for `j ≤ degree`.
pub fn taylor_reduced(l: &Liouvillian, rho0: &CMat, sites: &[usize], degree: usize) -> Result<Vec<CMat>> {
    let mut x = rho0.clone();
    let mut out = Vec::with_capacity(degree + 1);
    for j in 0..=degree {
        out.push(l.basis.reduce(&x, sites)?.0);
        if j < degree {
            x = l.apply(&x);
        }
    }
    Ok(out)
}

/// `Σ_j t^j/j! terms[j]`.
pub fn sum_taylor(terms: &[CMat], t: f64) -> CMat {
    let mut out = CMat::zeros(terms[0].nrows(), terms[0].ncols());
    let mut w = 1.0;
    for (j, x) in terms.iter().enumerate() {
        if j > 0 {
            w *= t / j as f64;
        }
        out += x * C64::new(w, 0.0);
    }
    out
}

/// Smallest cutoff in the ladder whose observables agree with the next
/// ladder entry within `tol`. Returns the cutoff and its observables.
pub fn convergence_ladder<F>(start: usize, next: impl Fn(usize) -> usize, max_cutoff: usize, tol: f64, observe: F) -> Result<(usize, Vec<f64>)>
where
    F: Fn(usize) -> Result<Vec<f64>>,
{
    let mut m = start;
    let mut cur = observe(m)?;
    loop {
        let m2 = next(m);
        if m2 > max_cutoff {
            return Err(Error::InvalidArgument(format!(
                "truncation not converged below cutoff {max_cutoff}"
            )));
        }
        let nxt = observe(m2)?;
        let diff = cur.iter().zip(&nxt).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if diff < tol {
            return Ok((m, cur));
        }
        m = m2;
        cur = nxt;
    }
}

/// Identity-functional check: `|tr L(ρ)|` for the given state.
pub fn trace_defect(l: &Liouvillian, rho: &CMat) -> f64 {
    l.apply_general(rho).trace().norm()
}

pub fn to_csr(m: &CMat) -> SparseOp {
    CsrMatrix::from(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{number_op, CVec};
    use crate::lattice::{random_hamiltonian, LatticeGraph};
    use crate::linalg::trace_norm_hermitian;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn damping() -> (HamiltonianSpec, DissipatorSpec, FockBasis) {
        let g = LatticeGraph::new(1, vec![], None).unwrap();
        let h = HamiltonianSpec::zero(g, 1);
        let d = DissipatorSpec::vacuum(1, 1);
        let b = FockBasis::product(&TruncationSpec::new(4, 1).unwrap());
        (h, d, b)
    }

    #[test]
    fn damping_generator_by_hand() {
        let (h, d, b) = damping();
        let l = build_liouvillian(&h, &d, &b, Variant::Full).unwrap();
        let mut rho = CMat::zeros(5, 5);
        rho[(1, 1)] = c(1.0);
        let out = l.apply(&rho);
        let mut expect = CMat::zeros(5, 5);
        expect[(0, 0)] = c(1.0);
        expect[(1, 1)] = c(-1.0);
        assert!((out - expect).max_modulus() < 1e-15);
    }

    #[test]
    fn damping_number_decay_all_methods() {
        let (h, d, b) = damping();
        let l = build_liouvillian(&h, &d, &b, Variant::Full).unwrap();
        let mut rho = CMat::zeros(5, 5);
        rho[(1, 1)] = c(1.0);
        let n = number_op(&TruncationSpec::new(4, 1).unwrap());
        for m in [Method::RungeKutta, Method::Expm, Method::SplitStep] {
            let opts = EvolveOptions { method: m, ..Default::default() };
            let r = evolve(&rho, &l, 0.7, &opts).unwrap();
            let mean = trace_product(&n, &r.rho).re;
            assert!((mean - (-0.7f64).exp()).abs() < 1e-8, "{m:?}: {mean}");
            assert_eq!(evolve(&rho, &l, 0.0, &opts).unwrap().rho, rho);
        }
    }

    #[test]
    fn coherent_state_is_dark() {
        let g = LatticeGraph::single_edge();
        let h = HamiltonianSpec::zero(g, 1);
        let alpha = vec![C64::new(0.4, 0.1), C64::new(-0.2, 0.3)];
        let d = DissipatorSpec::new(2, alpha.clone()).unwrap();
        let b = FockBasis::product(&TruncationSpec::new(14, 2).unwrap());
        let l = build_liouvillian(&h, &d, &b, Variant::Full).unwrap();
        let psi = b.coherent(&alpha);
        let rho = &psi * psi.adjoint();
        let leak = b.boundary_weight(&rho);
        assert!(trace_norm_hermitian(&l.apply(&rho)) < 1e-6);
        let r = evolve(&rho, &l, 1.0, &EvolveOptions::default()).unwrap();
        assert!(trace_norm_hermitian(&(&r.rho - &rho)) <= 10.0 * leak.max(1e-9));
    }

    #[test]
    fn trace_preserving_and_consistent_paths() {
        let g = LatticeGraph::single_edge();
        let h = random_hamiltonian(&g, 1, 0.5, 3).unwrap();
        let d = DissipatorSpec::new(2, vec![c(0.3), C64::new(0.0, 0.2)]).unwrap();
        let b = FockBasis::product(&TruncationSpec::new(4, 2).unwrap());
        let l = build_liouvillian(&h, &d, &b, Variant::Full).unwrap();
        let psi = CVec::from_fn(b.dim(), |i, _| C64::new((i as f64).sin(), (i as f64 * 0.3).cos()));
        let rho = &psi * psi.adjoint() / C64::new(psi.norm_squared(), 0.0);
        assert!(trace_defect(&l, &rho) < 1e-10);
        assert!((l.apply(&rho) - l.apply_general(&rho)).max_modulus() < 1e-12);
        let t = 0.4;
        let a = evolve(&rho, &l, t, &EvolveOptions { method: Method::Expm, ..Default::default() }).unwrap();
        let r = evolve(&rho, &l, t, &EvolveOptions { method: Method::RungeKutta, ..Default::default() }).unwrap();
        let s = evolve(&rho, &l, t, &EvolveOptions { method: Method::SplitStep, ..Default::default() }).unwrap();
        assert!((&a.rho - &r.rho).max_modulus() < 1e-8);
        assert!((&a.rho - &s.rho).max_modulus() < 1e-8);
        assert!(r.trace_drift.abs() < 1e-8);
        let half = evolve(&rho, &l, t / 2.0, &EvolveOptions::default()).unwrap();
        let twice = evolve(&half.rho, &l, t / 2.0, &EvolveOptions::default()).unwrap();
        assert!((&twice.rho - &a.rho).max_modulus() < 1e-8);
    }

    #[test]
    fn trotter_with_zero_hamiltonian_is_exact() {
        let g = LatticeGraph::single_edge();
        let h = HamiltonianSpec::zero(g, 1);
        let d = DissipatorSpec::new(2, vec![c(0.3), c(0.1)]).unwrap();
        let b = FockBasis::product(&TruncationSpec::new(3, 2).unwrap());
        let l = build_liouvillian(&h, &d, &b, Variant::Full).unwrap();
        let mut rho = CMat::zeros(b.dim(), b.dim());
        rho[(b.dim() - 1, b.dim() - 1)] = c(1.0);
        let opts = EvolveOptions::default();
        let exact = evolve(&rho, &l, 0.5, &opts).unwrap().rho;
        for n in [1, 3] {
            let tr = trotter_evolve(&rho, &h, &d, &b, 0.5, n, &opts).unwrap();
            assert!((tr - &exact).max_modulus() < 1e-9);
        }
    }

    #[test]
    fn taylor_partial_sums_converge() {
        let g = LatticeGraph::single_edge();
        let h = random_hamiltonian(&g, 1, 0.5, 8).unwrap();
        let d = DissipatorSpec::new(2, vec![c(0.2), c(0.1)]).unwrap();
        let b = FockBasis::product(&TruncationSpec::new(3, 2).unwrap());
        let l = build_liouvillian(&h, &d, &b, Variant::Projected { region: vec![0, 1], m_prime: 3 }).unwrap();
        let psi = b.coherent(&[c(0.2), c(0.1)]);
        let rho = &psi * psi.adjoint() / C64::new(psi.norm_squared(), 0.0);
        let obs = CMat::from_fn(b.dim(), b.dim(), |i, j| if i == j { c(i as f64) } else { c(0.0) });
        let t = 0.1;
        let deg = 4 * (std::f64::consts::E * t * l.norm_estimate()).ceil() as usize;
        let coeffs = taylor_coefficients(&l, &rho, &obs, deg);
        assert!((coeffs[0] - trace_product(&obs, &rho).re).abs() < 1e-14);
        let mut sum = 0.0;
        let mut w = 1.0;
        for (j, cj) in coeffs.iter().enumerate() {
            if j > 0 {
                w *= t / j as f64;
            }
            sum += w * cj;
        }
        let exact = trace_product(&obs, &evolve(&rho, &l, t, &EvolveOptions::default()).unwrap().rho).re;
        assert!((sum - exact).abs() < 1e-6);
        let id = CMat::identity(b.dim(), b.dim());
        let ct = taylor_coefficients(&l, &rho, &id, 3);
        assert!(ct[1..].iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn region_variant_rejects_bad_sites() {
        let g = LatticeGraph::single_edge();
        let h = HamiltonianSpec::zero(g, 1);
        let d = DissipatorSpec::vacuum(2, 2);
        let b = FockBasis::product(&TruncationSpec::new(2, 2).unwrap());
        assert!(build_liouvillian(&h, &d, &b, Variant::Region(vec![5])).is_err());
    }
}
