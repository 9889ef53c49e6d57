//! Heterodyne sampling, input preparation, edge partitions and shots.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{build_liouvillian, evolve, EvolveOptions, Variant};
use crate::error::{Error, Result};
use crate::fock::{coherent_amplitudes, factorial, CMat, CVec, FockBasis, C64};
use crate::lattice::{DissipatorSpec, HamiltonianSpec, LatticeGraph};
use crate::linalg::hermitian_eigen;

/// `⟨β|ρ|β⟩/π^m` for a state on `basis` (one `β` per mode).
pub fn husimi_density(rho: &CMat, basis: &FockBasis, beta: &[C64]) -> f64 {
    let v = basis.coherent(beta);
    let q = (v.adjoint() * rho * &v)[(0, 0)].re;
    q / std::f64::consts::PI.powi(beta.len() as i32)
}

/// Independent ChaCha stream for one `(seed, plan, shot, edge)` tuple.
pub fn stream_rng(seed: u64, plan: u64, shot: u64, edge: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&plan.to_le_bytes());
    key[16..24].copy_from_slice(&0x6865_7465_726f_6479u64.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(shot);
    rng.set_word_pos((edge as u128) << 48);
    rng
}

#[derive(Debug, Clone, Copy)]
struct Envelope {
    s2: f64,
    k: f64,
}

/// Exact sampler for the Husimi distribution of a one- or two-mode state:
/// an eigenvector is drawn by weight, then its Q function is rejection-sampled
/// from an isotropic complex Gaussian proposal.
pub struct HusimiSampler {
    modes: usize,
    occ: Vec<Vec<u8>>,
    inv_sqrt_fact: Vec<f64>,
    vecs: Vec<CVec>,
    chooser: WeightedIndex<f64>,
    max_cutoff: usize,
    envelopes: Vec<OnceLock<Envelope>>,
    proposals: AtomicU64,
    accepted: AtomicU64,
}

const ENVELOPE_SAFETY: f64 = 1.02;

impl HusimiSampler {
    pub fn new(rho: &CMat, basis: &FockBasis) -> Result<Self> {
        let modes = basis.modes();
        if !(1..=2).contains(&modes) {
            return Err(Error::InvalidArgument(format!("sampler supports 1 or 2 modes, got {modes}")));
        }
        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("state has non-finite entries".into()));
        }
        let (vals, vecs) = hermitian_eigen(rho);
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("state spectrum is not finite".into()));
        }
        let mut weights = Vec::new();
        let mut kept = Vec::new();
        for (i, &w) in vals.iter().enumerate() {
            if w > 1e-14 {
                weights.push(w);
                kept.push(vecs.column(i).into_owned());
            }
        }
        let chooser = WeightedIndex::new(&weights).map_err(|e| Error::InvalidArgument(format!("state weights: {e}")))?;
        let occ: Vec<Vec<u8>> = (0..basis.dim()).map(|i| basis.occupation(i).to_vec()).collect();
        let inv_sqrt_fact = occ
            .iter()
            .map(|o| 1.0 / o.iter().map(|&n| factorial(n as u32)).product::<f64>().sqrt())
            .collect();
        let n = kept.len();
        Ok(Self {
            modes,
            occ,
            inv_sqrt_fact,
            vecs: kept,
            chooser,
            max_cutoff: basis.cutoffs().iter().copied().max().unwrap_or(0),
            envelopes: (0..n).map(|_| OnceLock::new()).collect(),
            proposals: AtomicU64::new(0),
            accepted: AtomicU64::new(0),
        })
    }

    /// `Σ_n ψ_n Π β̄_i^{n_i}/√(n_i!)`.
    fn amplitude_poly(&self, psi: &CVec, beta: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (idx, o) in self.occ.iter().enumerate() {
            let mut m = C64::new(self.inv_sqrt_fact[idx], 0.0);
            for (b, &n) in beta.iter().zip(o) {
                m *= b.conj().powu(n as u32);
            }
            acc += psi[idx] * m;
        }
        acc
    }

    fn radial_bound(&self, psi: &CVec, r: &[f64]) -> f64 {
        self.occ
            .iter()
            .enumerate()
            .map(|(idx, o)| psi[idx].norm() * self.inv_sqrt_fact[idx] * r.iter().zip(o).map(|(x, &n)| x.powi(n as i32)).product::<f64>())
            .sum()
    }

    fn log_bound(&self, psi: &CVec, s2: f64, r: &[f64]) -> f64 {
        let a = 1.0 - 1.0 / s2;
        let r2: f64 = r.iter().map(|x| x * x).sum();
        let p = self.radial_bound(psi, r);
        self.modes as f64 * s2.ln() - a * r2 + 2.0 * p.max(1e-300).ln()
    }

    /// Supremum over mode radii of the ratio bound, by a coarse grid scan and
    /// a local refinement.
    fn scan(&self, psi: &CVec, s2: f64) -> f64 {
        let a = 1.0 - 1.0 / s2;
        let rmax = ((2.0 * (self.max_cutoff as f64 + 1.0)) / a + 20.0).sqrt();
        let coarse = if self.modes == 1 { 800 } else { 70 };
        let h = rmax / coarse as f64;
        let mut best = (f64::NEG_INFINITY, vec![0.0; self.modes]);
        let mut idx = vec![0usize; self.modes];
        loop {
            let r: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
            let v = self.log_bound(psi, s2, &r);
            if v > best.0 {
                best = (v, r);
            }
            let mut d = 0;
            loop {
                if d == self.modes {
                    break;
                }
                idx[d] += 1;
                if idx[d] <= coarse {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == self.modes {
                break;
            }
        }
        let fine = 20;
        let center = best.1.clone();
        let mut sub = vec![0usize; self.modes];
        loop {
            let r: Vec<f64> = center
                .iter()
                .zip(&sub)
                .map(|(&c, &i)| (c - h + 2.0 * h * i as f64 / fine as f64).max(0.0))
                .collect();
            let v = self.log_bound(psi, s2, &r);
            if v > best.0 {
                best.0 = v;
            }
            let mut d = 0;
            loop {
                if d == self.modes {
                    break;
                }
                sub[d] += 1;
                if sub[d] <= fine {
                    break;
                }
                sub[d] = 0;
                d += 1;
            }
            if d == self.modes {
                break;
            }
        }
        best.0.exp() * ENVELOPE_SAFETY
    }

    fn envelope(&self, i: usize) -> Envelope {
        *self.envelopes[i].get_or_init(|| {
            let default = self.max_cutoff as f64 + 2.0;
            let mut cands = vec![1.1, 1.3, 1.6, 2.0, 2.5, 3.0, 4.0, 5.0, 6.5, 8.0, 10.0];
            cands.push(default);
            cands
                .into_iter()
                .map(|s2| Envelope { s2, k: self.scan(&self.vecs[i], s2) })
                .min_by(|x, y| x.k.total_cmp(&y.k))
                .expect("candidates")
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<C64>> {
        let i = self.chooser.sample(rng);
        let env = self.envelope(i);
        let psi = &self.vecs[i];
        let sd = (env.s2 / 2.0).sqrt();
        let a = 1.0 - 1.0 / env.s2;
        loop {
            self.proposals.fetch_add(1, Ordering::Relaxed);
            let beta: Vec<C64> = (0..self.modes)
                .map(|_| {
                    let x: f64 = rng.sample(StandardNormal);
                    let y: f64 = rng.sample(StandardNormal);
                    C64::new(sd * x, sd * y)
                })
                .collect();
            let r2: f64 = beta.iter().map(|b| b.norm_sqr()).sum();
            let ratio = env.s2.powi(self.modes as i32) * (-a * r2).exp() * self.amplitude_poly(psi, &beta).norm_sqr();
            if ratio > env.k {
                return Err(Error::Envelope { ratio: ratio / env.k });
            }
            let u: f64 = rng.random();
            if u * env.k < ratio {
                self.accepted.fetch_add(1, Ordering::Relaxed);
                return Ok(beta);
            }
        }
    }

    pub fn acceptance_rate(&self) -> f64 {
        let p = self.proposals.load(Ordering::Relaxed);
        if p == 0 {
            return f64::NAN;
        }
        self.accepted.load(Ordering::Relaxed) as f64 / p as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeterodyneOutcome {
    pub shot: u64,
    pub edge: usize,
    /// `[β_iR, β_iI, β_jR, β_jI]`.
    pub beta: [f64; 4],
}

pub fn sample_heterodyne<R: Rng + ?Sized>(rho_e: &CMat, basis_e: &FockBasis, rng: &mut R) -> Result<[f64; 4]> {
    let s = HusimiSampler::new(rho_e, basis_e)?;
    let b = s.sample(rng)?;
    Ok(beta_components(&b))
}

fn beta_components(b: &[C64]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (k, z) in b.iter().take(2).enumerate() {
        out[2 * k] = z.re;
        out[2 * k + 1] = z.im;
    }
    out
}

/// `⊗_{e∈E_j} |α⟩_e ⊗ |0⟩` elsewhere. With `projected = Some(m)` each mode
/// is cut to levels `≤ m`; the state is renormalized either way.
pub fn prepare_input_state(
    alpha: &[C64],
    edges: &[usize],
    graph: &LatticeGraph,
    basis: &FockBasis,
    projected: Option<usize>,
) -> Result<CMat> {
    if alpha.len() != basis.modes() {
        return Err(Error::InvalidArgument(format!(
            "{} amplitudes for {} modes",
            alpha.len(),
            basis.modes()
        )));
    }
    let support: BTreeSet<usize> = edges.iter().flat_map(|&e| [graph.edges[e].0, graph.edges[e].1]).collect();
    if let Some(s) = (0..alpha.len()).find(|s| alpha[*s].norm() > 0.0 && !support.contains(s)) {
        return Err(Error::InvalidArgument(format!("amplitude on site {s} outside the measured edges")));
    }
    let factors: Vec<Vec<C64>> = (0..basis.modes())
        .map(|s| {
            let cut = projected.map_or(basis.cutoff(s), |m| m.min(basis.cutoff(s)));
            let mut f = coherent_amplitudes(alpha[s], cut);
            f.resize(basis.cutoff(s) + 1, C64::new(0.0, 0.0));
            f
        })
        .collect();
    let psi = basis.product_state(&factors);
    let n = psi.norm_squared();
    Ok(&psi * psi.adjoint() / C64::new(n, 0.0))
}

/// `Π_{i∈e} Σ_{k≤M} |α_i|^{2k}/k!`, the weight making the projected input's
/// entries `α^u ᾱ^v/√(u!v!)`.
pub fn projected_weight(alpha: &[C64], m: usize) -> f64 {
    alpha
        .iter()
        .map(|a| {
            let x = a.norm_sqr();
            let mut t = 1.0;
            let mut s = 1.0;
            for k in 1..=m {
                t *= x / k as f64;
                s += t;
            }
            s
        })
        .product()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PartitionMode {
    EdgeDisjoint,
    /// Edges whose radius-`r` rectangles do not intersect.
    RectangleDisjoint(usize),
}

pub fn partition_edges(graph: &LatticeGraph, mode: PartitionMode) -> Result<Vec<Vec<usize>>> {
    match mode {
        PartitionMode::EdgeDisjoint => {
            let mut color = vec![usize::MAX; graph.edges.len()];
            for (e, &(a, b)) in graph.edges.iter().enumerate() {
                let used: BTreeSet<usize> = graph
                    .edges
                    .iter()
                    .enumerate()
                    .filter(|(f, &(x, y))| color[*f] != usize::MAX && [x, y].iter().any(|v| *v == a || *v == b))
                    .map(|(f, _)| color[f])
                    .collect();
                color[e] = (0..).find(|c| !used.contains(c)).expect("free color");
            }
            Ok(group(&color))
        }
        PartitionMode::RectangleDisjoint(r) => {
            let coords = graph.coords.as_ref().ok_or(Error::MissingCoordinates)?;
            let period = 2 * r as i64 + 2;
            let mut keys = Vec::with_capacity(graph.edges.len());
            for &(a, b) in &graph.edges {
                let (ca, cb) = (&coords[a], &coords[b]);
                let diff: Vec<i64> = ca.iter().zip(cb).map(|(x, y)| (x - y).abs()).collect();
                if diff.iter().any(|&d| d > 1) {
                    return Err(Error::InvalidArgument(format!("edge ({a},{b}) is not a nearest-neighbour bond")));
                }
                let dir = diff.iter().position(|&d| d == 1).unwrap_or(0);
                let anchor: Vec<i64> = ca.iter().zip(cb).map(|(x, y)| (*x.min(y)).rem_euclid(period)).collect();
                keys.push((dir, anchor));
            }
            let mut uniq: Vec<(usize, Vec<i64>)> = keys.clone();
            uniq.sort();
            uniq.dedup();
            let color: Vec<usize> = keys.iter().map(|k| uniq.binary_search(k).expect("key")).collect();
            Ok(group(&color))
        }
    }
}

fn group(color: &[usize]) -> Vec<Vec<usize>> {
    let n = color.iter().copied().max().map_or(0, |c| c + 1);
    let mut out = vec![Vec::new(); n];
    for (e, &c) in color.iter().enumerate() {
        out[c].push(e);
    }
    out.retain(|s| !s.is_empty());
    out
}

/// Checks that the radius-`r` regions of all edges within each set are disjoint.
pub fn check_rectangle_disjoint(graph: &LatticeGraph, sets: &[Vec<usize>], r: usize) -> bool {
    sets.iter().all(|set| {
        let regions: Vec<BTreeSet<usize>> = set.iter().map(|&e| graph.ball_around_edge(e, r).into_iter().collect()).collect();
        regions
            .iter()
            .enumerate()
            .all(|(i, a)| regions[i + 1..].iter().all(|b| a.is_disjoint(b)))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPlan {
    pub plan_id: u64,
    pub partition_index: usize,
    pub edges: Vec<usize>,
    /// Input amplitude per site; zero off the measured edges.
    pub alpha: Vec<C64>,
    pub t: f64,
    pub phase_tag: u32,
    pub shots: usize,
    pub seed: u64,
    /// Per-mode projection level of the input, if any.
    pub projected: Option<usize>,
}

/// Reduced edge states after one evolution of a plan.
pub struct EvolvedPlan {
    pub edges: Vec<usize>,
    pub states: Vec<(CMat, FockBasis)>,
    pub leakage: f64,
}

/// Prepares the input and evolves it under the full generator with
/// dissipation `a^p - α^p` matched to the input amplitudes.
pub fn evolve_plan(
    plan: &MeasurementPlan,
    h: &HamiltonianSpec,
    p: u32,
    basis: &FockBasis,
    opts: &EvolveOptions,
) -> Result<EvolvedPlan> {
    let rho0 = prepare_input_state(&plan.alpha, &plan.edges, &h.graph, basis, plan.projected)?;
    let dspec = DissipatorSpec::new(p, plan.alpha.clone())?;
    let l = build_liouvillian(h, &dspec, basis, Variant::Full)?;
    let res = evolve(&rho0, &l, plan.t, opts).map_err(Error::at("evolve"))?;
    let states = plan
        .edges
        .iter()
        .map(|&e| {
            let (a, b) = h.graph.edges[e];
            basis.reduce(&res.rho, &[a, b])
        })
        .collect::<Result<_>>()?;
    Ok(EvolvedPlan {
        edges: plan.edges.clone(),
        states,
        leakage: res.leakage,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub plan: MeasurementPlan,
    pub outcomes: Vec<HeterodyneOutcome>,
    pub acceptance_rate: f64,
}

/// Samplers for every measured edge of an evolved plan.
pub fn edge_samplers(ev: &EvolvedPlan) -> Result<Vec<HusimiSampler>> {
    ev.states.iter().map(|(rho, b)| HusimiSampler::new(rho, b)).collect()
}

/// One shot: one `β` per measured edge, each from its own stream.
pub fn run_shot(plan: &MeasurementPlan, shot: u64, edges: &[usize], samplers: &[HusimiSampler]) -> Result<Vec<HeterodyneOutcome>> {
    edges
        .iter()
        .zip(samplers)
        .map(|(&e, s)| {
            let mut rng = stream_rng(plan.seed, plan.plan_id, shot, e as u64);
            Ok(HeterodyneOutcome {
                shot,
                edge: e,
                beta: beta_components(&s.sample(&mut rng)?),
            })
        })
        .collect()
}

/// All shots of a plan from one evolution; outcomes sorted by shot id.
pub fn run_plan(plan: &MeasurementPlan, ev: &EvolvedPlan) -> Result<SampleBatch> {
    if plan.shots == 0 {
        return Err(Error::InvalidArgument("a plan needs at least one shot".into()));
    }
    let samplers = edge_samplers(ev)?;
    let shots: Vec<Vec<HeterodyneOutcome>> = (0..plan.shots as u64)
        .into_par_iter()
        .map(|s| run_shot(plan, s, &ev.edges, &samplers))
        .collect::<Result<_>>()?;
    let rate = samplers.iter().map(|s| s.acceptance_rate()).sum::<f64>() / samplers.len().max(1) as f64;
    log::debug!("plan {} acceptance rate {rate:.3}", plan.plan_id);
    Ok(SampleBatch {
        plan: plan.clone(),
        outcomes: shots.into_iter().flatten().collect(),
        acceptance_rate: rate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SampleRow {
    shot_id: u64,
    edge: usize,
    t: f64,
    alpha_i_re: f64,
    alpha_i_im: f64,
    alpha_j_re: f64,
    alpha_j_im: f64,
    beta_i_re: f64,
    beta_i_im: f64,
    beta_j_re: f64,
    beta_j_im: f64,
    partition: usize,
    phase_tag: u32,
}

impl SampleBatch {
    pub fn write_csv<W: Write>(&self, graph: &LatticeGraph, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for o in &self.outcomes {
            let (a, b) = graph.edges[o.edge];
            w.serialize(SampleRow {
                shot_id: o.shot,
                edge: o.edge,
                t: self.plan.t,
                alpha_i_re: self.plan.alpha[a].re,
                alpha_i_im: self.plan.alpha[a].im,
                alpha_j_re: self.plan.alpha[b].re,
                alpha_j_im: self.plan.alpha[b].im,
                beta_i_re: o.beta[0],
                beta_i_im: o.beta[1],
                beta_j_re: o.beta[2],
                beta_j_im: o.beta[3],
                partition: self.plan.partition_index,
                phase_tag: self.plan.phase_tag,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Outcomes from a CSV written by [`SampleBatch::write_csv`].
    pub fn read_outcomes<R: Read>(input: R) -> Result<Vec<HeterodyneOutcome>> {
        let mut r = csv::Reader::from_reader(input);
        r.deserialize::<SampleRow>()
            .map(|row| {
                let row = row?;
                Ok(HeterodyneOutcome {
                    shot: row.shot_id,
                    edge: row.edge,
                    beta: [row.beta_i_re, row.beta_i_im, row.beta_j_re, row.beta_j_im],
                })
            })
            .collect()
    }
}

/// One-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let sq = n.sqrt();
    let lambda = (sq + 0.12 + 0.11 / sq) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let term = 2.0 * (-1f64).powi(k - 1) * (-2.0 * (k as f64 * lambda).powi(2)).exp();
        p += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    KsResult {
        statistic: d,
        p_value: p.clamp(0.0, 1.0),
    }
}

/// `P(|β| ≤ r)` for a single-mode state, by quadrature of the Husimi density
/// (trapezoid in angle, Gauss-Legendre panels in radius).
pub fn radial_cdf_quadrature(rho: &CMat, basis: &FockBasis, r: f64) -> f64 {
    let gl = gauss_quad::GaussLegendre::new(20).expect("legendre rule");
    let n_phi = 2 * basis.cutoff(0) + 4;
    let panels = ((r / 0.5).ceil() as usize).max(1);
    let h = r / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = p as f64 * h;
        total += gl.integrate(a, a + h, |rr| {
            let ang: f64 = (0..n_phi)
                .map(|k| {
                    let phi = 2.0 * std::f64::consts::PI * k as f64 / n_phi as f64;
                    husimi_density(rho, basis, &[C64::from_polar(rr, phi)])
                })
                .sum::<f64>()
                * 2.0
                * std::f64::consts::PI
                / n_phi as f64;
            ang * rr
        });
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::TruncationSpec;

    fn two_mode(cut: usize) -> FockBasis {
        FockBasis::product(&TruncationSpec::new(cut, 2).unwrap())
    }

    #[test]
    fn husimi_of_vacuum_and_coherent() {
        let b = two_mode(12);
        let mut vac = CMat::zeros(b.dim(), b.dim());
        vac[(0, 0)] = C64::new(1.0, 0.0);
        let beta = [C64::new(0.3, -0.2), C64::new(-0.5, 0.1)];
        let pi2 = std::f64::consts::PI.powi(2);
        let nb: f64 = beta.iter().map(|z| z.norm_sqr()).sum();
        assert!((husimi_density(&vac, &b, &beta) - (-nb).exp() / pi2).abs() < 1e-14);
        let alpha = [C64::new(0.2, 0.4), C64::new(0.1, -0.3)];
        let psi = b.coherent(&alpha);
        let rho = &psi * psi.adjoint();
        let d: f64 = alpha.iter().zip(&beta).map(|(a, z)| (a - z).norm_sqr()).sum();
        assert!((husimi_density(&rho, &b, &beta) - (-d).exp() / pi2).abs() < 1e-9);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream_rng(1, 2, 3, 4).random();
        let b: u64 = stream_rng(1, 2, 3, 4).random();
        let c: u64 = stream_rng(1, 2, 3, 5).random();
        let d: u64 = stream_rng(1, 2, 4, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn vacuum_sample_moments() {
        let b = two_mode(3);
        let mut vac = CMat::zeros(b.dim(), b.dim());
        vac[(0, 0)] = C64::new(1.0, 0.0);
        let s = HusimiSampler::new(&vac, &b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 20_000;
        let mut m = 0.0;
        for _ in 0..n {
            let z = s.sample(&mut rng).unwrap();
            m += z[0].norm_sqr();
        }
        m /= n as f64;
        // |β|² is Exp(1) with unit variance
        assert!((m - 1.0).abs() < 3.0 / (n as f64).sqrt(), "{m}");
        assert!(s.acceptance_rate() > 0.05);
    }

    #[test]
    fn coherent_sample_mean() {
        let b = two_mode(14);
        let alpha = [C64::new(0.8, -0.3), C64::new(-0.4, 0.6)];
        let psi = b.coherent(&alpha);
        let rho = &psi * psi.adjoint() / C64::new(psi.norm_squared(), 0.0);
        let s = HusimiSampler::new(&rho, &b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 10_000;
        let mut mean = [C64::new(0.0, 0.0); 2];
        for _ in 0..n {
            let z = s.sample(&mut rng).unwrap();
            mean[0] += z[0];
            mean[1] += z[1];
        }
        // each real component has variance 1/2
        let tol = 3.0 * (0.5 / n as f64).sqrt();
        for k in 0..2 {
            let m = mean[k] / n as f64;
            assert!((m.re - alpha[k].re).abs() < tol && (m.im - alpha[k].im).abs() < tol);
        }
    }

    #[test]
    fn partitions() {
        let path = LatticeGraph::chain(4);
        let sets = partition_edges(&path, PartitionMode::EdgeDisjoint).unwrap();
        assert_eq!(sets, vec![vec![0, 2], vec![1]]);
        let single = LatticeGraph::single_edge();
        assert_eq!(partition_edges(&single, PartitionMode::EdgeDisjoint).unwrap().len(), 1);
        let chain = LatticeGraph::chain(12);
        let sets = partition_edges(&chain, PartitionMode::RectangleDisjoint(2)).unwrap();
        assert_eq!(sets.iter().map(|s| s.len()).sum::<usize>(), 11);
        assert!(check_rectangle_disjoint(&chain, &sets, 2));
        for set in &sets {
            for &e in set {
                for &f in set {
                    if e < f {
                        let d = chain.distances_from(&[chain.edges[e].0, chain.edges[e].1]);
                        let df = d[chain.edges[f].0].min(d[chain.edges[f].1]);
                        assert!(df > 4);
                    }
                }
            }
        }
        let bare = LatticeGraph::new(3, vec![(0, 1), (1, 2)], None).unwrap();
        assert!(matches!(
            partition_edges(&bare, PartitionMode::RectangleDisjoint(1)),
            Err(Error::MissingCoordinates)
        ));
    }

    #[test]
    fn input_states() {
        let g = LatticeGraph::chain(3);
        let b = FockBasis::product(&TruncationSpec::new(4, 3).unwrap());
        let vac = prepare_input_state(&[C64::new(0.0, 0.0); 3], &[0], &g, &b, None).unwrap();
        assert!((vac[(0, 0)].re - 1.0).abs() < 1e-15);
        let a = [C64::new(0.5, 0.0), C64::new(0.0, 0.5), C64::new(0.0, 0.0)];
        let rho = prepare_input_state(&a, &[0], &g, &b, Some(1)).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
        let bad = [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.3, 0.0)];
        assert!(prepare_input_state(&bad, &[0], &g, &b, None).is_err());
        let w = projected_weight(&a[..2], 1);
        assert!((w - 1.25 * 1.25).abs() < 1e-15 && w <= std::f64::consts::E);
    }

    #[test]
    fn shot_is_reproducible() {
        let g = LatticeGraph::single_edge();
        let h = HamiltonianSpec::zero(g, 1);
        let b = two_mode(3);
        let plan = MeasurementPlan {
            plan_id: 7,
            partition_index: 0,
            edges: vec![0],
            alpha: vec![C64::new(0.0, 0.0); 2],
            t: 0.0,
            phase_tag: 0,
            shots: 50,
            seed: 11,
            projected: None,
        };
        let ev = evolve_plan(&plan, &h, 2, &b, &EvolveOptions::default()).unwrap();
        let x = run_plan(&plan, &ev).unwrap();
        let y = run_plan(&plan, &ev).unwrap();
        assert_eq!(x.outcomes, y.outcomes);
        assert_eq!(x.outcomes.len(), 50);
        let mut buf = Vec::new();
        x.write_csv(&h.graph, &mut buf).unwrap();
        assert_eq!(SampleBatch::read_outcomes(&buf[..]).unwrap(), x.outcomes);
    }

    #[test]
    fn ks_accepts_matching_distribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let xs: Vec<f64> = (0..2000).map(|_| rng.random::<f64>()).collect();
        assert!(ks_test(&xs, |x| x.clamp(0.0, 1.0)).p_value > 0.01);
        assert!(ks_test(&xs, |x| (x * x).clamp(0.0, 1.0)).p_value < 0.01);
    }

    #[test]
    fn radial_cdf_of_vacuum() {
        let b = FockBasis::product(&TruncationSpec::new(3, 1).unwrap());
        let mut vac = CMat::zeros(4, 4);
        vac[(0, 0)] = C64::new(1.0, 0.0);
        let f = radial_cdf_quadrature(&vac, &b, 1.3);
        assert!((f - (1.0 - (-1.69f64).exp())).abs() < 1e-10);
    }
}
