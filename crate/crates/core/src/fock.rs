//! Truncated Fock-space algebra.
//!
//! Single-mode operators are dense `(M+1) x (M+1)` matrices. Multi-mode
//! operators are either dense Kronecker products (site 0 is the leftmost
//! factor) or sparse matrices on a [`FockBasis`], which may additionally cap
//! the total photon number.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::MaxAbs;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type SparseOp = CsrMatrix<C64>;

/// Largest product-space size for which a [`FockBasis`] keeps a lookup table.
const MAX_PRODUCT_DIM: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSpec {
    /// Highest Fock level kept per mode.
    pub cutoff: usize,
    pub modes: usize,
}

impl TruncationSpec {
    pub fn new(cutoff: usize, modes: usize) -> Result<Self> {
        if cutoff < 1 || modes < 1 {
            return Err(Error::InvalidArgument(format!(
                "truncation needs cutoff >= 1 and modes >= 1, got {cutoff}, {modes}"
            )));
        }
        Ok(Self { cutoff, modes })
    }

    pub fn local_dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn dim(&self) -> usize {
        self.local_dim().pow(self.modes as u32)
    }
}

#[derive(Debug, Clone)]
pub struct StateVector {
    pub amplitudes: CVec,
    pub norm: f64,
}

impl StateVector {
    pub fn new(amplitudes: CVec) -> Self {
        let norm = amplitudes.norm();
        Self { amplitudes, norm }
    }
}

#[derive(Debug, Clone)]
pub struct DensityOperator {
    pub matrix: CMat,
    pub trace: f64,
}

impl DensityOperator {
    pub fn new(matrix: CMat) -> Self {
        let trace = matrix.trace().re;
        Self { matrix, trace }
    }

    pub fn pure(psi: &CVec) -> Self {
        Self::new(psi * psi.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Checks hermiticity, positivity and trace against the given tolerances.
    pub fn validate(&self, herm_tol: f64, eig_tol: f64, trace_tol: f64) -> Result<()> {
        let m = &self.matrix;
        let herm = (m - m.adjoint()).max_modulus();
        if herm > herm_tol {
            return Err(Error::InvalidArgument(format!("state not Hermitian ({herm:.2e})")));
        }
        if (self.trace - 1.0).abs() > trace_tol {
            return Err(Error::InvalidArgument(format!("trace {} != 1", self.trace)));
        }
        let min = crate::linalg::hermitian_eigen(m).0.min();
        if min < -eig_tol {
            return Err(Error::InvalidArgument(format!("negative eigenvalue {min:.2e}")));
        }
        Ok(())
    }
}

pub fn annihilation_op(trunc: &TruncationSpec) -> CMat {
    let n = trunc.local_dim();
    let mut a = CMat::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    a
}

pub fn creation_op(trunc: &TruncationSpec) -> CMat {
    annihilation_op(trunc).adjoint()
}

pub fn number_op(trunc: &TruncationSpec) -> CMat {
    let n = trunc.local_dim();
    CMat::from_fn(n, n, |i, j| if i == j { C64::new(i as f64, 0.0) } else { C64::new(0.0, 0.0) })
}

/// `e^{-|α|²} Σ_{k≤M} |α|^{2k}/k!`, the squared norm of the projected coherent state.
pub fn projected_norm_sq(alpha: C64, cutoff: usize) -> f64 {
    let x = alpha.norm_sqr();
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=cutoff {
        term *= x / k as f64;
        sum += term;
    }
    (-x).exp() * sum
}

/// Components `e^{-|α|²/2} α^n / √(n!)` for `n ≤ cutoff`.
pub fn coherent_amplitudes(alpha: C64, cutoff: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    out.push(c);
    for n in 1..=cutoff {
        c = c * alpha / (n as f64).sqrt();
        out.push(c);
    }
    out
}

pub fn coherent_state(alpha: C64, trunc: &TruncationSpec, projected_normalized: bool) -> StateVector {
    let amps = CVec::from_vec(coherent_amplitudes(alpha, trunc.cutoff));
    if projected_normalized {
        let norm = projected_norm_sq(alpha, trunc.cutoff).sqrt();
        StateVector {
            amplitudes: amps.unscale(norm),
            norm,
        }
    } else {
        StateVector::new(amps)
    }
}

/// Embeds single-mode operators at the given sites, identity elsewhere.
pub fn embed_operator(ops: &[(usize, &CMat)], trunc: &TruncationSpec) -> Result<CMat> {
    let local = trunc.local_dim();
    let mut per_site: Vec<Option<&CMat>> = vec![None; trunc.modes];
    for &(site, op) in ops {
        if site >= trunc.modes {
            return Err(Error::SiteOutOfRange { site, modes: trunc.modes });
        }
        if per_site[site].is_some() {
            return Err(Error::DuplicateSite(site));
        }
        if op.nrows() != local || op.ncols() != local {
            return Err(Error::InvalidArgument(format!(
                "operator at site {site} has shape {}x{}, expected {local}",
                op.nrows(),
                op.ncols()
            )));
        }
        per_site[site] = Some(op);
    }
    let id = CMat::identity(local, local);
    let mut out = CMat::identity(1, 1);
    for op in per_site {
        out = out.kronecker(op.unwrap_or(&id));
    }
    Ok(out)
}

/// `tr[ρ Π_{i∈R} (N_i+I)^k]`.
pub fn number_moment(rho: &CMat, basis: &FockBasis, region: &[usize], k: u32) -> Result<f64> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    basis.check_sites(region)?;
    let mut acc = 0.0;
    for idx in 0..basis.dim() {
        let occ = basis.occupation(idx);
        let w: f64 = region.iter().map(|&s| (occ[s] as f64 + 1.0).powi(k as i32)).product();
        acc += w * rho[(idx, idx)].re;
    }
    Ok(acc)
}

/// Trace norm of `W(ρ) = Π(N_j+I)^{k/2} ρ Π(N_j+I)^{k/2}` over all modes.
pub fn sobolev_norm(rho: &CMat, basis: &FockBasis, k: u32) -> f64 {
    let w: Vec<f64> = (0..basis.dim())
        .map(|idx| {
            basis
                .occupation(idx)
                .iter()
                .map(|&n| (n as f64 + 1.0).powf(k as f64 / 2.0))
                .product()
        })
        .collect();
    let weighted = CMat::from_fn(rho.nrows(), rho.ncols(), |i, j| rho[(i, j)] * (w[i] * w[j]));
    crate::linalg::trace_norm_hermitian(&weighted)
}

/// Diagonal projector onto local levels `≤ m_prime` on every site of `region`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    pub mask: Vec<bool>,
}

impl Projector {
    pub fn to_dense(&self) -> CMat {
        let n = self.mask.len();
        CMat::from_fn(n, n, |i, j| {
            if i == j && self.mask[i] {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn apply_vec(&self, v: &CVec) -> CVec {
        CVec::from_fn(v.len(), |i, _| if self.mask[i] { v[i] } else { C64::new(0.0, 0.0) })
    }

    /// `P X P` for a dense matrix.
    pub fn sandwich(&self, x: &CMat) -> CMat {
        CMat::from_fn(x.nrows(), x.ncols(), |i, j| {
            if self.mask[i] && self.mask[j] {
                x[(i, j)]
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// `P X P` for a sparse matrix.
    pub fn sandwich_sparse(&self, x: &SparseOp) -> SparseOp {
        let mut coo = CooMatrix::new(x.nrows(), x.ncols());
        for (i, j, v) in x.triplet_iter() {
            if self.mask[i] && self.mask[j] {
                coo.push(i, j, *v);
            }
        }
        CsrMatrix::from(&coo)
    }
}

pub fn fock_projector(m_prime: usize, region: &[usize], basis: &FockBasis) -> Result<Projector> {
    basis.check_sites(region)?;
    for &s in region {
        if m_prime > basis.cutoff(s) {
            return Err(Error::CutoffExceeded {
                requested: m_prime,
                available: basis.cutoff(s),
            });
        }
    }
    let mask = (0..basis.dim())
        .map(|idx| {
            let occ = basis.occupation(idx);
            region.iter().all(|&s| occ[s] as usize <= m_prime)
        })
        .collect();
    Ok(Projector { mask })
}

/// A normal-ordered single-site factor `(a†)^create a^annihilate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ladder {
    pub site: usize,
    pub create: u32,
    pub annihilate: u32,
}

/// Occupation-number basis of several modes with per-mode cutoffs and an
/// optional cap on the total photon number. States are ordered like the
/// Kronecker product (site 0 most significant).
#[derive(Debug, Clone)]
pub struct FockBasis {
    cutoffs: Vec<usize>,
    total_cap: Option<usize>,
    occ: Vec<u8>,
    lookup: Vec<u32>,
    strides: Vec<usize>,
}

impl FockBasis {
    pub fn product(trunc: &TruncationSpec) -> Self {
        Self::with_cutoffs(vec![trunc.cutoff; trunc.modes], None).expect("valid truncation")
    }

    pub fn capped(trunc: &TruncationSpec, total_cap: usize) -> Result<Self> {
        Self::with_cutoffs(vec![trunc.cutoff; trunc.modes], Some(total_cap))
    }

    pub fn with_cutoffs(cutoffs: Vec<usize>, total_cap: Option<usize>) -> Result<Self> {
        if cutoffs.is_empty() || cutoffs.iter().any(|&c| c == 0 || c > 250) {
            return Err(Error::InvalidArgument(format!("bad cutoffs {cutoffs:?}")));
        }
        let modes = cutoffs.len();
        let mut strides = vec![1usize; modes];
        for s in (0..modes.saturating_sub(1)).rev() {
            strides[s] = strides[s + 1]
                .checked_mul(cutoffs[s + 1] + 1)
                .ok_or(Error::DimensionOverflow { dim: usize::MAX, limit: MAX_PRODUCT_DIM })?;
        }
        let product = strides[0] * (cutoffs[0] + 1);
        if product > MAX_PRODUCT_DIM {
            return Err(Error::DimensionOverflow { dim: product, limit: MAX_PRODUCT_DIM });
        }
        let mut occ = Vec::new();
        let mut lookup = vec![u32::MAX; product];
        let mut cur = vec![0u8; modes];
        let mut count = 0u32;
        for p in 0..product {
            let mut rem = p;
            for s in 0..modes {
                cur[s] = (rem / strides[s]) as u8;
                rem %= strides[s];
            }
            let total: usize = cur.iter().map(|&n| n as usize).sum();
            if total_cap.is_none_or(|c| total <= c) {
                occ.extend_from_slice(&cur);
                lookup[p] = count;
                count += 1;
            }
        }
        Ok(Self {
            cutoffs,
            total_cap,
            occ,
            lookup,
            strides,
        })
    }

    pub fn modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn dim(&self) -> usize {
        self.occ.len() / self.modes()
    }

    pub fn cutoff(&self, site: usize) -> usize {
        self.cutoffs[site]
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn total_cap(&self) -> Option<usize> {
        self.total_cap
    }

    pub fn is_product(&self) -> bool {
        self.total_cap.is_none()
    }

    pub fn occupation(&self, idx: usize) -> &[u8] {
        let m = self.modes();
        &self.occ[idx * m..(idx + 1) * m]
    }

    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        let mut p = 0;
        for (s, &n) in occ.iter().enumerate() {
            if n as usize > self.cutoffs[s] {
                return None;
            }
            p += n as usize * self.strides[s];
        }
        match self.lookup[p] {
            u32::MAX => None,
            i => Some(i as usize),
        }
    }

    pub fn check_sites(&self, sites: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.modes()];
        for &s in sites {
            if s >= self.modes() {
                return Err(Error::SiteOutOfRange { site: s, modes: self.modes() });
            }
            if seen[s] {
                return Err(Error::DuplicateSite(s));
            }
            seen[s] = true;
        }
        Ok(())
    }

    /// Sparse `P (Σ_t c_t Π ladders_t) P`. Factors within a term act right to left.
    pub fn build_op(&self, terms: &[(C64, Vec<Ladder>)]) -> SparseOp {
        let dim = self.dim();
        let mut coo = CooMatrix::new(dim, dim);
        let mut target = vec![0u8; self.modes()];
        for col in 0..dim {
            let src = self.occupation(col);
            for (c, ladders) in terms {
                if *c == C64::new(0.0, 0.0) {
                    continue;
                }
                target.copy_from_slice(src);
                let mut coef = 1.0;
                let mut alive = true;
                for l in ladders.iter().rev() {
                    let n = target[l.site] as i64;
                    let a = l.annihilate as i64;
                    if n < a {
                        alive = false;
                        break;
                    }
                    coef *= falling_sqrt(n as u64, a as u64);
                    let up = n - a + l.create as i64;
                    if up as usize > self.cutoffs[l.site] {
                        alive = false;
                        break;
                    }
                    coef *= falling_sqrt(up as u64, l.create as u64);
                    target[l.site] = up as u8;
                }
                if !alive {
                    continue;
                }
                if let Some(row) = self.index_of(&target) {
                    coo.push(row, col, c * coef);
                }
            }
        }
        CsrMatrix::from(&coo)
    }

    /// Embeds a dense single-mode matrix at `site` as `P (m ⊗ I) P`.
    pub fn site_op(&self, site: usize, m: &CMat) -> SparseOp {
        let dim = self.dim();
        let mut coo = CooMatrix::new(dim, dim);
        let mut target = vec![0u8; self.modes()];
        for col in 0..dim {
            let src = self.occupation(col);
            let n = src[site] as usize;
            for r in 0..m.nrows().min(self.cutoffs[site] + 1) {
                let v = m[(r, n)];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                target.copy_from_slice(src);
                target[site] = r as u8;
                if let Some(row) = self.index_of(&target) {
                    coo.push(row, col, v);
                }
            }
        }
        CsrMatrix::from(&coo)
    }

    /// Amplitudes `Π_i f_i[n_i]` of a product state.
    pub fn product_state(&self, factors: &[Vec<C64>]) -> CVec {
        CVec::from_fn(self.dim(), |idx, _| {
            self.occupation(idx)
                .iter()
                .zip(factors)
                .map(|(&n, f)| f.get(n as usize).copied().unwrap_or_default())
                .product()
        })
    }

    /// Product of unnormalized truncated coherent states.
    pub fn coherent(&self, alphas: &[C64]) -> CVec {
        let factors: Vec<Vec<C64>> = alphas
            .iter()
            .enumerate()
            .map(|(s, &a)| coherent_amplitudes(a, self.cutoffs[s]))
            .collect();
        self.product_state(&factors)
    }

    /// Reduced density matrix on `keep` (in the order given), expressed in the
    /// product basis of those sites.
    pub fn reduce(&self, rho: &CMat, keep: &[usize]) -> Result<(CMat, FockBasis)> {
        self.check_sites(keep)?;
        if keep.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let sub = FockBasis::with_cutoffs(keep.iter().map(|&s| self.cutoffs[s]).collect(), None)?;
        let traced: Vec<usize> = (0..self.modes()).filter(|s| !keep.contains(s)).collect();
        let mut groups: HashMap<Vec<u8>, Vec<(usize, usize)>> = HashMap::new();
        let mut kept = vec![0u8; keep.len()];
        for idx in 0..self.dim() {
            let occ = self.occupation(idx);
            let key: Vec<u8> = traced.iter().map(|&s| occ[s]).collect();
            for (k, &s) in keep.iter().enumerate() {
                kept[k] = occ[s];
            }
            let sub_idx = sub.index_of(&kept).expect("kept occupation within cutoffs");
            groups.entry(key).or_default().push((idx, sub_idx));
        }
        let mut out = CMat::zeros(sub.dim(), sub.dim());
        for members in groups.values() {
            for &(a, ka) in members {
                for &(b, kb) in members {
                    out[(ka, kb)] += rho[(a, b)];
                }
            }
        }
        Ok((out, sub))
    }

    /// Diagonal weight of `ρ` on states with some site at its cutoff or the
    /// total at the cap.
    pub fn boundary_weight(&self, rho: &CMat) -> f64 {
        (0..self.dim())
            .filter(|&idx| {
                let occ = self.occupation(idx);
                let total: usize = occ.iter().map(|&n| n as usize).sum();
                occ.iter().enumerate().any(|(s, &n)| n as usize == self.cutoffs[s])
                    || self.total_cap == Some(total)
            })
            .map(|idx| rho[(idx, idx)].re)
            .sum()
    }
}

/// `√(n!/(n-k)!)`.
pub fn falling_sqrt(n: u64, k: u64) -> f64 {
    (0..k).map(|i| (n - i) as f64).product::<f64>().sqrt()
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn annihilation_entries() {
        let t = TruncationSpec::new(2, 1).unwrap();
        let a = annihilation_op(&t);
        assert_eq!(a[(0, 1)], c(1.0));
        assert_abs_diff_eq!(a[(1, 2)].re, 2f64.sqrt());
        assert_eq!(a.iter().filter(|v| v.norm() > 0.0).count(), 2);
        let n = a.adjoint() * &a;
        assert!((n - number_op(&t)).max_modulus() < 1e-15);
        let vac = CVec::from_vec(vec![c(1.0), c(0.0), c(0.0)]);
        assert_eq!((&a * vac).norm(), 0.0);
    }

    #[test]
    fn projected_ccr_below_boundary() {
        for m in 1..8 {
            let t = TruncationSpec::new(m, 1).unwrap();
            let a = annihilation_op(&t);
            let comm = &a * a.adjoint() - a.adjoint() * &a;
            let basis = FockBasis::product(&t);
            let p = fock_projector(m - 1, &[0], &basis).unwrap().to_dense();
            assert!((&p * comm * &p - &p).max_modulus() < 1e-14);
        }
    }

    #[test]
    fn coherent_overlap_and_norm() {
        let t = TruncationSpec::new(30, 1).unwrap();
        let a = coherent_state(C64::new(0.5, 0.0), &t, false).amplitudes;
        let b = coherent_state(C64::new(0.3, 0.0), &t, false).amplitudes;
        assert_abs_diff_eq!(a.dotc(&b).norm_sqr(), (-0.04f64).exp(), epsilon = 1e-10);
        let t3 = TruncationSpec::new(3, 1).unwrap();
        let s = coherent_state(c(1.0), &t3, true);
        let expect = (-1f64).exp() * (1.0 + 1.0 + 0.5 + 1.0 / 6.0);
        assert_abs_diff_eq!(s.norm * s.norm, expect, epsilon = 1e-14);
        assert_abs_diff_eq!(s.amplitudes.norm(), 1.0, epsilon = 1e-12);
        let vac = coherent_state(c(0.0), &t3, false).amplitudes;
        assert_eq!(vac[0], c(1.0));
    }

    #[test]
    fn embedding() {
        let t = TruncationSpec::new(2, 2).unwrap();
        let n = number_op(&t);
        let n0 = embed_operator(&[(0, &n)], &t).unwrap();
        let basis = FockBasis::product(&t);
        let i10 = basis.index_of(&[1, 0]).unwrap();
        assert_eq!(n0[(i10, i10)], c(1.0));
        assert_eq!(embed_operator(&[], &t).unwrap(), CMat::identity(9, 9));
        let a = annihilation_op(&t);
        let aa = embed_operator(&[(0, &a), (1, &a)], &t).unwrap();
        let i11 = basis.index_of(&[1, 1]).unwrap();
        assert_eq!(aa[(0, i11)], c(1.0));
        assert!(matches!(
            embed_operator(&[(2, &a)], &t),
            Err(Error::SiteOutOfRange { .. })
        ));
    }

    #[test]
    fn sparse_build_matches_kronecker() {
        let t = TruncationSpec::new(3, 2).unwrap();
        let basis = FockBasis::product(&t);
        let a = annihilation_op(&t);
        let ad = a.adjoint();
        let dense = embed_operator(&[(0, &(&ad * &ad)), (1, &a)], &t).unwrap();
        let sparse = basis.build_op(&[(
            c(1.0),
            vec![
                Ladder { site: 0, create: 2, annihilate: 0 },
                Ladder { site: 1, create: 0, annihilate: 1 },
            ],
        )]);
        let diff = nalgebra::DMatrix::from(&sparse) - dense;
        assert!(diff.max_modulus() < 1e-14);
    }

    #[test]
    fn capped_basis_and_reduce() {
        let t = TruncationSpec::new(4, 3).unwrap();
        let b = FockBasis::capped(&t, 3).unwrap();
        assert_eq!(b.dim(), 20);
        let full = FockBasis::product(&t);
        let psi = full.coherent(&[c(0.3), C64::new(0.0, 0.2), c(0.0)]);
        let rho = &psi * psi.adjoint();
        let (red, sub) = full.reduce(&rho, &[1]).unwrap();
        assert_eq!(sub.dim(), 5);
        let single = CVec::from_vec(coherent_amplitudes(C64::new(0.0, 0.2), 4));
        let other = psi.norm_squared() / single.norm_squared();
        let expect = &single * single.adjoint() * c(other);
        assert!((red - expect).max_modulus() < 1e-14);
    }

    #[test]
    fn moments_and_sobolev() {
        let t = TruncationSpec::new(40, 1).unwrap();
        let b = FockBasis::product(&t);
        let psi = b.coherent(&[c(1.0)]);
        let rho = &psi * psi.adjoint();
        assert_abs_diff_eq!(number_moment(&rho, &b, &[0], 1).unwrap(), 2.0, epsilon = 1e-12);
        let alpha: f64 = 0.8;
        let series: f64 = (0..60)
            .map(|n| {
                (-alpha * alpha).exp() * alpha.powi(2 * n) * ((n + 1) as f64).powi(3)
                    / factorial(n as u32)
            })
            .sum();
        let psi = b.coherent(&[c(alpha)]);
        let rho = &psi * psi.adjoint();
        assert_abs_diff_eq!(number_moment(&rho, &b, &[0], 3).unwrap(), series, epsilon = 1e-9);
        let t5 = TruncationSpec::new(5, 1).unwrap();
        let b5 = FockBasis::product(&t5);
        let mut fock = CMat::zeros(6, 6);
        fock[(3, 3)] = c(1.0);
        assert_abs_diff_eq!(sobolev_norm(&fock, &b5, 2), 16.0, epsilon = 1e-10);
        assert_abs_diff_eq!(sobolev_norm(&fock, &b5, 0), 1.0, epsilon = 1e-12);
        assert!(matches!(number_moment(&fock, &b5, &[], 1), Err(Error::EmptyRegion)));
    }

    #[test]
    fn projector_properties() {
        let t = TruncationSpec::new(3, 2).unwrap();
        let b = FockBasis::product(&t);
        let p = fock_projector(3, &[0, 1], &b).unwrap();
        assert!(p.mask.iter().all(|&m| m));
        let p1 = fock_projector(1, &[0], &b).unwrap().to_dense();
        assert_eq!(&p1 * &p1, p1);
        assert!(matches!(fock_projector(4, &[0], &b), Err(Error::CutoffExceeded { .. })));
    }
}
