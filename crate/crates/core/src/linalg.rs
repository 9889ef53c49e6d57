//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DVector, SymmetricEigen};

use crate::fock::{CMat, C64};

/// Eigenvalues (ascending order not guaranteed) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMat) -> (DVector<f64>, CMat) {
    let h = hermitize(m);
    let e = SymmetricEigen::new(h.clone());
    if e.eigenvalues.iter().all(|v| v.is_finite()) {
        return (e.eigenvalues, e.eigenvectors);
    }
    // subnormal entries can stall the QR sweeps; flush them and retry
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let flushed = h.map(|z| if z.norm() < 1e-30 * scale { C64::new(0.0, 0.0) } else { z });
    let e = SymmetricEigen::new(flushed);
    (e.eigenvalues, e.eigenvectors)
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace_norm_hermitian(m: &CMat) -> f64 {
    hermitian_eigen(m).0.iter().map(|x| x.abs()).sum()
}

pub fn trace_norm(m: &CMat) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// Largest singular value.
pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

pub fn expm(m: &CMat) -> CMat {
    m.exp()
}

pub fn max_hermiticity_defect(m: &CMat) -> f64 {
    (m - m.adjoint()).max_modulus()
}

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest entry modulus of a complex matrix or vector.
pub trait MaxAbs {
    fn max_modulus(&self) -> f64;
}

impl<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<C64, R, C>> MaxAbs
    for nalgebra::Matrix<C64, R, C, S>
{
    fn max_modulus(&self) -> f64 {
        self.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}
