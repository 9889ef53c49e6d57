//! Signed-box integrals of weighted Husimi densities.

use std::f64::consts::PI;

use crate::fock::{factorial, CMat, FockBasis, C64};

/// Oriented box `∏[min(0,β_k), max(0,β_k)]`: the sign `∏ sgn(β_k)` if `x`
/// lies inside, else zero.
pub fn signed_indicator(beta: &[f64; 4], x: &[f64; 4]) -> f64 {
    let mut s = 1.0;
    for k in 0..4 {
        let b = beta[k];
        if b == 0.0 {
            return 0.0;
        }
        if b > 0.0 {
            if !(0.0..=b).contains(&x[k]) {
                return 0.0;
            }
        } else {
            if !(b..=0.0).contains(&x[k]) {
                return 0.0;
            }
            s = -s;
        }
    }
    s
}

/// Signed volume `∏ β_k`.
pub fn signed_volume(beta: &[f64; 4]) -> f64 {
    beta.iter().product()
}

fn legendre_rule() -> Vec<(f64, f64)> {
    gauss_quad::GaussLegendre::new(24)
        .expect("legendre rule")
        .as_node_weight_pairs()
        .to_vec()
}

/// `A[n, m] = ∫_0^{b_re} ∫_0^{b_im} e^{|α-z|² - |z|²} z̄^n z^m / √(n! m!) dy dx`.
pub fn mode_box_matrix(alpha: C64, b_re: f64, b_im: f64, cutoff: usize) -> CMat {
    let rule = legendre_rule();
    let mut a = CMat::zeros(cutoff + 1, cutoff + 1);
    let inv: Vec<f64> = (0..=cutoff).map(|n| 1.0 / factorial(n as u32).sqrt()).collect();
    let mut zp = vec![C64::new(1.0, 0.0); cutoff + 1];
    for &(xi, wx) in &rule {
        let x = 0.5 * b_re * (1.0 + xi);
        for &(yi, wy) in &rule {
            let y = 0.5 * b_im * (1.0 + yi);
            let z = C64::new(x, y);
            let w = 0.25 * b_re * b_im * wx * wy * (alpha.norm_sqr() - 2.0 * (alpha.conj() * z).re).exp();
            for n in 1..=cutoff {
                zp[n] = zp[n - 1] * z;
            }
            for n in 0..=cutoff {
                let left = zp[n].conj() * (w * inv[n]);
                for m in 0..=cutoff {
                    a[(n, m)] += left * zp[m] * inv[m];
                }
            }
        }
    }
    a
}

/// `∫_{R_β} e^{|α-β′|²} ⟨β′|ρ|β′⟩ d⁴β′ / π²` for a two-mode product-basis
/// state, evaluated for every pair of per-mode box corners (`pairs_j` fastest).
pub fn box_values_grid(
    rho: &CMat,
    basis: &FockBasis,
    alpha: [C64; 2],
    pairs_i: &[(f64, f64)],
    pairs_j: &[(f64, f64)],
) -> Vec<f64> {
    let (ci, cj) = (basis.cutoff(0), basis.cutoff(1));
    let occ: Vec<(usize, usize)> = (0..basis.dim())
        .map(|k| {
            let o = basis.occupation(k);
            (o[0] as usize, o[1] as usize)
        })
        .collect();
    let ai: Vec<CMat> = pairs_i.iter().map(|&(x, y)| mode_box_matrix(alpha[0], x, y, ci)).collect();
    let aj: Vec<CMat> = pairs_j.iter().map(|&(x, y)| mode_box_matrix(alpha[1], x, y, cj)).collect();
    // contract the j mode first: B[n_i, m_i] = Σ ρ[(n_i n_j),(m_i m_j)] A_j[n_j, m_j]
    let bj: Vec<CMat> = aj
        .iter()
        .map(|a| {
            let mut b = CMat::zeros(ci + 1, ci + 1);
            for (r, &(ni, nj)) in occ.iter().enumerate() {
                for (c, &(mi, mj)) in occ.iter().enumerate() {
                    b[(ni, mi)] += rho[(r, c)] * a[(nj, mj)];
                }
            }
            b
        })
        .collect();
    let mut out = Vec::with_capacity(ai.len() * bj.len());
    for a in &ai {
        for b in &bj {
            out.push(a.component_mul(b).sum().re / (PI * PI));
        }
    }
    out
}

/// Single-box version of [`box_values_grid`].
pub fn box_value(rho: &CMat, basis: &FockBasis, alpha: [C64; 2], beta: &[f64; 4]) -> f64 {
    box_values_grid(rho, basis, alpha, &[(beta[0], beta[1])], &[(beta[2], beta[3])])[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::TruncationSpec;

    #[test]
    fn indicator_orientation() {
        let b = [0.5, -0.5, 0.2, 0.3];
        assert_eq!(signed_indicator(&b, &[0.1, -0.1, 0.1, 0.1]), -1.0);
        assert_eq!(signed_indicator(&b, &[0.1, 0.1, 0.1, 0.1]), 0.0);
        assert_eq!(signed_indicator(&[0.0, 1.0, 1.0, 1.0], &[0.0, 0.5, 0.5, 0.5]), 0.0);
        assert!((signed_volume(&b) + 0.015).abs() < 1e-15);
    }

    #[test]
    fn weighted_vacuum_integrates_to_volume() {
        let basis = FockBasis::product(&TruncationSpec::new(3, 2).unwrap());
        let mut vac = CMat::zeros(basis.dim(), basis.dim());
        vac[(0, 0)] = C64::new(1.0, 0.0);
        let beta = [0.4, -0.3, 0.5, 0.2];
        let zero = [C64::new(0.0, 0.0); 2];
        let v = box_value(&vac, &basis, zero, &beta);
        assert!((v - signed_volume(&beta) / (PI * PI)).abs() < 1e-14);
        // coherent input with matching shift: integrand is identically 1/π²
        let alpha = [C64::new(0.3, 0.0), C64::new(-0.2, 0.0)];
        let big = FockBasis::product(&TruncationSpec::new(20, 2).unwrap());
        let psi = big.coherent(&alpha);
        let rho = &psi * psi.adjoint();
        let v = box_value(&rho, &big, alpha, &beta);
        assert!((v - signed_volume(&beta) / (PI * PI)).abs() < 1e-12);
    }
}
