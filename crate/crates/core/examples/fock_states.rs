//! Truncated Fock space basics: coherent states, moments, capped bases.
//!
//! cargo run --release --example fock_states

use bosonhl::fock::{coherent_state, number_moment, projected_norm_sq, sobolev_norm, FockBasis, TruncationSpec, C64};

fn main() -> bosonhl::Result<()> {
    let alpha = C64::new(1.2, -0.4);
    for m in [2, 4, 8, 16] {
        println!("M = {m:>2}: kept weight of |α⟩ = {:.6}", projected_norm_sq(alpha, m));
    }
    let trunc = TruncationSpec::new(10, 1)?;
    let psi = coherent_state(alpha, &trunc, true).amplitudes;
    let basis = FockBasis::product(&trunc);
    let rho = &psi * psi.adjoint();
    for k in 1..=3 {
        println!("tr[ρ (N+1)^{k}] = {:.4}", number_moment(&rho, &basis, &[0], k)?);
    }
    println!("Sobolev norm, k = 2: {:.4}", sobolev_norm(&rho, &basis, 2));

    // four modes, at most 3 photons in total
    let capped = FockBasis::with_cutoffs(vec![3; 4], Some(3))?;
    println!("capped basis: {} states (product would be {})", capped.dim(), 4usize.pow(4));
    Ok(())
}
