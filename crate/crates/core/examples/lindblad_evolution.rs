//! Evolve a two-mode state under the Hamiltonian plus engineered
//! dissipation and compare with the product formula.
//!
//! cargo run --release --example lindblad_evolution

use bosonhl::dynamics::{build_liouvillian, evolve_times, trotter_evolve, EvolveOptions, Variant};
use bosonhl::fock::{number_moment, FockBasis, TruncationSpec, C64};
use bosonhl::lattice::{random_hamiltonian, DissipatorSpec, LatticeGraph};
use bosonhl::linalg::trace_norm_hermitian;

fn main() -> bosonhl::Result<()> {
    let h = random_hamiltonian(&LatticeGraph::single_edge(), 1, 0.5, 3)?;
    let alpha = vec![C64::new(0.3, 0.0), C64::new(0.0, -0.2)];
    let dspec = DissipatorSpec::new(4, alpha.clone())?;
    let basis = FockBasis::product(&TruncationSpec::new(8, 2)?);
    let psi = basis.coherent(&alpha);
    let rho0 = &psi * psi.adjoint() / C64::new(psi.norm_squared(), 0.0);

    let l = build_liouvillian(&h, &dspec, &basis, Variant::Full)?;
    let opts = EvolveOptions::default();
    let times = [0.0, 0.25, 0.5, 1.0];
    for (t, r) in times.iter().zip(evolve_times(&rho0, &l, &times, &opts)?) {
        println!(
            "t = {t:.2}  tr = {:.12}  ⟨(N+1)²⟩ = {:.5}  boundary weight {:.1e}  via {:?}",
            r.rho.trace().re,
            number_moment(&r.rho, &basis, &[0, 1], 2)?,
            r.leakage,
            r.method
        );
    }

    let exact = evolve_times(&rho0, &l, &[1.0], &opts)?.remove(0).rho;
    for n in [1, 4, 16] {
        let approx = trotter_evolve(&rho0, &h, &dspec, &basis, 1.0, n, &opts)?;
        println!("product formula n = {n:>2}: trace distance {:.3e}", trace_norm_hermitian(&(approx - &exact)));
    }
    Ok(())
}
