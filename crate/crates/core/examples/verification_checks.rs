//! Norm bounds, coherent Sobolev bounds and moment stability under pumping.
//!
//! cargo run --release --example verification_checks

use bosonhl::dynamics::{EvolveOptions, Method};
use bosonhl::fock::{CMat, FockBasis, TruncationSpec, C64};
use bosonhl::lattice::{DissipatorSpec, EdgeCoefficients, HamiltonianSpec, LatticeGraph};
use bosonhl::verify::{check_coherent_sobolev, check_moment_stability, check_norm_bounds, MomentCheck};

fn main() -> bosonhl::Result<()> {
    let mut c = EdgeCoefficients::zeros(1);
    c.set_hermitian(1, 0, 1, 0, C64::new(0.4, 0.0));
    let h = HamiltonianSpec::new(LatticeGraph::single_edge(), vec![c], 1, 1.0)?;
    let dspec = DissipatorSpec::vacuum(6, 2);

    let norms = check_norm_bounds(&h, &dspec, &[2, 4, 8])?;
    for row in &norms.rows {
        println!("{:<10} M = {:>2}: {:.3e} <= {:.3e}", row.label, row.param, row.measured, row.bound.unwrap_or(f64::NAN));
    }
    let sob = check_coherent_sobolev(&[0.0, 0.5, 1.0], &[2, 4], 120)?;
    println!("sobolev pass: {}", sob.pass);

    let basis = FockBasis::product(&TruncationSpec::new(14, 2)?);
    let mut rho0 = CMat::zeros(basis.dim(), basis.dim());
    rho0[(0, 0)] = C64::new(1.0, 0.0);
    let mut cfg = MomentCheck {
        k: 2,
        times: (0..=8).map(|k| 0.25 * k as f64).collect(),
        region: vec![0, 1],
        rate_multiple: 1.0,
        leakage_tol: 1e-6,
        dissipation: true,
    };
    let opts = EvolveOptions {
        method: Method::SplitStep,
        ..EvolveOptions::default()
    };
    let damped = check_moment_stability(&h, &dspec, &basis, &rho0, &cfg, &opts)?;
    cfg.dissipation = false;
    let free = check_moment_stability(&h, &dspec, &basis, &rho0, &cfg, &EvolveOptions { method: Method::RungeKutta, ..opts })?;
    for r in [&damped, &free] {
        println!("{:<18} rate {:+.3}  pass {}  {:?}", r.name, r.summary["rate"], r.pass, r.notes);
    }
    Ok(())
}
