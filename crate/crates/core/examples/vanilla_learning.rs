//! Single-edge learning with real-α inputs and a short evolution.
//!
//! cargo run --release --example vanilla_learning [shots]
//!
//! Without an argument the estimator values come from exact quadrature;
//! with one, that many heterodyne shots are drawn per setting.

use bosonhl::fock::C64;
use bosonhl::lattice::{EdgeCoefficients, HamiltonianSpec, LatticeGraph};
use bosonhl::learner::{end_to_end, LearnConfig, Protocol};

fn main() -> bosonhl::Result<()> {
    let mut c = EdgeCoefficients::zeros(1);
    c.set_hermitian(0, 1, 0, 1, C64::new(0.3, 0.0));
    let h = HamiltonianSpec::new(LatticeGraph::single_edge(), vec![c], 1, 1.0)?;

    let mut cfg = LearnConfig::new(Protocol::Vanilla, 1, 0.05, 0.05, 1);
    cfg.cutoff = 8;
    match std::env::args().nth(1) {
        Some(s) => cfg.shot_cap = Some(s.parse().expect("shots must be an integer")),
        None => cfg.noiseless = true,
    }
    let r = end_to_end(&h, &cfg)?;
    println!(
        "budget {:.3e} shots/setting, used {}, sensitivity {:.3e}",
        r.budget_shots, r.shots_per_setting, r.sensitivity
    );
    println!("max error {:.3e} (eps {}), success {}", r.max_error, r.eps, r.success);
    for row in r.coefficients.iter().filter(|row| row.truth_re != 0.0 || row.error > 1e-3) {
        println!("{:?}: {:+.4} {:+.4}i  truth {:+.4}", row.index, row.estimate_re, row.estimate_im, row.truth_re);
    }
    Ok(())
}
