//! Projected inputs, matched dissipation and time-derivative extraction on
//! one edge, with exact estimator values.
//!
//! cargo run --release --example refined_learning

use bosonhl::fock::FockBasis;
use bosonhl::lattice::{random_hamiltonian, LatticeGraph};
use bosonhl::learner::refined::offset_self_check;
use bosonhl::learner::{end_to_end, LearnConfig, Protocol};

fn main() -> bosonhl::Result<()> {
    let graph = LatticeGraph::single_edge();
    let h = random_hamiltonian(&graph, 1, 0.5, 17)?;
    let mut cfg = LearnConfig::new(Protocol::Refined, 1, 0.05, 0.05, 0);
    cfg.noiseless = true;

    let basis = FockBasis::with_cutoffs(vec![cfg.cutoff; 2], None)?;
    let residual = offset_self_check(&cfg.refined, &graph, &basis)?;
    println!("offset residual at H = 0: {residual:.2e}");

    let r = end_to_end(&h, &cfg)?;
    println!("max error {:.3e}, budget {:.3e} shots/setting", r.max_error, r.budget_shots);
    println!("{} settings, max leakage {:.1e}", r.stats.settings, r.stats.max_leakage);
    Ok(())
}
