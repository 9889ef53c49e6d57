//! Heterodyne (Husimi) samples from an evolved plan, one stream per shot
//! and edge.
//!
//! cargo run --release --example heterodyne_sampling

use bosonhl::dynamics::EvolveOptions;
use bosonhl::fock::{FockBasis, C64};
use bosonhl::lattice::{random_hamiltonian, LatticeGraph};
use bosonhl::measurement::{evolve_plan, partition_edges, run_plan, MeasurementPlan, PartitionMode};

fn main() -> bosonhl::Result<()> {
    let graph = LatticeGraph::chain(4);
    let h = random_hamiltonian(&graph, 1, 0.5, 9)?;
    let sets = partition_edges(&graph, PartitionMode::EdgeDisjoint)?;
    println!("edge-disjoint sets: {sets:?}");

    let edges = sets[0].clone();
    let mut alpha = vec![C64::new(0.0, 0.0); 4];
    for &e in &edges {
        let (i, j) = graph.edges[e];
        alpha[i] = C64::new(0.4, 0.0);
        alpha[j] = C64::new(-0.3, 0.0);
    }
    let plan = MeasurementPlan {
        plan_id: 0,
        partition_index: 0,
        edges,
        alpha,
        t: 0.1,
        phase_tag: 0,
        shots: 2000,
        seed: 1,
        projected: None,
    };
    let basis = FockBasis::with_cutoffs(vec![5; 4], Some(6))?;
    let ev = evolve_plan(&plan, &h, 4, &basis, &EvolveOptions::default())?;
    let batch = run_plan(&plan, &ev)?;
    println!("{} outcomes, acceptance {:.2}", batch.outcomes.len(), batch.acceptance_rate);
    let n = batch.outcomes.len() as f64;
    let mean_re = batch.outcomes.iter().map(|o| o.beta[0]).sum::<f64>() / n;
    println!("mean Re β_i over all edges: {mean_re:.3}");
    batch.write_csv(&graph, std::io::stdout().lock())?;
    Ok(())
}
