//! Build a lattice Hamiltonian, inspect its g-polynomial and save it.
//!
//! cargo run --release --example lattice_model

use bosonhl::fock::C64;
use bosonhl::lattice::{
    coefficients_from_g, g_poly_eval, g_polynomial, random_hamiltonian, DissipatorSpec, LatticeGraph, ModelDocument,
};

fn main() -> bosonhl::Result<()> {
    let graph = LatticeGraph::chain(3);
    let h = random_hamiltonian(&graph, 2, 1.0, 42)?;
    println!("{} edges, d = {}, {} terms on edge 0", graph.edges.len(), h.d, h.edge_terms(0).len());

    let g = g_polynomial(&h.coeffs[0]);
    let alpha = [C64::new(0.3, 0.1), C64::new(-0.2, 0.0), C64::new(0.1, 0.4)];
    let beta = [C64::new(0.5, -0.2), C64::new(0.0, 0.3)];
    println!("g_0(α, β) = {:.6}", g_poly_eval(&h, 0, &alpha, beta));

    let back = coefficients_from_g(&g, h.d)?;
    println!("coefficient round trip error: {:.2e}", back.max_diff(&h.coeffs[0]));

    let doc = ModelDocument::from_specs(&h, &DissipatorSpec::vacuum(6, 3));
    println!("{}", serde_json::to_string(&doc)?);
    Ok(())
}
