//! Robust polynomial recovery and derivative estimates from noisy values.
//!
//! cargo run --release --example chebyshev_fitting

use bosonhl::polyfit::{
    chebyshev_arc_nodes, derivative_at_zero_time, poly_derivative_bound, poly_derivatives, robust_cheb_fit,
    NoisyEvaluationTable,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> bosonhl::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let sigma = 1e-3;
    let f = |x: f64| 0.5 - x + 2.0 * x.powi(3) - 0.7 * x.powi(5);

    let xs = chebyshev_arc_nodes(24);
    let ys: Vec<f64> = xs.iter().map(|&x| f(x) + rng.random_range(-sigma..sigma)).collect();
    let fit = robust_cheb_fit(&NoisyEvaluationTable::univariate(&xs, &ys, sigma), 5)?;
    let sup = (0..=400).map(|k| -1.0 + k as f64 / 200.0).map(|x| (fit.eval(x) - f(x)).abs()).fold(0.0, f64::max);
    println!("sup error {sup:.2e} against noise {sigma:.0e}");

    // mixed partials of a 2-variable cubic
    let g = |x: &[f64]| x[0] * x[1] - 0.5 * x[0].powi(2) * x[1] + 0.25 * x[1].powi(3);
    let table = poly_derivatives(g, 2, 3, 2)?;
    println!("∂x∂y at 0: {:.6} (exact 1)", table[&vec![1u8, 1]]);
    println!("bound per unit noise: {:.1}", poly_derivative_bound(3, 2, 2));

    let slope = derivative_at_zero_time(|t| 0.2 + 1.5 * t - 3.0 * t * t, 2)?;
    println!("d/dt at 0: {slope:.9} (exact 1.5)");
    Ok(())
}
