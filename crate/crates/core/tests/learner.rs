use bosonhl::dynamics::EvolveOptions;
use bosonhl::fock::{CMat, FockBasis, TruncationSpec, C64};
use bosonhl::lattice::{random_hamiltonian, EdgeCoefficients, HamiltonianSpec, LatticeGraph};
use bosonhl::learner::refined::offset_self_check;
use bosonhl::learner::vanilla::vanilla_sensitivity;
use bosonhl::learner::{
    check_isolated_sets, end_to_end, vanilla_estimates, EstimateSource, LearnConfig, Protocol, RefinedPlan, VanillaPlan,
};
use bosonhl::measurement::{evolve_plan, partition_edges, run_plan, HusimiSampler, MeasurementPlan, PartitionMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pair_model() -> HamiltonianSpec {
    let mut c = EdgeCoefficients::zeros(1);
    c.set_hermitian(0, 1, 0, 1, C64::new(0.3, 0.0));
    HamiltonianSpec::new(LatticeGraph::single_edge(), vec![c], 1, 1.0).unwrap()
}

#[test]
fn sampled_tables_are_seed_deterministic() {
    let h = pair_model();
    let basis = FockBasis::product(&TruncationSpec::new(6, 2).unwrap());
    let mut plan = VanillaPlan::new(1, 0.05, 4);
    let src = EstimateSource::Sampled { shots: 200 };
    let (a, _) = vanilla_estimates(&plan, &h, &basis, src).unwrap();
    let (b, _) = vanilla_estimates(&plan, &h, &basis, src).unwrap();
    assert!(a.is_complete());
    assert_eq!(a, b);
    plan.seed += 1;
    let (c, _) = vanilla_estimates(&plan, &h, &basis, src).unwrap();
    assert_ne!(a, c);
}

#[test]
fn sampled_mean_matches_quadrature() {
    let h = pair_model();
    let basis = FockBasis::product(&TruncationSpec::new(6, 2).unwrap());
    let plan = VanillaPlan::new(1, 0.05, 4);
    let shots = 100_000;
    let (exact, _) = vanilla_estimates(&plan, &h, &basis, EstimateSource::Exact).unwrap();
    let (sampled, stats) = vanilla_estimates(&plan, &h, &basis, EstimateSource::Sampled { shots }).unwrap();
    assert_eq!(stats.total_shots, (shots * exact.n_alpha) as u64);
    // summands lie in [-R, R] / t
    let sigma = plan.range() / plan.t / (shots as f64).sqrt();
    let mut worst: f64 = 0.0;
    for a in 0..exact.n_alpha {
        for b in 0..exact.n_beta {
            worst = worst.max((exact.get(0, a, 0, b) - sampled.get(0, a, 0, b)).abs());
        }
    }
    assert!(worst <= 3.0 * sigma, "deviation {worst} vs 3σ = {}", 3.0 * sigma);
}

#[test]
fn noiseless_vanilla_meets_eps_and_budget_is_reported() {
    let mut cfg = LearnConfig::new(Protocol::Vanilla, 1, 0.05, 0.05, 0);
    cfg.cutoff = 8;
    cfg.noiseless = true;
    let r = end_to_end(&pair_model(), &cfg).unwrap();
    assert!(r.max_error < 1e-3, "{}", r.max_error);
    assert!(r.budget_shots.is_finite() && r.budget_shots > 0.0);
    assert!((r.sensitivity - vanilla_sensitivity(&cfg.vanilla).unwrap()).abs() < 1e-9 * r.sensitivity);
}

#[test]
fn refined_offset_vanishes_on_zero_hamiltonian() {
    let plan = RefinedPlan::new(1, 4);
    let basis = FockBasis::product(&TruncationSpec::new(plan.min_cutoff(), 2).unwrap());
    let residual = offset_self_check(&plan, &LatticeGraph::single_edge(), &basis).unwrap();
    assert!(residual < plan.offset_tol);
}

#[test]
fn coupled_edges_cannot_share_a_vanilla_set() {
    let g = LatticeGraph::chain(4);
    assert!(check_isolated_sets(&g, &[vec![0, 2]]).is_err());
    let g5 = LatticeGraph::chain(5);
    assert!(check_isolated_sets(&g5, &[vec![0, 3]]).is_ok());
}

#[test]
fn product_state_edges_sample_independently() {
    let graph = LatticeGraph::chain(4);
    let h = HamiltonianSpec::zero(graph.clone(), 1);
    let sets = partition_edges(&graph, PartitionMode::EdgeDisjoint).unwrap();
    let edges = sets.iter().find(|s| s.len() == 2).unwrap().clone();
    let mut alpha = vec![C64::new(0.0, 0.0); 4];
    for &e in &edges {
        alpha[graph.edges[e].0] = C64::new(0.5, 0.0);
    }
    let shots = 20_000;
    let plan = MeasurementPlan {
        plan_id: 3,
        partition_index: 0,
        edges: edges.clone(),
        alpha,
        t: 0.0,
        phase_tag: 0,
        shots,
        seed: 11,
        projected: None,
    };
    let basis = FockBasis::product(&TruncationSpec::new(4, 4).unwrap());
    let ev = evolve_plan(&plan, &h, 4, &basis, &EvolveOptions::default()).unwrap();
    let batch = run_plan(&plan, &ev).unwrap();
    let pick = |e: usize| -> Vec<f64> { batch.outcomes.iter().filter(|o| o.edge == e).map(|o| o.beta[0]).collect() };
    let (x, y) = (pick(edges[0]), pick(edges[1]));
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(&x), mean(&y));
    let cov = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / shots as f64;
    let sd = |v: &[f64], m: f64| (v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / shots as f64).sqrt();
    let corr = cov / (sd(&x, mx) * sd(&y, my));
    assert!(corr.abs() < 3.0 / (shots as f64).sqrt(), "correlation {corr}");
}

#[test]
fn sampler_acceptance_stays_above_five_percent() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for m in [2usize, 6, 10] {
        let basis = FockBasis::product(&TruncationSpec::new(m, 1).unwrap());
        let n = basis.dim();
        let g = CMat::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let rho = &g * g.adjoint();
        let rho = &rho / rho.trace();
        let s = HusimiSampler::new(&rho, &basis).unwrap();
        for _ in 0..2000 {
            s.sample(&mut rng).unwrap();
        }
        assert!(s.acceptance_rate() >= 0.05, "M = {m}: {}", s.acceptance_rate());
    }
}

#[test]
fn random_models_reconstruct_without_noise() {
    let h = random_hamiltonian(&LatticeGraph::single_edge(), 1, 0.5, 4).unwrap();
    let mut cfg = LearnConfig::new(Protocol::Vanilla, 1, 0.05, 0.05, 0);
    cfg.cutoff = 8;
    cfg.noiseless = true;
    let r = end_to_end(&h, &cfg).unwrap();
    assert!(r.success, "{}", r.max_error);
}
