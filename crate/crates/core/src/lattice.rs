//! Lattice graphs, two-body bosonic Hamiltonians and photon-driven dissipators.
//!
//! An edge `(i, j)` is stored oriented: in `λ_{kℓk′ℓ′}` the pair `(k, ℓ)`
//! belongs to `i` and `(k′, ℓ′)` to `j`.

use std::collections::VecDeque;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{annihilation_op, embed_operator, factorial, CMat, FockBasis, Ladder, SparseOp, TruncationSpec, C64};
use crate::poly::Poly;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeGraph {
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    pub coords: Option<Vec<Vec<i64>>>,
    pub max_degree: usize,
}

impl LatticeGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>, coords: Option<Vec<Vec<i64>>>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut deg = vec![0usize; n];
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return Err(Error::SiteOutOfRange { site: a.max(b), modes: n });
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop at {a}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidArgument(format!("duplicate edge ({a},{b})")));
            }
            deg[a] += 1;
            deg[b] += 1;
        }
        if let Some(c) = &coords {
            if c.len() != n {
                return Err(Error::InvalidArgument("one coordinate per vertex required".into()));
            }
        }
        Ok(Self {
            vertices: (0..n).collect(),
            edges,
            coords,
            max_degree: deg.into_iter().max().unwrap_or(0),
        })
    }

    /// Path `0 - 1 - ... - (n-1)` with 1-D coordinates.
    pub fn chain(n: usize) -> Self {
        let edges = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        let coords = (0..n).map(|i| vec![i as i64]).collect();
        Self::new(n, edges, Some(coords)).expect("chain is valid")
    }

    pub fn single_edge() -> Self {
        Self::chain(2)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let g = Self::new(self.vertices.len(), self.edges.clone(), self.coords.clone())?;
        if g.max_degree != self.max_degree {
            return Err(Error::InvalidArgument("max_degree mismatch".into()));
        }
        Ok(())
    }

    /// Graph distance from every vertex to the set `sources`.
    pub fn distances_from(&self, sources: &[usize]) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n_vertices()];
        let mut q = VecDeque::new();
        for &s in sources {
            dist[s] = 0;
            q.push_back(s);
        }
        while let Some(v) = q.pop_front() {
            for w in self.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    q.push_back(w);
                }
            }
        }
        dist
    }

    /// Vertices within graph distance `r` of the edge.
    pub fn ball_around_edge(&self, e: usize, r: usize) -> Vec<usize> {
        let (a, b) = self.edges[e];
        self.distances_from(&[a, b])
            .into_iter()
            .enumerate()
            .filter(|&(_, d)| d <= r)
            .map(|(v, _)| v)
            .collect()
    }

    /// Edges with both endpoints in `region`.
    pub fn edges_within(&self, region: &[usize]) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&k| {
                let (a, b) = self.edges[k];
                region.contains(&a) && region.contains(&b)
            })
            .collect()
    }
}

fn tensor_index(d: usize, k: usize, l: usize, k2: usize, l2: usize) -> usize {
    ((k * (d + 1) + l) * (d + 1) + k2) * (d + 1) + l2
}

/// Coefficient tensor `λ_{kℓk′ℓ′}`, indices in `[0, d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeCoefficients {
    pub d: usize,
    values: Vec<C64>,
}

impl EdgeCoefficients {
    pub fn zeros(d: usize) -> Self {
        Self {
            d,
            values: vec![C64::new(0.0, 0.0); (d + 1).pow(4)],
        }
    }

    pub fn get(&self, k: usize, l: usize, k2: usize, l2: usize) -> C64 {
        if k > self.d || l > self.d || k2 > self.d || l2 > self.d {
            return C64::new(0.0, 0.0);
        }
        self.values[tensor_index(self.d, k, l, k2, l2)]
    }

    pub fn set(&mut self, k: usize, l: usize, k2: usize, l2: usize, v: C64) {
        self.values[tensor_index(self.d, k, l, k2, l2)] = v;
    }

    /// Sets `λ_{kℓk′ℓ′} = v` and its Hermitian partner `λ_{ℓkℓ′k′} = v̄`.
    pub fn set_hermitian(&mut self, k: usize, l: usize, k2: usize, l2: usize, v: C64) {
        self.set(k, l, k2, l2, v);
        self.set(l, k, l2, k2, v.conj());
    }

    /// Indices that may carry a nonzero coefficient (no on-site terms).
    pub fn admissible(d: usize) -> Vec<[usize; 4]> {
        let mut out = Vec::new();
        for k in 0..=d {
            for l in 0..=d {
                for k2 in 0..=d {
                    for l2 in 0..=d {
                        if (k, l) != (0, 0) && (k2, l2) != (0, 0) {
                            out.push([k, l, k2, l2]);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = ([usize; 4], C64)> + '_ {
        let d = self.d;
        Self::admissible(d)
            .into_iter()
            .map(move |[k, l, k2, l2]| ([k, l, k2, l2], self.get(k, l, k2, l2)))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_diff(&self, other: &EdgeCoefficients) -> f64 {
        let d = self.d.max(other.d);
        let mut m: f64 = 0.0;
        for k in 0..=d {
            for l in 0..=d {
                for k2 in 0..=d {
                    for l2 in 0..=d {
                        m = m.max((self.get(k, l, k2, l2) - other.get(k, l, k2, l2)).norm());
                    }
                }
            }
        }
        m
    }

    /// Projects onto the valid set: Hermitian pairs averaged, on-site terms zeroed.
    pub fn symmetrized(&self) -> Self {
        let mut out = Self::zeros(self.d);
        for [k, l, k2, l2] in Self::admissible(self.d) {
            let v = 0.5 * (self.get(k, l, k2, l2) + self.get(l, k, l2, k2).conj());
            out.set(k, l, k2, l2, v);
        }
        out
    }

    pub fn validate(&self, l_bound: f64, tol: f64) -> Result<()> {
        let d = self.d;
        for k in 0..=d {
            for l in 0..=d {
                for k2 in 0..=d {
                    for l2 in 0..=d {
                        let v = self.get(k, l, k2, l2);
                        if ((k, l) == (0, 0) || (k2, l2) == (0, 0)) && v.norm() > tol {
                            return Err(Error::InvalidArgument(format!(
                                "on-site coefficient ({k},{l},{k2},{l2}) is nonzero"
                            )));
                        }
                        if (v - self.get(l, k, l2, k2).conj()).norm() > tol {
                            return Err(Error::InvalidArgument(format!(
                                "coefficient ({k},{l},{k2},{l2}) violates Hermiticity"
                            )));
                        }
                        if v.norm() > l_bound + tol {
                            return Err(Error::InvalidArgument(format!(
                                "|λ({k},{l},{k2},{l2})| = {} exceeds L = {l_bound}",
                                v.norm()
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    pub graph: LatticeGraph,
    pub coeffs: Vec<EdgeCoefficients>,
    pub d: usize,
    pub l_bound: f64,
}

impl HamiltonianSpec {
    pub fn new(graph: LatticeGraph, coeffs: Vec<EdgeCoefficients>, d: usize, l_bound: f64) -> Result<Self> {
        let spec = Self {
            graph,
            coeffs,
            d,
            l_bound,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn zero(graph: LatticeGraph, d: usize) -> Self {
        let coeffs = vec![EdgeCoefficients::zeros(d); graph.edges.len()];
        Self {
            graph,
            coeffs,
            d,
            l_bound: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.graph.validate()?;
        if self.coeffs.len() != self.graph.edges.len() {
            return Err(Error::InvalidArgument("one coefficient tensor per edge required".into()));
        }
        for c in &self.coeffs {
            if c.d != self.d {
                return Err(Error::DegreeMismatch(format!("edge tensor degree {} != {}", c.d, self.d)));
            }
            c.validate(self.l_bound, 1e-12)?;
        }
        Ok(())
    }

    pub fn n_modes(&self) -> usize {
        self.graph.n_vertices()
    }

    /// Terms `λ (a_i†)^k a_i^ℓ (a_j†)^{k′} a_j^{ℓ′}` of one edge for the sparse builder.
    pub fn edge_terms(&self, e: usize) -> Vec<(C64, Vec<Ladder>)> {
        let (i, j) = self.graph.edges[e];
        self.coeffs[e]
            .iter()
            .filter(|(_, v)| v.norm() > 0.0)
            .map(|([k, l, k2, l2], v)| {
                (
                    v,
                    vec![
                        Ladder { site: i, create: k as u32, annihilate: l as u32 },
                        Ladder { site: j, create: k2 as u32, annihilate: l2 as u32 },
                    ],
                )
            })
            .collect()
    }

    /// Sparse `Σ_{e∈edges} P H_e P` on a basis.
    pub fn operator(&self, basis: &FockBasis, edges: &[usize]) -> SparseOp {
        let terms: Vec<_> = edges.iter().flat_map(|&e| self.edge_terms(e)).collect();
        basis.build_op(&terms)
    }

    pub fn full_operator(&self, basis: &FockBasis) -> SparseOp {
        let all: Vec<usize> = (0..self.graph.edges.len()).collect();
        self.operator(basis, &all)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissipatorSpec {
    pub p: u32,
    pub alpha: Vec<C64>,
}

impl DissipatorSpec {
    pub fn new(p: u32, alpha: Vec<C64>) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidArgument("dissipation order p must be >= 1".into()));
        }
        Ok(Self { p, alpha })
    }

    pub fn vacuum(p: u32, modes: usize) -> Self {
        Self {
            p,
            alpha: vec![C64::new(0.0, 0.0); modes],
        }
    }

    /// Checks amplitude bound `η` and, for the refined protocol, `p ≥ 2d+2`.
    /// Returns a warning string when the order is too low for that protocol.
    pub fn check(&self, modes: usize, eta: f64, d: usize, refined: bool) -> Result<Option<String>> {
        if self.alpha.len() != modes {
            return Err(Error::InvalidArgument(format!(
                "dissipator has {} amplitudes for {modes} modes",
                self.alpha.len()
            )));
        }
        if let Some(a) = self.alpha.iter().find(|a| a.norm() > eta) {
            return Err(Error::InvalidArgument(format!("|α| = {} exceeds η = {eta}", a.norm())));
        }
        if refined && (self.p as usize) < 2 * d + 2 {
            return Ok(Some(format!("p = {} < 2d+2 = {}", self.p, 2 * d + 2)));
        }
        Ok(None)
    }
}

/// Uniform draws in the complex disk of radius `L`, then projected onto the
/// Hermitian, on-site-free subspace.
pub fn random_hamiltonian(graph: &LatticeGraph, d: usize, l_bound: f64, seed: u64) -> Result<HamiltonianSpec> {
    if d < 1 {
        return Err(Error::InvalidArgument("degree d must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = Vec::with_capacity(graph.edges.len());
    for _ in &graph.edges {
        let mut raw = EdgeCoefficients::zeros(d);
        for [k, l, k2, l2] in EdgeCoefficients::admissible(d) {
            let r = l_bound * rng.random::<f64>().sqrt();
            let th = std::f64::consts::TAU * rng.random::<f64>();
            raw.set(k, l, k2, l2, C64::from_polar(r, th));
        }
        coeffs.push(raw.symmetrized());
    }
    HamiltonianSpec::new(graph.clone(), coeffs, d, l_bound)
}

/// Dense two-mode `H_e` on a `(cutoff+1)²` space.
pub fn build_edge_hamiltonian(coeffs: &EdgeCoefficients, trunc: &TruncationSpec) -> Result<CMat> {
    if trunc.cutoff < coeffs.d {
        return Err(Error::InvalidArgument(format!(
            "cutoff {} below degree {}",
            trunc.cutoff, coeffs.d
        )));
    }
    let t1 = TruncationSpec::new(trunc.cutoff, 1)?;
    let t2 = TruncationSpec::new(trunc.cutoff, 2)?;
    let a = annihilation_op(&t1);
    let ad = a.adjoint();
    let pw = |m: &CMat, n: usize| -> CMat {
        let mut out = CMat::identity(m.nrows(), m.ncols());
        for _ in 0..n {
            out = &out * m;
        }
        out
    };
    let n = t2.dim();
    let mut h = CMat::zeros(n, n);
    for ([k, l, k2, l2], v) in coeffs.iter() {
        if v.norm() == 0.0 {
            continue;
        }
        let oi = pw(&ad, k) * pw(&a, l);
        let oj = pw(&ad, k2) * pw(&a, l2);
        h += embed_operator(&[(0, &oi), (1, &oj)], &t2)? * v;
    }
    Ok(h)
}

/// `g_e(α, β)` from all edges touching `e`; `alpha` is indexed by vertex.
pub fn g_poly_eval(spec: &HamiltonianSpec, e: usize, alpha: &[C64], beta: [C64; 2]) -> C64 {
    let (i, j) = spec.graph.edges[e];
    let mut total = C64::new(0.0, 0.0);
    for (f, &(u, w)) in spec.graph.edges.iter().enumerate() {
        let touches = [u, w].iter().any(|x| *x == i || *x == j);
        if !touches {
            continue;
        }
        // ⟨α|H_f|β_e α_rest⟩ uses ᾱ^k on the left and β^ℓ (or α^ℓ) on the right;
        // the reversed ordering is its complex conjugate structure.
        let left_right = |v: usize| -> (C64, C64, C64, C64) {
            if v == i {
                (alpha[v].conj(), beta[0], beta[0].conj(), alpha[v])
            } else if v == j {
                (alpha[v].conj(), beta[1], beta[1].conj(), alpha[v])
            } else {
                (alpha[v].conj(), alpha[v], alpha[v].conj(), alpha[v])
            }
        };
        let (lu, ru, lu2, ru2) = left_right(u);
        let (lw, rw, lw2, rw2) = left_right(w);
        for ([k, l, k2, l2], v) in spec.coeffs[f].iter() {
            if v.norm() == 0.0 {
                continue;
            }
            let first = lu.powi(k as i32) * ru.powi(l as i32) * lw.powi(k2 as i32) * rw.powi(l2 as i32);
            let second = lu2.powi(k as i32) * ru2.powi(l as i32) * lw2.powi(k2 as i32) * rw2.powi(l2 as i32);
            total += v * (first - second);
        }
    }
    total
}

/// Variable layout of [`g_polynomial`]:
/// `[α_iR, α_iI, α_jR, α_jI, β_iR, β_iI, β_jR, β_jI]`.
pub const G_VARS: usize = 8;

/// `g_e` as a polynomial in eight real variables, with `α = 0` off the edge.
pub fn g_polynomial(coeffs: &EdgeCoefficients) -> Poly {
    let n = G_VARS;
    let ai = Poly::complex_var(n, 0, 1);
    let aj = Poly::complex_var(n, 2, 3);
    let bi = Poly::complex_var(n, 4, 5);
    let bj = Poly::complex_var(n, 6, 7);
    let aic = Poly::conj_var(n, 0, 1);
    let ajc = Poly::conj_var(n, 2, 3);
    let bic = Poly::conj_var(n, 4, 5);
    let bjc = Poly::conj_var(n, 6, 7);
    let mut g = Poly::zero(n);
    for ([k, l, k2, l2], v) in coeffs.iter() {
        if v.norm() == 0.0 {
            continue;
        }
        let (k, l, k2, l2) = (k as u32, l as u32, k2 as u32, l2 as u32);
        let first = &(&aic.pow(k) * &ajc.pow(k2)) * &(&bi.pow(l) * &bj.pow(l2));
        let second = &(&bic.pow(k) * &bjc.pow(k2)) * &(&ai.pow(l) * &aj.pow(l2));
        g = g + (first - second).scale(v);
    }
    g.prune(0.0)
}

/// Restriction of an eight-variable `g` to real `α_i, α_j` and `β = e^{-iθ} x`
/// with real `x`, giving a polynomial in `[α_i, α_j, x_i, x_j]`.
pub fn restrict_real(g: &Poly, theta: f64) -> Poly {
    let (c, s) = (theta.cos(), theta.sin());
    let forms = vec![
        vec![(0, 1.0)],
        vec![],
        vec![(1, 1.0)],
        vec![],
        vec![(2, c)],
        vec![(2, -s)],
        vec![(3, c)],
        vec![(3, -s)],
    ];
    g.compose_linear(4, &forms)
}

/// Recovers `λ` from the mixed derivatives of `g` at zero.
pub fn coefficients_from_g(g: &Poly, d: usize) -> Result<EdgeCoefficients> {
    if g.nvars() != G_VARS {
        return Err(Error::DegreeMismatch(format!("expected {G_VARS} variables, got {}", g.nvars())));
    }
    if let Some(&deg) = g.degrees().iter().max() {
        if deg as usize > d {
            return Err(Error::DegreeMismatch(format!("g has degree {deg} > d = {d}")));
        }
    }
    let plain = restrict_real(g, 0.0);
    let mut rotated: Vec<Option<Poly>> = vec![None; 2 * d + 1];
    let mut out = EdgeCoefficients::zeros(d);
    let two_i = C64::new(0.0, 2.0);
    for [k, l, k2, l2] in EdgeCoefficients::admissible(d) {
        if l + l2 == 0 {
            continue;
        }
        let orders = [k as u8, k2 as u8, l as u8, l2 as u8];
        let fact = factorial(k as u32) * factorial(l as u32) * factorial(k2 as u32) * factorial(l2 as u32);
        let im = plain.derivative_at_zero(&orders) / (two_i * fact);
        let rot = rotated[l + l2].get_or_insert_with(|| {
            restrict_real(g, std::f64::consts::PI / (2.0 * (l + l2) as f64))
        });
        let re = -rot.derivative_at_zero(&orders) / (two_i * fact);
        out.set(k, l, k2, l2, C64::new(re.re, im.re));
    }
    for [k, l, k2, l2] in EdgeCoefficients::admissible(d) {
        if l + l2 == 0 {
            let partner = out.get(l, k, l2, k2);
            out.set(k, l, k2, l2, partner.conj());
        }
    }
    Ok(out)
}

/// `⟨u u′|H_e|v v′⟩` in the untruncated space for `u, u′, v, v′ ≤ u_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixElementTable {
    pub u_max: usize,
    values: Vec<C64>,
}

impl MatrixElementTable {
    pub fn zeros(u_max: usize) -> Self {
        Self {
            u_max,
            values: vec![C64::new(0.0, 0.0); (u_max + 1).pow(4)],
        }
    }

    fn idx(&self, u: usize, u2: usize, v: usize, v2: usize) -> usize {
        tensor_index(self.u_max, u, u2, v, v2)
    }

    pub fn get(&self, u: usize, u2: usize, v: usize, v2: usize) -> C64 {
        self.values[self.idx(u, u2, v, v2)]
    }

    pub fn set(&mut self, u: usize, u2: usize, v: usize, v2: usize, x: C64) {
        let i = self.idx(u, u2, v, v2);
        self.values[i] = x;
    }
}

/// `√(v! u!)/(u-k)!` when `ℓ = v+k-u` is a valid index, else `None`.
fn ladder_factor(u: usize, v: usize, k: usize, d: usize) -> Option<(usize, f64)> {
    if k > u || v + k < u {
        return None;
    }
    let l = v + k - u;
    if l > d {
        return None;
    }
    let f = (factorial(v as u32) * factorial(u as u32)).sqrt() / factorial((u - k) as u32);
    Some((l, f))
}

pub fn matrix_element_table(coeffs: &EdgeCoefficients, u_max: usize) -> Result<MatrixElementTable> {
    let d = coeffs.d;
    if u_max < d {
        return Err(Error::InvalidArgument(format!("u_max {u_max} < d {d}")));
    }
    let mut t = MatrixElementTable::zeros(u_max);
    for u in 0..=u_max {
        for u2 in 0..=u_max {
            for v in 0..=u_max {
                for v2 in 0..=u_max {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..=d {
                        let Some((l, fi)) = ladder_factor(u, v, k, d) else { continue };
                        for k2 in 0..=d {
                            let Some((l2, fj)) = ladder_factor(u2, v2, k2, d) else { continue };
                            acc += coeffs.get(k, l, k2, l2) * (fi * fj);
                        }
                    }
                    t.set(u, u2, v, v2, acc);
                }
            }
        }
    }
    Ok(t)
}

/// Order in which coefficients are solved: entry `(u,u′,v,v′) = (k,k′,ℓ,ℓ′)`,
/// sorted by `(u+u′+v+v′, u, u′, v, v′)`.
fn solve_order(d: usize) -> Vec<[usize; 4]> {
    let mut idx: Vec<[usize; 4]> = EdgeCoefficients::admissible(d)
        .into_iter()
        .map(|[k, l, k2, l2]| [k, k2, l, l2])
        .collect();
    idx.sort_by_key(|&[u, u2, v, v2]| (u + u2 + v + v2, u, u2, v, v2));
    idx
}

/// Forward substitution from matrix elements to coefficients.
pub fn lambda_from_matrix_elements(table: &MatrixElementTable, d: usize) -> Result<EdgeCoefficients> {
    if table.u_max < d {
        return Err(Error::InvalidArgument(format!("table u_max {} < d {d}", table.u_max)));
    }
    let mut lam = EdgeCoefficients::zeros(d);
    for [u, u2, v, v2] in solve_order(d) {
        let (k, k2, l, l2) = (u, u2, v, v2);
        let mut rest = table.get(u, u2, v, v2);
        let mut diag = 0.0;
        for kk in 0..=d {
            let Some((ll, fi)) = ladder_factor(u, v, kk, d) else { continue };
            for kk2 in 0..=d {
                let Some((ll2, fj)) = ladder_factor(u2, v2, kk2, d) else { continue };
                if (kk, ll, kk2, ll2) == (k, l, k2, l2) {
                    diag = fi * fj;
                } else {
                    rest -= lam.get(kk, ll, kk2, ll2) * (fi * fj);
                }
            }
        }
        assert!(diag > 0.0, "diagonal factor must be positive");
        lam.set(k, l, k2, l2, rest / diag);
    }
    Ok(lam.symmetrized())
}

/// Worst-case amplification of entrywise table noise into `λ` under the
/// forward substitution (error of each `λ` per unit table error).
pub fn lambda_condition_factor(d: usize) -> f64 {
    let mut err = std::collections::HashMap::<[usize; 4], f64>::new();
    let mut worst: f64 = 0.0;
    for [u, u2, v, v2] in solve_order(d) {
        let mut bound = 1.0;
        let mut diag = 0.0;
        for kk in 0..=d {
            let Some((ll, fi)) = ladder_factor(u, v, kk, d) else { continue };
            for kk2 in 0..=d {
                let Some((ll2, fj)) = ladder_factor(u2, v2, kk2, d) else { continue };
                if [kk, ll, kk2, ll2] == [u, v, u2, v2] {
                    diag = fi * fj;
                } else if (kk, ll) != (0, 0) && (kk2, ll2) != (0, 0) {
                    bound += err.get(&[kk, ll, kk2, ll2]).copied().unwrap_or(0.0) * fi * fj;
                }
            }
        }
        let e = bound / diag;
        err.insert([u, v, u2, v2], e);
        worst = worst.max(e);
    }
    worst
}

/// JSON document for a model (Hamiltonian plus dissipator).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub vertices: Vec<usize>,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<i64>>>,
    /// Per edge, rows `[k, ℓ, k′, ℓ′, re, im]`.
    pub lambda: Vec<Vec<[f64; 6]>>,
    pub d: usize,
    #[serde(rename = "L")]
    pub l_bound: f64,
    pub p: u32,
    /// Rows `[re, im]` per vertex.
    pub alpha: Vec<[f64; 2]>,
}

impl ModelDocument {
    pub fn from_specs(h: &HamiltonianSpec, diss: &DissipatorSpec) -> Self {
        Self {
            vertices: h.graph.vertices.clone(),
            edges: h.graph.edges.iter().map(|&(a, b)| [a, b]).collect(),
            coords: h.graph.coords.clone(),
            lambda: h
                .coeffs
                .iter()
                .map(|c| {
                    c.iter()
                        .filter(|(_, v)| v.norm() > 0.0)
                        .map(|([k, l, k2, l2], v)| [k as f64, l as f64, k2 as f64, l2 as f64, v.re, v.im])
                        .collect()
                })
                .collect(),
            d: h.d,
            l_bound: h.l_bound,
            p: diss.p,
            alpha: diss.alpha.iter().map(|a| [a.re, a.im]).collect(),
        }
    }

    pub fn to_specs(&self) -> Result<(HamiltonianSpec, DissipatorSpec)> {
        let n = self.vertices.len();
        if self.vertices != (0..n).collect::<Vec<_>>() {
            return Err(Error::Config("vertices must be 0..n-1".into()));
        }
        let graph = LatticeGraph::new(n, self.edges.iter().map(|e| (e[0], e[1])).collect(), self.coords.clone())?;
        if self.lambda.len() != graph.edges.len() {
            return Err(Error::Config("one lambda block per edge required".into()));
        }
        let mut coeffs = Vec::new();
        for rows in &self.lambda {
            let mut c = EdgeCoefficients::zeros(self.d);
            for r in rows {
                let ix: Vec<usize> = r[..4].iter().map(|&x| x as usize).collect();
                if ix.iter().any(|&x| x > self.d) || r[..4].iter().any(|&x| x < 0.0 || x.fract() != 0.0) {
                    return Err(Error::Config(format!("bad lambda index row {r:?}")));
                }
                c.set(ix[0], ix[1], ix[2], ix[3], C64::new(r[4], r[5]));
            }
            coeffs.push(c);
        }
        let h = HamiltonianSpec::new(graph, coeffs, self.d, self.l_bound)?;
        if self.alpha.len() != n {
            return Err(Error::Config("one alpha row per vertex required".into()));
        }
        let diss = DissipatorSpec::new(self.p, self.alpha.iter().map(|a| C64::new(a[0], a[1])).collect())?;
        Ok((h, diss))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::MaxAbs;
    use crate::fock::FockBasis;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn squeezing_matrix_element() {
        let mut co = EdgeCoefficients::zeros(1);
        co.set_hermitian(0, 1, 0, 1, c(1.0));
        let t = TruncationSpec::new(2, 2).unwrap();
        let h = build_edge_hamiltonian(&co, &t).unwrap();
        let b = FockBasis::product(&t);
        assert!((h[(0, b.index_of(&[1, 1]).unwrap())] - c(1.0)).norm() < 1e-14);
        let tab = matrix_element_table(&co, 2).unwrap();
        assert_eq!(tab.get(0, 0, 1, 1), c(1.0));
    }

    #[test]
    fn hopping_matrix_element() {
        let mut co = EdgeCoefficients::zeros(1);
        co.set_hermitian(1, 0, 0, 1, c(1.0));
        let t = TruncationSpec::new(2, 2).unwrap();
        let h = build_edge_hamiltonian(&co, &t).unwrap();
        let b = FockBasis::product(&t);
        let r = b.index_of(&[1, 0]).unwrap();
        let col = b.index_of(&[0, 1]).unwrap();
        assert!((h[(r, col)] - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn random_spec_properties() {
        let g = LatticeGraph::chain(3);
        let a = random_hamiltonian(&g, 2, 0.7, 11).unwrap();
        let b = random_hamiltonian(&g, 2, 0.7, 11).unwrap();
        assert_eq!(a, b);
        a.validate().unwrap();
        let z = random_hamiltonian(&g, 1, 0.0, 3).unwrap();
        assert!(z.coeffs.iter().all(|c| c.max_abs() == 0.0));
        let t = TruncationSpec::new(3, 2).unwrap();
        let h = build_edge_hamiltonian(&a.coeffs[0], &t).unwrap();
        assert!((&h - h.adjoint()).max_modulus() < 1e-12);
    }

    #[test]
    fn sparse_operator_matches_dense_edge() {
        let g = LatticeGraph::single_edge();
        let spec = random_hamiltonian(&g, 2, 1.0, 5).unwrap();
        let t = TruncationSpec::new(4, 2).unwrap();
        let dense = build_edge_hamiltonian(&spec.coeffs[0], &t).unwrap();
        let sparse = spec.full_operator(&FockBasis::product(&t));
        assert!((CMat::from(&sparse) - dense).max_modulus() < 1e-12);
    }

    #[test]
    fn g_trivial_cases() {
        let g = LatticeGraph::chain(3);
        let spec = random_hamiltonian(&g, 2, 1.0, 2).unwrap();
        let zero = [c(0.0); 3];
        assert_eq!(g_poly_eval(&spec, 0, &zero, [c(0.0), c(0.0)]), c(0.0));
        let alpha = [C64::new(0.3, 0.1), C64::new(-0.2, 0.4), c(0.0)];
        let v = g_poly_eval(&spec, 0, &alpha, [alpha[0], alpha[1]]);
        assert!(v.norm() < 1e-14);
    }

    #[test]
    fn g_polynomial_matches_direct_eval() {
        let g = LatticeGraph::single_edge();
        let spec = random_hamiltonian(&g, 2, 1.0, 9).unwrap();
        let poly = g_polynomial(&spec.coeffs[0]);
        let x = [0.3, -0.2, 0.1, 0.5, -0.4, 0.25, 0.6, -0.1];
        let alpha = [C64::new(x[0], x[1]), C64::new(x[2], x[3])];
        let beta = [C64::new(x[4], x[5]), C64::new(x[6], x[7])];
        let direct = g_poly_eval(&spec, 0, &alpha, beta);
        assert!((poly.eval(&x) - direct).norm() < 1e-13);
    }

    #[test]
    fn lemma_round_trip_and_zero() {
        let g = LatticeGraph::single_edge();
        let spec = random_hamiltonian(&g, 2, 1.0, 4).unwrap();
        let poly = g_polynomial(&spec.coeffs[0]);
        let back = coefficients_from_g(&poly, 2).unwrap();
        assert!(back.max_diff(&spec.coeffs[0]) < 1e-12);
        let zero = coefficients_from_g(&Poly::zero(G_VARS), 1).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn real_coefficients_have_no_imaginary_channel() {
        let mut co = EdgeCoefficients::zeros(1);
        co.set_hermitian(0, 1, 0, 1, c(0.3));
        co.set_hermitian(1, 0, 0, 1, c(-0.2));
        let re = restrict_real(&g_polynomial(&co), 0.0);
        for [k, l, k2, l2] in EdgeCoefficients::admissible(1) {
            assert!(re.derivative_at_zero(&[k as u8, k2 as u8, l as u8, l2 as u8]).norm() < 1e-14);
        }
    }

    #[test]
    fn matrix_element_round_trip() {
        let g = LatticeGraph::single_edge();
        for seed in 0..5 {
            let spec = random_hamiltonian(&g, 2, 1.0, seed).unwrap();
            let tab = matrix_element_table(&spec.coeffs[0], 3).unwrap();
            let back = lambda_from_matrix_elements(&tab, 2).unwrap();
            assert!(back.max_diff(&spec.coeffs[0]) < 1e-10);
            let t = TruncationSpec::new(3, 2).unwrap();
            let dense = build_edge_hamiltonian(&spec.coeffs[0], &t).unwrap();
            let b = FockBasis::product(&t);
            let tab2 = matrix_element_table(&spec.coeffs[0], 2).unwrap();
            let b2 = FockBasis::product(&TruncationSpec::new(2, 2).unwrap());
            for r in 0..b2.dim() {
                for col in 0..b2.dim() {
                    let (o1, o2) = (b2.occupation(r), b2.occupation(col));
                    let v = tab2.get(o1[0] as usize, o1[1] as usize, o2[0] as usize, o2[1] as usize);
                    let ri = b.index_of(o1).unwrap();
                    let ci = b.index_of(o2).unwrap();
                    assert!((v - dense[(ri, ci)]).norm() < 1e-12);
                }
            }
        }
        let zero = lambda_from_matrix_elements(&MatrixElementTable::zeros(2), 2).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        assert!(lambda_condition_factor(2) >= 1.0);
    }

    #[test]
    fn json_round_trip() {
        let g = LatticeGraph::chain(3);
        let h = random_hamiltonian(&g, 1, 0.5, 1).unwrap();
        let diss = DissipatorSpec::new(4, vec![c(0.1), C64::new(0.0, 0.2), c(0.0)]).unwrap();
        let doc = ModelDocument::from_specs(&h, &diss);
        let text = serde_json::to_string(&doc).unwrap();
        let back: ModelDocument = serde_json::from_str(&text).unwrap();
        let (h2, d2) = back.to_specs().unwrap();
        assert_eq!(h2, h);
        assert_eq!(d2, diss);
    }

    #[test]
    fn partition_helpers() {
        let g = LatticeGraph::chain(5);
        assert_eq!(g.ball_around_edge(1, 1), vec![0, 1, 2, 3]);
        assert_eq!(g.edges_within(&[1, 2, 3]), vec![1, 2]);
        assert_eq!(g.max_degree, 2);
        assert!(LatticeGraph::new(2, vec![(0, 0)], None).is_err());
    }
}
