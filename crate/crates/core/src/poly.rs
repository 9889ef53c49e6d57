//! Sparse multivariate polynomials in real variables with complex coefficients.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use crate::fock::{factorial, C64};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u8>, C64>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: C64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn monomial(exponents: Vec<u8>, c: C64) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    /// The single variable `x_var`.
    pub fn var(nvars: usize, var: usize) -> Self {
        let mut e = vec![0; nvars];
        e[var] = 1;
        Self::monomial(e, C64::new(1.0, 0.0))
    }

    /// `x + i y` for the given variable pair.
    pub fn complex_var(nvars: usize, re: usize, im: usize) -> Self {
        Self::var(nvars, re) + Self::var(nvars, im).scale(C64::new(0.0, 1.0))
    }

    /// `x - i y` for the given variable pair.
    pub fn conj_var(nvars: usize, re: usize, im: usize) -> Self {
        Self::var(nvars, re) - Self::var(nvars, im).scale(C64::new(0.0, 1.0))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exponents: Vec<u8>, c: C64) {
        assert_eq!(exponents.len(), self.nvars, "exponent length");
        if c == C64::new(0.0, 0.0) {
            return;
        }
        let entry = self.terms.entry(exponents).or_insert(C64::new(0.0, 0.0));
        *entry += c;
    }

    pub fn coefficient(&self, exponents: &[u8]) -> C64 {
        self.terms.get(exponents).copied().unwrap_or_default()
    }

    pub fn scale(mut self, c: C64) -> Self {
        for v in self.terms.values_mut() {
            *v *= c;
        }
        self
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::constant(self.nvars, C64::new(1.0, 0.0));
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Maximum exponent of each variable.
    pub fn degrees(&self) -> Vec<u8> {
        let mut d = vec![0; self.nvars];
        for e in self.terms.keys() {
            for (i, &x) in e.iter().enumerate() {
                d[i] = d[i].max(x);
            }
        }
        d
    }

    pub fn total_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> C64 {
        assert_eq!(x.len(), self.nvars);
        self.terms
            .iter()
            .map(|(e, c)| {
                let m: f64 = e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product();
                c * m
            })
            .sum()
    }

    /// Partial derivative of the given orders.
    pub fn derivative(&self, orders: &[u8]) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e.iter().zip(orders).any(|(&k, &o)| k < o) {
                continue;
            }
            let mut factor = 1.0;
            let mut ne = e.clone();
            for (i, &o) in orders.iter().enumerate() {
                factor *= factorial(e[i] as u32) / factorial((e[i] - o) as u32);
                ne[i] -= o;
            }
            out.add_term(ne, c * factor);
        }
        out
    }

    /// Mixed partial derivative at the origin.
    pub fn derivative_at_zero(&self, orders: &[u8]) -> C64 {
        let f: f64 = orders.iter().map(|&o| factorial(o as u32)).product();
        self.coefficient(orders) * f
    }

    /// `∫_0^{x_v} ... dx_v` for every listed variable (the signed-box integral).
    pub fn integrate_from_zero(&self, vars: &[usize]) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            let mut div = 1.0;
            for &v in vars {
                ne[v] += 1;
                div *= ne[v] as f64;
            }
            out.add_term(ne, c / div);
        }
        out
    }

    /// Substitutes each old variable by a linear form in `new_nvars` new variables.
    pub fn compose_linear(&self, new_nvars: usize, forms: &[Vec<(usize, f64)>]) -> Self {
        assert_eq!(forms.len(), self.nvars);
        let lin: Vec<Poly> = forms
            .iter()
            .map(|f| {
                let mut p = Poly::zero(new_nvars);
                for &(v, w) in f {
                    let mut e = vec![0; new_nvars];
                    e[v] = 1;
                    p.add_term(e, C64::new(w, 0.0));
                }
                p
            })
            .collect();
        let mut out = Poly::zero(new_nvars);
        for (e, c) in &self.terms {
            let mut m = Poly::constant(new_nvars, *c);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    m = &m * &lin[i].pow(k as u32);
                }
            }
            out = out + m;
        }
        out.prune(0.0)
    }

    /// Drops terms with modulus `<= tol`.
    pub fn prune(mut self, tol: f64) -> Self {
        self.terms.retain(|_, c| c.norm() > tol);
        self
    }

    pub fn max_coefficient_diff(&self, other: &Poly) -> f64 {
        let mut keys: Vec<&Vec<u8>> = self.terms.keys().collect();
        keys.extend(other.terms.keys());
        keys.into_iter()
            .map(|k| (self.coefficient(k) - other.coefficient(k)).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars);
        for (e, c) in rhs.terms {
            self.add_term(e, c);
        }
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        self + rhs.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = Poly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u8> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn complex_square_expands() {
        let z = Poly::complex_var(2, 0, 1);
        let zbar = Poly::conj_var(2, 0, 1);
        let modsq = &z * &zbar;
        assert_eq!(modsq.coefficient(&[2, 0]), c(1.0));
        assert_eq!(modsq.coefficient(&[0, 2]), c(1.0));
        assert_eq!(modsq.coefficient(&[1, 1]), c(0.0));
        let v = z.pow(3).eval(&[0.3, -0.7]);
        let expect = C64::new(0.3, -0.7).powi(3);
        assert!((v - expect).norm() < 1e-14);
    }

    #[test]
    fn derivative_and_integral_are_inverse() {
        let mut p = Poly::zero(2);
        p.add_term(vec![2, 1], c(3.0));
        p.add_term(vec![0, 3], C64::new(0.0, 1.5));
        let q = p.integrate_from_zero(&[0, 1]).derivative(&[1, 1]);
        assert!(q.max_coefficient_diff(&p) < 1e-15);
        assert_eq!(p.derivative_at_zero(&[2, 1]), c(6.0));
    }

    #[test]
    fn linear_composition() {
        let mut p = Poly::zero(1);
        p.add_term(vec![2], c(1.0));
        let q = p.compose_linear(2, &[vec![(0, 1.0), (1, 2.0)]]);
        assert!((q.eval(&[0.5, 0.25]) - c(1.0)).norm() < 1e-15);
    }
}
