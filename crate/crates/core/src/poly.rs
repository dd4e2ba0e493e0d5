//! Multivariate polynomials with complex coefficients.
//!
//! These carry the action dependence of every Fourier coefficient, so that
//! differentiation and brackets stay exact.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Exponent vector of a monomial.
pub type Powers = Vec<u32>;

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Powers, Complex64>,
}

/// One serialized monomial.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MonomialRecord {
    pub powers: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: impl Into<Complex64>) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(vec![0; nvars], c.into());
        p
    }

    /// The coordinate function `I_j`.
    pub fn var(nvars: usize, j: usize) -> Self {
        let mut pw = vec![0; nvars];
        pw[j] = 1;
        Poly::monomial(pw, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(powers: Powers, c: Complex64) -> Self {
        let mut p = Poly::zero(powers.len());
        p.add_term(powers, c);
        p
    }

    /// Affine function `c + g.x`.
    pub fn affine(c: f64, g: &[f64]) -> Self {
        let n = g.len();
        let mut p = Poly::constant(n, c);
        for (j, &gj) in g.iter().enumerate() {
            p = p + Poly::var(n, j).scale_re(gj);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Powers, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, powers: &[u32]) -> Complex64 {
        self.terms.get(powers).copied().unwrap_or_default()
    }

    /// Adds `c * x^powers`; exact zeros never enter the table.
    pub fn add_term(&mut self, powers: Powers, c: Complex64) {
        debug_assert_eq!(powers.len(), self.nvars);
        let e = self.terms.entry(powers.clone()).or_default();
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.terms.remove(&powers);
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|p| p.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        if c == Complex64::new(0.0, 0.0) {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn conj(&self) -> Self {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v.conj())).collect(),
        }
    }

    pub fn derivative(&self, j: usize) -> Self {
        let mut out = Poly::zero(self.nvars);
        for (pw, c) in &self.terms {
            if pw[j] > 0 {
                let mut q = pw.clone();
                q[j] -= 1;
                out.add_term(q, c * pw[j] as f64);
            }
        }
        out
    }

    pub fn gradient(&self) -> Vec<Poly> {
        (0..self.nvars).map(|j| self.derivative(j)).collect()
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        debug_assert_eq!(x.len(), self.nvars);
        let mut acc = Complex64::new(0.0, 0.0);
        for (pw, c) in &self.terms {
            let mut m = 1.0;
            for (xi, &e) in x.iter().zip(pw) {
                m *= xi.powi(e as i32);
            }
            acc += c * m;
        }
        acc
    }

    pub fn eval_complex(&self, x: &[Complex64]) -> Complex64 {
        debug_assert_eq!(x.len(), self.nvars);
        let mut acc = Complex64::new(0.0, 0.0);
        for (pw, c) in &self.terms {
            let mut m = Complex64::new(1.0, 0.0);
            for (xi, &e) in x.iter().zip(pw) {
                m *= xi.powi(e as i32);
            }
            acc += c * m;
        }
        acc
    }

    /// Removes terms with modulus at most `tol`.
    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, v| v.norm() > tol);
    }

    /// Sum of coefficient moduli.
    pub fn l1_coeffs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Keeps only monomials of total degree at most `d`.
    pub fn truncate_degree(&self, d: u32) -> Self {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.iter().sum::<u32>() <= d)
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Poly::constant(self.nvars, 1.0);
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Substitutes `x_j -> (x_j - center_j) / width_j`, i.e. returns
    /// `q((x - c) / w)` as a polynomial in `x`.
    pub fn substitute_affine(&self, center: &[f64], width: &[f64]) -> Self {
        let n = self.nvars;
        let lin: Vec<Poly> = (0..n)
            .map(|j| {
                let mut g = vec![0.0; n];
                g[j] = 1.0 / width[j];
                Poly::affine(-center[j] / width[j], &g)
            })
            .collect();
        let maxdeg: Vec<u32> = (0..n)
            .map(|j| self.terms.keys().map(|k| k[j]).max().unwrap_or(0))
            .collect();
        let powers: Vec<Vec<Poly>> = (0..n)
            .map(|j| {
                let mut v = vec![Poly::constant(n, 1.0)];
                for e in 1..=maxdeg[j] {
                    let next = &v[e as usize - 1] * &lin[j];
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Poly::zero(n);
        for (pw, c) in &self.terms {
            let mut m = Poly::constant(n, *c);
            for j in 0..n {
                if pw[j] > 0 {
                    m = &m * &powers[j][pw[j] as usize];
                }
            }
            out = out + m;
        }
        out
    }

    /// Exact division by `d` using graded lexicographic leading terms.
    /// Returns `None` when the remainder exceeds `tol` in coefficient size.
    pub fn div_exact(&self, d: &Poly, tol: f64) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        let lead = |p: &Poly| -> Option<(Powers, Complex64)> {
            p.terms
                .iter()
                .filter(|(_, v)| v.norm() > tol)
                .max_by(|a, b| grlex(a.0, b.0))
                .map(|(k, v)| (k.clone(), *v))
        };
        let (dl, dc) = lead(d)?;
        let mut rem = self.clone();
        let mut quo = Poly::zero(self.nvars);
        let mut guard = 0usize;
        while let Some((rl, rc)) = lead(&rem) {
            guard += 1;
            if guard > 100_000 {
                return None;
            }
            if !rl.iter().zip(&dl).all(|(a, b)| a >= b) {
                return None;
            }
            let q: Powers = rl.iter().zip(&dl).map(|(a, b)| a - b).collect();
            let t = Poly::monomial(q, rc / dc);
            rem = rem - &t * d;
            rem.terms.remove(&rl);
            quo = quo + t;
        }
        Some(quo)
    }

    pub fn to_records(&self) -> Vec<MonomialRecord> {
        self.terms
            .iter()
            .map(|(k, v)| MonomialRecord {
                powers: k.clone(),
                re: v.re,
                im: v.im,
            })
            .collect()
    }

    pub fn from_records(nvars: usize, recs: &[MonomialRecord]) -> Result<Self> {
        let mut p = Poly::zero(nvars);
        for r in recs {
            if r.powers.len() != nvars {
                return domain(format!(
                    "monomial has {} exponents, expected {nvars}",
                    r.powers.len()
                ));
            }
            p.add_term(r.powers.clone(), Complex64::new(r.re, r.im));
        }
        Ok(p)
    }
}

fn grlex(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        for (k, v) in rhs.terms {
            self.add_term(k, v);
        }
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, rhs: Poly) -> Poly {
        for (k, v) in rhs.terms {
            self.add_term(k, -v);
        }
        self
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut acc: BTreeMap<Powers, Complex64> = BTreeMap::new();
        for (ka, va) in &self.terms {
            for (kb, vb) in &rhs.terms {
                let k: Powers = ka.iter().zip(kb).map(|(a, b)| a + b).collect();
                *acc.entry(k).or_default() += va * vb;
            }
        }
        acc.retain(|_, v| *v != Complex64::new(0.0, 0.0));
        Poly {
            nvars: self.nvars,
            terms: acc,
        }
    }
}

/// All exponent vectors in `nvars` variables with total degree at most `deg`,
/// in a fixed order.
pub fn monomials_up_to(nvars: usize, deg: u32) -> Vec<Powers> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Powers>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur.push(e);
            rec(n, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(nvars, deg, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| grlex(a, b));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn product_and_derivative() {
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        let p = &(x.clone() + y.clone()) * &(x.clone() - y.clone());
        assert_eq!(p.coeff(&[2, 0]), c(1.0));
        assert_eq!(p.coeff(&[0, 2]), c(-1.0));
        assert!(p.coeff(&[1, 1]).norm() == 0.0);
        let dx = p.derivative(0);
        assert_eq!(dx, x.scale_re(2.0));
    }

    #[test]
    fn affine_substitution_matches_direct_evaluation() {
        let q = Poly::monomial(vec![3, 1], c(2.0)) + Poly::constant(2, 0.5);
        let p = q.substitute_affine(&[1.0, -2.0], &[0.5, 3.0]);
        for &(a, b) in &[(0.3, 0.7), (-1.2, 2.5), (4.0, -1.0)] {
            let t = [(a - 1.0) / 0.5, (b + 2.0) / 3.0];
            assert!((p.eval(&[a, b]) - q.eval(&t)).norm() < 1e-10);
        }
    }

    #[test]
    fn exact_division() {
        let x = Poly::var(1, 0);
        let p = &x * &x.scale_re(3.0);
        let q = p.div_exact(&x, 1e-14).unwrap();
        assert_eq!(q, x.scale_re(3.0));
        assert!(Poly::constant(1, 1.0).div_exact(&x, 1e-14).is_none());
    }

    #[test]
    fn monomial_count() {
        assert_eq!(monomials_up_to(2, 3).len(), 10);
        assert_eq!(monomials_up_to(3, 2).len(), 10);
    }
}
