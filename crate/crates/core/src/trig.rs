//! Finite Fourier sums in the angles with polynomial coefficients in the
//! actions: `g(I, theta) = sum_k g_k(I) exp(i k.theta)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, NekError, Result};
use crate::poly::{MonomialRecord, Poly};

/// Integer frequency vector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<i64>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, j: usize) -> Self {
        let mut v = vec![0; n];
        v[j] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn l1(&self) -> i64 {
        self.0.iter().map(|k| k.abs()).sum()
    }

    pub fn l2(&self) -> f64 {
        (self.0.iter().map(|&k| (k * k) as f64).sum::<f64>()).sqrt()
    }

    pub fn linf(&self) -> i64 {
        self.0.iter().map(|k| k.abs()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    pub fn neg(&self) -> Self {
        MultiIndex(self.0.iter().map(|k| -k).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        MultiIndex(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&k, &v)| k as f64 * v).sum()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&k| k as f64).collect()
    }
}

impl From<Vec<i64>> for MultiIndex {
    fn from(v: Vec<i64>) -> Self {
        MultiIndex(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    n: usize,
    terms: BTreeMap<MultiIndex, Poly>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermRecord {
    k: Vec<i64>,
    poly: Vec<MonomialRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TrigPolyFile {
    schema: String,
    n: usize,
    terms: Vec<TermRecord>,
}

pub const TRIGPOLY_SCHEMA: &str = "neklab.trigpoly/1";

impl TrigPoly {
    pub fn zero(n: usize) -> Self {
        TrigPoly {
            n,
            terms: BTreeMap::new(),
        }
    }

    /// Action-only function `p(I)`.
    pub fn from_poly(p: Poly) -> Self {
        let n = p.nvars();
        let mut t = TrigPoly::zero(n);
        t.add_harmonic(MultiIndex::zero(n), p);
        t
    }

    pub fn constant(n: usize, c: f64) -> Self {
        TrigPoly::from_poly(Poly::constant(n, c))
    }

    /// `amp * cos(k.theta)`.
    pub fn cos(k: &[i64], amp: f64) -> Self {
        let n = k.len();
        let k = MultiIndex(k.to_vec());
        let mut t = TrigPoly::zero(n);
        if k.is_zero() {
            t.add_harmonic(k, Poly::constant(n, amp));
        } else {
            t.add_harmonic(k.neg(), Poly::constant(n, amp / 2.0));
            t.add_harmonic(k, Poly::constant(n, amp / 2.0));
        }
        t
    }

    /// `amp * sin(k.theta)`.
    pub fn sin(k: &[i64], amp: f64) -> Self {
        let n = k.len();
        let k = MultiIndex(k.to_vec());
        let mut t = TrigPoly::zero(n);
        if !k.is_zero() {
            t.add_harmonic(k.neg(), Poly::constant(n, Complex64::new(0.0, amp / 2.0)));
            t.add_harmonic(k, Poly::constant(n, Complex64::new(0.0, -amp / 2.0)));
        }
        t
    }

    /// Builds from a raw table; fails if the reality invariant is broken
    /// beyond `tol`.
    pub fn from_terms(n: usize, terms: BTreeMap<MultiIndex, Poly>, tol: f64) -> Result<Self> {
        let mut t = TrigPoly::zero(n);
        for (k, p) in terms {
            if k.dim() != n || p.nvars() != n {
                return domain("harmonic or coefficient dimension mismatch");
            }
            t.add_harmonic(k, p);
        }
        let defect = t.reality_defect();
        if defect > tol {
            return domain(format!("reality invariant violated by {defect:.3e}"));
        }
        Ok(t)
    }

    /// Adds to a single harmonic, without touching its partner.
    pub fn add_harmonic(&mut self, k: MultiIndex, p: Poly) {
        let e = self
            .terms
            .entry(k.clone())
            .or_insert_with(|| Poly::zero(self.n));
        *e = std::mem::replace(e, Poly::zero(self.n)) + p;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Poly)> {
        self.terms.iter()
    }

    pub fn harmonics(&self) -> impl Iterator<Item = &MultiIndex> {
        self.terms.keys()
    }

    pub fn coeff(&self, k: &MultiIndex) -> Option<&Poly> {
        self.terms.get(k)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `|k|_inf` in the table.
    pub fn max_order(&self) -> i64 {
        self.terms.keys().map(|k| k.linf()).max().unwrap_or(0)
    }

    /// Largest `|k|_1` in the table.
    pub fn max_l1(&self) -> i64 {
        self.terms.keys().map(|k| k.l1()).max().unwrap_or(0)
    }

    pub fn is_angle_independent(&self) -> bool {
        self.terms.keys().all(|k| k.is_zero())
    }

    /// True when no coefficient depends on the actions.
    pub fn is_action_independent(&self) -> bool {
        self.terms.values().all(|p| p.degree() == 0)
    }

    /// Largest coefficient-wise mismatch between `g_{-k}` and `conj(g_k)`.
    pub fn reality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, p) in &self.terms {
            let partner = self
                .terms
                .get(&k.neg())
                .cloned()
                .unwrap_or_else(|| Poly::zero(self.n));
            let d = partner - p.conj();
            worst = worst.max(d.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max));
        }
        worst
    }

    /// Projects onto the real subspace: `g_k <- (g_k + conj(g_{-k})) / 2`.
    pub fn realify(&self) -> Self {
        let mut out = TrigPoly::zero(self.n);
        for (k, p) in &self.terms {
            out.add_harmonic(k.clone(), p.scale_re(0.5));
            out.add_harmonic(k.neg(), p.conj().scale_re(0.5));
        }
        out
    }

    pub fn map_coeffs(&self, f: impl Fn(&MultiIndex, &Poly) -> Poly) -> Self {
        let mut out = TrigPoly::zero(self.n);
        for (k, p) in &self.terms {
            out.add_harmonic(k.clone(), f(k, p));
        }
        out
    }

    pub fn filter(&self, keep: impl Fn(&MultiIndex) -> bool) -> Self {
        TrigPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, p)| (k.clone(), p.clone()))
                .collect(),
        }
    }

    /// Keeps harmonics with `|k|_1 <= kmax`.
    pub fn truncate_l1(&self, kmax: f64) -> Self {
        self.filter(|k| (k.l1() as f64) <= kmax)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_coeffs(|_, p| p.scale_re(c))
    }

    pub fn add(&self, o: &TrigPoly) -> Result<Self> {
        self.check_dim(o)?;
        let mut out = self.clone();
        for (k, p) in &o.terms {
            out.add_harmonic(k.clone(), p.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, o: &TrigPoly) -> Result<Self> {
        self.add(&o.scale(-1.0))
    }

    pub fn mul(&self, o: &TrigPoly) -> Result<Self> {
        self.check_dim(o)?;
        let mut acc: BTreeMap<MultiIndex, Poly> = BTreeMap::new();
        for (ka, pa) in &self.terms {
            for (kb, pb) in &o.terms {
                let k = ka.add(kb);
                let prod = pa * pb;
                let e = acc.entry(k).or_insert_with(|| Poly::zero(self.n));
                *e = std::mem::replace(e, Poly::zero(self.n)) + prod;
            }
        }
        acc.retain(|_, p| !p.is_zero());
        Ok(TrigPoly {
            n: self.n,
            terms: acc,
        })
    }

    /// `d/dI_j`.
    pub fn d_action(&self, j: usize) -> Self {
        self.map_coeffs(|_, p| p.derivative(j))
    }

    /// `d/dtheta_j`.
    pub fn d_angle(&self, j: usize) -> Self {
        self.map_coeffs(|k, p| p.scale(Complex64::new(0.0, k.0[j] as f64)))
    }

    /// `{F, G} = dF/dI . dG/dtheta - dF/dtheta . dG/dI`.
    pub fn poisson_bracket(&self, g: &TrigPoly) -> Result<Self> {
        self.check_dim(g)?;
        let mut out = TrigPoly::zero(self.n);
        for j in 0..self.n {
            let a = self.d_action(j).mul(&g.d_angle(j))?;
            let b = self.d_angle(j).mul(&g.d_action(j))?;
            out = out.add(&a)?.sub(&b)?;
        }
        Ok(out)
    }

    pub fn evaluate_complex(&self, i: &[Complex64], theta: &[Complex64]) -> Result<Complex64> {
        if i.len() != self.n || theta.len() != self.n {
            return domain(format!(
                "evaluation point has dimensions ({}, {}), expected {}",
                i.len(),
                theta.len(),
                self.n
            ));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, p) in &self.terms {
            let phase: Complex64 = k
                .0
                .iter()
                .zip(theta)
                .map(|(&kj, &t)| t * kj as f64)
                .sum();
            acc += p.eval_complex(i) * (Complex64::i() * phase).exp();
        }
        Ok(acc)
    }

    /// Real value at real arguments; the imaginary part cancels by the
    /// reality invariant and is discarded.
    pub fn evaluate(&self, i: &[f64], theta: &[f64]) -> Result<f64> {
        Ok(self.evaluate_raw(i, theta)?.re)
    }

    /// Complex sum at real arguments, for reality diagnostics.
    pub fn evaluate_raw(&self, i: &[f64], theta: &[f64]) -> Result<Complex64> {
        if i.len() != self.n || theta.len() != self.n {
            return domain(format!(
                "evaluation point has dimensions ({}, {}), expected {}",
                i.len(),
                theta.len(),
                self.n
            ));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, p) in &self.terms {
            let phase = k.dot(theta);
            acc += p.eval(i) * Complex64::from_polar(1.0, phase);
        }
        Ok(acc)
    }

    /// Gradient in the actions at a real point, real part.
    pub fn grad_action(&self, i: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        (0..self.n)
            .map(|j| self.d_action(j).evaluate(i, theta))
            .collect()
    }

    /// Gradient in the angles at a real point.
    pub fn grad_angle(&self, i: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; self.n];
        for (k, p) in &self.terms {
            let v = p.eval(i) * Complex64::i() * Complex64::from_polar(1.0, k.dot(theta));
            for j in 0..self.n {
                g[j] += (v * k.0[j] as f64).re;
            }
        }
        Ok(g)
    }

    /// `sum_k |g_k(I)| e^{|k|_1 s}` at a possibly complex action point.
    pub fn weighted_sum_at(&self, i: &[Complex64], s: f64) -> f64 {
        self.terms
            .iter()
            .map(|(k, p)| p.eval_complex(i).norm() * (k.l1() as f64 * s).exp())
            .sum()
    }

    /// Sum of all coefficient moduli, used as a magnitude scale.
    pub fn coefficient_mass(&self) -> f64 {
        self.terms.values().map(|p| p.l1_coeffs()).sum()
    }

    /// Removes monomials of modulus at most `tol` and empty harmonics.
    pub fn prune(&mut self, tol: f64) {
        for p in self.terms.values_mut() {
            p.prune(tol);
        }
        self.terms.retain(|_, p| !p.is_zero());
    }

    fn check_dim(&self, o: &TrigPoly) -> Result<()> {
        if self.n != o.n {
            return domain(format!("dimension mismatch: {} vs {}", self.n, o.n));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let f = TrigPolyFile {
            schema: TRIGPOLY_SCHEMA.into(),
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(k, p)| TermRecord {
                    k: k.0.clone(),
                    poly: p.to_records(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&f)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: TrigPolyFile = serde_json::from_str(s)?;
        if f.schema != TRIGPOLY_SCHEMA {
            return Err(NekError::Format(format!("unknown schema {}", f.schema)));
        }
        let mut terms = BTreeMap::new();
        for t in f.terms {
            if t.k.len() != f.n {
                return domain("harmonic length differs from n");
            }
            terms.insert(MultiIndex(t.k), Poly::from_records(f.n, &t.poly)?);
        }
        TrigPoly::from_terms(f.n, terms, 1e-12)
    }
}
