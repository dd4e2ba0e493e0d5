use num_complex::Complex64;

use crate::error::{domain, NekError, Result};
use crate::frequency::{FrequencyMap, PolyHamiltonian};
use crate::geography::Lattice;
use crate::grid::{unravel, Axis};
use crate::fit::PolyFitter;
use crate::poly::Poly;
use crate::trig::TrigPoly;

/// Solution `chi` of `{h, chi} = f_nr` with its fit bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub chi: TrigPoly,
    /// Degree of the least-squares fits (0 when every harmonic divided
    /// exactly).
    pub fit_degree: u32,
    pub exact_harmonics: usize,
    pub fitted_harmonics: usize,
    /// `sum_k max_I |k.omega(I) chi_k(I) i - f_k(I)|` over the fit sample.
    pub residual: f64,
}

/// Chebyshev nodes of `[c - w, c + w]`, `nodes` per axis.
fn chebyshev_sample(center: &[f64], w: f64, nodes: usize) -> Vec<Vec<f64>> {
    let n = center.len();
    let axes: Vec<Axis> = (0..n).map(|_| Axis::bounded(0.0, 1.0, nodes.max(2))).collect();
    let total: usize = axes.iter().map(|a| a.nodes).product();
    let m = nodes.max(2);
    (0..total)
        .map(|f| {
            unravel(f, &axes)
                .iter()
                .zip(center)
                .map(|(&i, c)| {
                    let t = ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * m) as f64).cos();
                    c + w * t
                })
                .collect()
        })
        .collect()
}

/// Re-expands coefficient polynomials above `degree` by least squares on
/// the Chebyshev sample of [`solve_homological`]. Each Poisson bracket
/// with a fitted generator raises the degree, and high-degree monomials
/// evaluated on the complex strip lose every digit to cancellation.
pub struct DegreeCap {
    pts: Vec<Vec<f64>>,
    fitter: PolyFitter,
    degree: u32,
}

impl DegreeCap {
    pub fn new(h: &PolyHamiltonian, dom_r: f64, degree: u32) -> Result<Self> {
        let w = h.radius() + dom_r;
        let pts = chebyshev_sample(h.center(), w, 2 * (degree as usize + 1));
        let fitter = PolyFitter::new(&pts, degree, h.center(), &vec![w; h.dim()])?;
        Ok(DegreeCap { pts, fitter, degree })
    }

    pub fn apply(&self, g: &TrigPoly) -> TrigPoly {
        g.map_coeffs(|_, p| {
            if p.degree() <= self.degree {
                return p.clone();
            }
            let vals: Vec<Complex64> = self.pts.iter().map(|x| p.eval(x)).collect();
            self.fitter.fit(&vals).0
        })
    }
}

/// `chi_k = f_k / (i k.omega)` for every harmonic of `f_nr`.
///
/// The real sample is the box of `h` widened by `dom_r` (the complex
/// width of the working domain). Each harmonic is first divided exactly;
/// when the quotient is not polynomial it is fitted by least squares at
/// total degree `fit_degree` on `2 (fit_degree + 1)` Chebyshev nodes per
/// axis. Divisors below `alpha` on the sample are refused.
pub fn solve_homological(
    h: &PolyHamiltonian,
    f_nr: &TrigPoly,
    lattice: &Lattice,
    k_cut: f64,
    dom_r: f64,
    alpha: f64,
    fit_degree: u32,
) -> Result<Generator> {
    let n = h.dim();
    if f_nr.dim() != n || lattice.n != n {
        return domain("homological equation dimensions differ");
    }
    if let Some(k) = f_nr
        .harmonics()
        .find(|k| lattice.contains(&k.0) || k.l1() as f64 > k_cut)
    {
        return domain(format!("harmonic {:?} is resonant or beyond the cutoff", k.0));
    }
    let w = h.radius() + dom_r;
    let pts = chebyshev_sample(h.center(), w, 2 * (fit_degree as usize + 1));
    let omegas: Vec<Vec<f64>> = pts.iter().map(|p| h.omega(p)).collect();
    let grad = h.poly().gradient();
    let mut fitter: Option<PolyFitter> = None;
    let mut chi = TrigPoly::zero(n);
    let mut residual = 0.0;
    let (mut exact, mut fitted) = (0, 0);
    for (k, fk) in f_nr.terms() {
        let div: Vec<f64> = omegas.iter().map(|w| k.dot(w)).collect();
        if let Some((at, d)) = div
            .iter()
            .enumerate()
            .map(|(i, d)| (i, d.abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
        {
            if d < alpha {
                return Err(NekError::SmallDivisor {
                    k: k.0.clone(),
                    at: pts[at].clone(),
                    value: d,
                    bound: alpha,
                });
            }
        }
        // Divisor i k.omega(I) as a polynomial.
        let mut dpoly = Poly::zero(n);
        for (j, g) in grad.iter().enumerate() {
            dpoly = dpoly + g.scale_re(k.0[j] as f64);
        }
        let idiv = dpoly.scale(Complex64::i());
        let quotient = match fk.div_exact(&idiv, 1e-14 * (1.0 + fk.l1_coeffs())) {
            Some(q) => {
                exact += 1;
                q
            }
            None => {
                fitted += 1;
                let vals: Vec<Complex64> = pts
                    .iter()
                    .zip(&div)
                    .map(|(p, d)| fk.eval(p) / (Complex64::i() * d))
                    .collect();
                if fitter.is_none() {
                    fitter = Some(PolyFitter::new(&pts, fit_degree, h.center(), &vec![w; n])?);
                }
                fitter.as_ref().expect("fitter built above").fit(&vals).0
            }
        };
        let mut worst: f64 = 0.0;
        for (p, d) in pts.iter().zip(&div) {
            let r = quotient.eval(p) * Complex64::i() * d - fk.eval(p);
            worst = worst.max(r.norm());
        }
        residual += worst;
        chi.add_harmonic(k.clone(), quotient);
    }
    Ok(Generator {
        chi,
        fit_degree: if fitted > 0 { fit_degree } else { 0 },
        exact_harmonics: exact,
        fitted_harmonics: fitted,
        residual,
    })
}
