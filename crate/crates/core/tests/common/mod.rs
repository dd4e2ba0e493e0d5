#![allow(dead_code)]

use neklab::poly::{monomials_up_to, Poly};
use neklab::trig::{MultiIndex, TrigPoly};
use num_complex::Complex64;
use proptest::prelude::*;

/// Real trigonometric polynomial with harmonics `|k|_1 <= kmax` and
/// coefficient polynomials of total degree `<= deg`.
pub fn trigpoly(n: usize, kmax: i64, deg: u32) -> impl Strategy<Value = TrigPoly> {
    let harmonics: Vec<MultiIndex> = neklab::fourier::l1_ball(n, kmax);
    let monos = monomials_up_to(n, deg);
    let slots = harmonics.len() * monos.len();
    (
        proptest::collection::vec(-1.0f64..1.0, slots * 2),
        proptest::collection::vec(proptest::bool::weighted(0.3), harmonics.len()),
    )
        .prop_map(move |(c, keep)| {
            let mut t = TrigPoly::zero(n);
            for (h, k) in harmonics.iter().enumerate() {
                if !keep[h] {
                    continue;
                }
                let mut p = Poly::zero(n);
                for (m, pw) in monos.iter().enumerate() {
                    let i = 2 * (h * monos.len() + m);
                    p.add_term(pw.clone(), Complex64::new(c[i], c[i + 1]));
                }
                t.add_harmonic(k.clone(), p);
            }
            t.realify()
        })
}

/// Independent naive evaluation.
pub fn naive_eval(g: &TrigPoly, i: &[f64], theta: &[f64]) -> Complex64 {
    let mut acc = Complex64::default();
    for (k, p) in g.terms() {
        let mut c = Complex64::default();
        for (pw, a) in p.terms() {
            let mut m = *a;
            for (x, e) in i.iter().zip(pw) {
                m *= x.powi(*e as i32);
            }
            c += m;
        }
        let ph: f64 = k.0.iter().zip(theta).map(|(a, b)| *a as f64 * b).sum();
        acc += c * Complex64::new(ph.cos(), ph.sin());
    }
    acc
}

pub fn max_coeff_diff(a: &TrigPoly, b: &TrigPoly) -> f64 {
    let d = a.sub(b).unwrap();
    d.terms()
        .flat_map(|(_, p)| p.terms().map(|(_, c)| c.norm()))
        .fold(0.0, f64::max)
}
