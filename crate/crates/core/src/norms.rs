//! Sampled norms: Hoelder norms by finite differences, weighted Fourier
//! norms, and strip suprema.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, NekError, Result};
use crate::fourier::fourier_coefficients;
use crate::grid::{unravel, Axis, DomainSpec, GridFunction};
use crate::trig::TrigPoly;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormKind {
    Sup,
    Ck { q: u32 },
    Holder { ell: f64 },
    WeightedFourier { r: f64, s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub kind: NormKind,
    pub value: f64,
    /// Nodes per axis of the grid the supremum was taken on.
    pub resolution: Vec<usize>,
    /// Difference against the same estimate on the half-resolution grid,
    /// when that grid exists.
    pub error_estimate: Option<f64>,
}

/// All multi-indices of the given total order over `d` axes.
pub(crate) fn orders_exact(d: usize, q: u32) -> Vec<Vec<u32>> {
    crate::poly::monomials_up_to(d, q)
        .into_iter()
        .filter(|a| a.iter().sum::<u32>() == q)
        .collect()
}

/// Applies a 1-D stencil along axis `d`. Nodes whose stencil leaves a
/// bounded axis become NaN.
fn stencil_along(v: &[f64], axes: &[Axis], d: usize, offsets: &[(i64, f64)]) -> Vec<f64> {
    let m = axes[d].nodes as i64;
    let stride: usize = axes[d + 1..].iter().map(|a| a.nodes).product();
    let periodic = axes[d].periodic;
    let mut out = vec![f64::NAN; v.len()];
    for (flat, o) in out.iter_mut().enumerate() {
        let i = ((flat / stride) as i64) % m;
        let mut acc = 0.0;
        let mut ok = true;
        for &(off, w) in offsets {
            let mut j = i + off;
            if periodic {
                j = j.rem_euclid(m);
            } else if j < 0 || j >= m {
                ok = false;
                break;
            }
            let idx = (flat as i64 + (j - i) * stride as i64) as usize;
            acc += w * v[idx];
        }
        if ok {
            *o = acc;
        }
    }
    out
}

/// Central finite-difference approximation of `d^alpha f` on the grid,
/// NaN where the stencil does not fit.
pub fn partial_derivative(f: &GridFunction, alpha: &[u32]) -> Vec<f64> {
    let axes = f.axes();
    let mut v = f.values().to_vec();
    for (d, &m) in alpha.iter().enumerate() {
        let h = axes[d].step();
        for _ in 0..m / 2 {
            v = stencil_along(&v, axes, d, &[(-1, 1.0 / (h * h)), (0, -2.0 / (h * h)), (1, 1.0 / (h * h))]);
        }
        if m % 2 == 1 {
            v = stencil_along(&v, axes, d, &[(-1, -0.5 / h), (1, 0.5 / h)]);
        }
    }
    v
}

fn sup_valid(v: &[f64]) -> f64 {
    v.iter().filter(|x| x.is_finite()).fold(0.0, |m, x| m.max(x.abs()))
}

/// `||f||_{C^q}` on the grid.
pub fn ck_norm(f: &GridFunction, q: u32) -> Result<f64> {
    check_resolution(f, q)?;
    let mut best: f64 = 0.0;
    for order in 0..=q {
        for alpha in orders_exact(f.dim(), order) {
            best = best.max(sup_valid(&partial_derivative(f, &alpha)));
        }
    }
    Ok(best)
}

fn check_resolution(f: &GridFunction, q: u32) -> Result<()> {
    for (d, a) in f.axes().iter().enumerate() {
        if a.nodes < q as usize + 2 {
            return Err(NekError::Resolution(format!(
                "axis {d} has {} nodes, need at least {}",
                a.nodes,
                q + 2
            )));
        }
    }
    Ok(())
}

/// Distance used in the Hoelder quotient: max-norm, with wrap-around on
/// periodic axes.
fn node_distance(ia: &[usize], ib: &[usize], axes: &[Axis]) -> f64 {
    let mut d: f64 = 0.0;
    for ((&a, &b), ax) in ia.iter().zip(ib).zip(axes) {
        let mut delta = (a as f64 - b as f64).abs() * ax.step();
        if ax.periodic {
            delta = delta.min(ax.hi - ax.lo - delta);
        }
        d = d.max(delta);
    }
    d
}

/// `sup |D(x) - D(y)| / |x - y|^mu` over valid node pairs with
/// `0 < |x - y| < 1`.
fn holder_quotient(d: &[f64], axes: &[Axis], mu: f64) -> f64 {
    let valid: Vec<(Vec<usize>, f64)> = d
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .map(|(i, v)| (unravel(i, axes), *v))
        .collect();
    let mut best: f64 = 0.0;
    for a in 0..valid.len() {
        for b in a + 1..valid.len() {
            let diff = (valid[a].1 - valid[b].1).abs();
            if diff == 0.0 {
                continue;
            }
            let dist = node_distance(&valid[a].0, &valid[b].0, axes);
            if dist > 0.0 && dist < 1.0 {
                best = best.max(diff / dist.powf(mu));
            }
        }
    }
    best
}

fn holder_value(f: &GridFunction, ell: f64) -> Result<f64> {
    let q = ell.floor() as u32;
    let mu = ell - q as f64;
    let mut value = ck_norm(f, q)?;
    if mu > 0.0 {
        let mut quot: f64 = 0.0;
        for alpha in orders_exact(f.dim(), q) {
            let d = partial_derivative(f, &alpha);
            quot = quot.max(holder_quotient(&d, f.axes(), mu));
        }
        value += quot;
    }
    Ok(value)
}

/// `|f|_{C^ell}`: the `C^floor(ell)` norm plus, for non-integer `ell`, the
/// discrete Hoelder quotient of the top-order derivatives.
pub fn holder_norm_estimate(f: &GridFunction, ell: f64) -> Result<NormReport> {
    if !(ell > 0.0) {
        return domain("regularity ell must be positive");
    }
    let value = holder_value(f, ell)?;
    let error_estimate = match f.coarsen() {
        Some(c) if check_resolution(&c, ell.floor() as u32).is_ok() => {
            Some((value - holder_value(&c, ell)?).abs())
        }
        _ => None,
    };
    Ok(NormReport {
        kind: NormKind::Holder { ell },
        value,
        resolution: f.shape(),
        error_estimate,
    })
}

/// Complex action sample of `D_r`: the real box grid plus offsets
/// `+-r e_j` and `+-i r e_j` at every node.
pub fn complex_action_sample(dom: &DomainSpec, nodes: usize) -> Vec<Vec<Complex64>> {
    let real = dom.action_grid(nodes);
    let n = dom.dim();
    let mut out = Vec::with_capacity(real.len() * (1 + 4 * n));
    for x in real {
        let base: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        out.push(base.clone());
        if dom.r > 0.0 {
            for j in 0..n {
                for off in [
                    Complex64::new(dom.r, 0.0),
                    Complex64::new(-dom.r, 0.0),
                    Complex64::new(0.0, dom.r),
                    Complex64::new(0.0, -dom.r),
                ] {
                    let mut z = base.clone();
                    z[j] += off;
                    out.push(z);
                }
            }
        }
    }
    out
}

/// `||g||_{r,s} = sup_{I in D_r} sum_k |g_k(I)| e^{|k|_1 s}`, with the
/// supremum taken over `complex_action_sample(dom, nodes)`.
pub fn weighted_fourier_norm(g: &TrigPoly, dom: &DomainSpec, s: f64, nodes: usize) -> Result<f64> {
    if !(s >= 0.0) {
        return domain("angle width s must be non-negative");
    }
    if dom.dim() != g.dim() {
        return domain("domain and function dimensions differ");
    }
    let pts = complex_action_sample(dom, nodes);
    if pts.is_empty() {
        return domain("empty action sample");
    }
    Ok(pts
        .iter()
        .map(|z| g.weighted_sum_at(z, s))
        .fold(0.0, f64::max))
}

/// `|g|_{r,s}`: sup of `|g|` over the action sample times angles
/// `x + i y` with `x` on a uniform grid of `angle_nodes` per axis and
/// `y` on the corners `{-s, 0, s}^n`. For trigonometric polynomials the
/// modulus is subharmonic in each angle, so the strip edge is binding.
pub fn strip_sup_norm(
    g: &TrigPoly,
    dom: &DomainSpec,
    s: f64,
    action_nodes: usize,
    angle_nodes: usize,
) -> Result<f64> {
    if dom.dim() != g.dim() {
        return domain("domain and function dimensions differ");
    }
    let n = g.dim();
    let acts = complex_action_sample(dom, action_nodes);
    if acts.is_empty() || angle_nodes == 0 {
        return domain("empty sample");
    }
    let levels: Vec<f64> = if s > 0.0 { vec![-s, 0.0, s] } else { vec![0.0] };
    let real_axes: Vec<Axis> = (0..n).map(|_| Axis::angle(angle_nodes.max(2))).collect();
    let real_total: usize = real_axes.iter().map(|a| a.nodes).product();
    let imag_total = levels.len().pow(n as u32);
    let mut best: f64 = 0.0;
    // Precompute coefficient values per action point once.
    for z in &acts {
        let coeffs: Vec<(Vec<f64>, Complex64)> = g
            .terms()
            .map(|(k, p)| (k.as_f64(), p.eval_complex(z)))
            .collect();
        for rf in 0..real_total {
            let ri = unravel(rf, &real_axes);
            for imf in 0..imag_total {
                let mut rem = imf;
                let mut theta = vec![Complex64::default(); n];
                for j in 0..n {
                    let y = levels[rem % levels.len()];
                    rem /= levels.len();
                    theta[j] = Complex64::new(real_axes[j].coord(ri[j]), y);
                }
                let v: Complex64 = coeffs
                    .iter()
                    .map(|(k, c)| {
                        let ph: Complex64 = k.iter().zip(&theta).map(|(kj, t)| t * *kj).sum();
                        c * (Complex64::i() * ph).exp()
                    })
                    .sum();
                best = best.max(v.norm());
            }
        }
    }
    Ok(best)
}

/// Per-harmonic Fourier decay ratios against the `C^q` norm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    pub ell: f64,
    pub q: u32,
    pub ck_norm: f64,
    /// `(k, |f_k| |k|_inf^q / ||f||_{C^q}, |f_k| |k|_1^q / ||f||_{C^q})`
    pub ratios: Vec<(Vec<i64>, f64, f64)>,
    pub max_ratio_linf: f64,
    pub max_ratio_l1: f64,
}

/// Relative change of the `C^q` norm under coarsening above which the
/// sample is judged not `C^q`.
pub const REGULARITY_TOLERANCE: f64 = 0.25;

/// Empirical constant in `|f_k| <= C ||f||_{C^q} / |k|^q`. Ratios are
/// reported against both `|k|_inf` and `|k|_1`.
pub fn fourier_decay_check(f: &GridFunction, ell: f64) -> Result<DecayReport> {
    if !(ell >= 1.0) {
        return domain("decay check needs ell >= 1");
    }
    let q = ell.floor() as u32;
    let ck = ck_norm(f, q)?;
    let coarse = f
        .coarsen()
        .ok_or_else(|| NekError::Resolution("grid cannot be coarsened for the regularity check".into()))?;
    let ck_coarse = ck_norm(&coarse, q)?;
    if ck > 0.0 && (ck - ck_coarse).abs() > REGULARITY_TOLERANCE * ck {
        return Err(NekError::Regularity(format!(
            "C^{q} norm moves from {ck_coarse:.4e} to {ck:.4e} under refinement; sample is not C^{q}"
        )));
    }
    let n_angle = f.trailing_periodic();
    let min_nodes = f.axes()[f.dim() - n_angle..]
        .iter()
        .map(|a| a.nodes)
        .min()
        .unwrap_or(2);
    let table = fourier_coefficients(f, (min_nodes - 2) / 2)?;
    let mut ratios = Vec::new();
    let (mut mi, mut m1) = (0.0f64, 0.0f64);
    for (k, v) in table.entries() {
        if k.is_zero() {
            continue;
        }
        let amp = v.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let (ri, r1) = if ck > 0.0 {
            (
                amp * (k.linf() as f64).powi(q as i32) / ck,
                amp * (k.l1() as f64).powi(q as i32) / ck,
            )
        } else {
            (0.0, 0.0)
        };
        mi = mi.max(ri);
        m1 = m1.max(r1);
        ratios.push((k.0.clone(), ri, r1));
    }
    Ok(DecayReport {
        ell,
        q,
        ck_norm: ck,
        ratios,
        max_ratio_linf: mi,
        max_ratio_l1: m1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_has_norm_c() {
        let f = GridFunction::from_fn(vec![Axis::bounded(0.0, 2.0, 11)], |_| -3.0).unwrap();
        for ell in [0.5, 1.0, 2.5] {
            let r = holder_norm_estimate(&f, ell).unwrap();
            assert!((r.value - 3.0).abs() < 1e-12, "{ell}: {}", r.value);
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let f = GridFunction::from_fn(vec![Axis::bounded(0.0, 1.0, 3)], |x| x[0]).unwrap();
        assert!(matches!(holder_norm_estimate(&f, 2.5), Err(NekError::Resolution(_))));
        assert!(matches!(holder_norm_estimate(&f, 0.0), Err(NekError::Domain(_))));
    }

    #[test]
    fn second_derivative_stencil() {
        let f = GridFunction::from_fn(vec![Axis::bounded(-1.0, 1.0, 41)], |x| x[0] * x[0]).unwrap();
        let d2 = partial_derivative(&f, &[2]);
        assert!(d2[0].is_nan());
        assert!((d2[20] - 2.0).abs() < 1e-10);
    }
}
