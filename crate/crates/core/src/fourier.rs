//! Discrete Fourier analysis in the angle variables.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, NekError, Result};
use crate::grid::{Axis, GridFunction};
use crate::poly::Poly;
use crate::trig::{MultiIndex, TrigPoly};

/// Relative size below which a sampled harmonic counts as zero.
pub const HARMONIC_FLOOR: f64 = 1e-13;

/// In-place multidimensional FFT over a row-major array. The inverse is
/// unnormalized, as in `rustfft`.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let mut planner = FftPlanner::new();
    let plans: Vec<Arc<dyn Fft<f64>>> = shape
        .iter()
        .map(|&m| {
            if inverse {
                planner.plan_fft_inverse(m)
            } else {
                planner.plan_fft_forward(m)
            }
        })
        .collect();
    fft_nd_with(data, shape, &plans);
}

pub(crate) fn fft_nd_with(data: &mut [Complex64], shape: &[usize], plans: &[Arc<dyn Fft<f64>>]) {
    let total: usize = shape.iter().product();
    debug_assert_eq!(data.len(), total);
    let mut stride = 1;
    let mut line = Vec::new();
    for d in (0..shape.len()).rev() {
        let m = shape[d];
        if m > 1 {
            let block = stride * m;
            line.resize(m, Complex64::default());
            for outer in (0..total).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    if stride == 1 {
                        plans[d].process(&mut data[base..base + m]);
                    } else {
                        for i in 0..m {
                            line[i] = data[base + i * stride];
                        }
                        plans[d].process(&mut line);
                        for i in 0..m {
                            data[base + i * stride] = line[i];
                        }
                    }
                }
            }
        }
        stride *= m;
    }
}

/// Signed frequency of FFT bin `i` out of `m`.
pub fn bin_frequency(i: usize, m: usize) -> i64 {
    if i <= m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

/// Fourier coefficients `f_k` sampled on the action nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    n_angle: usize,
    action_axes: Vec<Axis>,
    coeffs: BTreeMap<MultiIndex, Vec<Complex64>>,
}

impl CoefficientTable {
    /// Builds a table from explicit harmonics. Each vector holds one value
    /// per action node (a single value when there are no action axes).
    pub fn new(
        n_angle: usize,
        action_axes: Vec<Axis>,
        coeffs: BTreeMap<MultiIndex, Vec<Complex64>>,
    ) -> Result<Self> {
        let nodes: usize = action_axes.iter().map(|a| a.nodes).product();
        for (k, v) in &coeffs {
            if k.dim() != n_angle {
                return domain("harmonic dimension differs from angle count");
            }
            if v.len() != nodes {
                return domain("coefficient vector length differs from action node count");
            }
        }
        let t = CoefficientTable {
            n_angle,
            action_axes,
            coeffs,
        };
        let scale = t.max_abs().max(f64::MIN_POSITIVE);
        for (k, v) in &t.coeffs {
            let partner = t.coeffs.get(&k.neg());
            for (a, c) in v.iter().enumerate() {
                let p = partner.map(|w| w[a]).unwrap_or_default();
                if (p - c.conj()).norm() > 1e-10 * scale {
                    return domain(format!("reality invariant violated at k = {:?}", k.0));
                }
            }
        }
        Ok(t)
    }

    pub fn n_angle(&self) -> usize {
        self.n_angle
    }

    pub fn action_axes(&self) -> &[Axis] {
        &self.action_axes
    }

    pub fn node_count(&self) -> usize {
        self.action_axes.iter().map(|a| a.nodes).product()
    }

    pub fn action_point(&self, a: usize) -> Vec<f64> {
        crate::grid::unravel(a, &self.action_axes)
            .iter()
            .zip(&self.action_axes)
            .map(|(&i, ax)| ax.coord(i))
            .collect()
    }

    pub fn harmonics(&self) -> impl Iterator<Item = &MultiIndex> {
        self.coeffs.keys()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&MultiIndex, &Vec<Complex64>)> {
        self.coeffs.iter()
    }

    pub fn get(&self, k: &MultiIndex) -> Option<&[Complex64]> {
        self.coeffs.get(k).map(|v| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .values()
            .flat_map(|v| v.iter())
            .fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest `|k|_inf` present.
    pub fn max_order(&self) -> i64 {
        self.coeffs.keys().map(|k| k.linf()).max().unwrap_or(0)
    }

    /// `sum_k f_k(a) e^{i k.theta}` at action node `a`, real part.
    pub fn evaluate(&self, a: usize, theta: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, v)| (v[a] * Complex64::from_polar(1.0, k.dot(theta))).re)
            .sum()
    }

    /// Converts an action-independent table into a trigonometric polynomial
    /// whose coefficients are constants in `n_angle` action variables.
    pub fn to_trigpoly(&self) -> Result<TrigPoly> {
        if self.node_count() != 1 {
            return domain("table has action dependence; fit coefficients first");
        }
        let n = self.n_angle;
        let mut t = TrigPoly::zero(n);
        for (k, v) in &self.coeffs {
            t.add_harmonic(k.clone(), Poly::constant(n, v[0]));
        }
        Ok(t)
    }

    /// Table of an action-independent trigonometric polynomial.
    pub fn from_trigpoly(g: &TrigPoly) -> Result<Self> {
        if !g.is_action_independent() {
            return domain("trigonometric polynomial depends on the actions");
        }
        let zero = vec![0.0; g.dim()];
        let coeffs = g
            .terms()
            .map(|(k, p)| (k.clone(), vec![p.eval(&zero)]))
            .collect();
        CoefficientTable::new(g.dim(), Vec::new(), coeffs)
    }
}

/// Fourier coefficients in the trailing periodic axes of `f`, for all
/// `|k|_inf <= max_order`, one DFT per action node.
pub fn fourier_coefficients(f: &GridFunction, max_order: usize) -> Result<CoefficientTable> {
    let n_angle = f.trailing_periodic();
    if n_angle == 0 {
        return Err(NekError::Domain(
            "the trailing axis is not periodic; no angle variables".into(),
        ));
    }
    let axes = f.axes();
    let split = axes.len() - n_angle;
    let angle_shape: Vec<usize> = axes[split..].iter().map(|a| a.nodes).collect();
    for (j, &m) in angle_shape.iter().enumerate() {
        if m < 2 * max_order + 2 {
            return Err(NekError::Resolution(format!(
                "angle axis {j} has {m} nodes, need at least {}",
                2 * max_order + 2
            )));
        }
        let a = &axes[split + j];
        if ((a.hi - a.lo) - std::f64::consts::TAU).abs() > 1e-12 {
            return domain("angle axes must span one period 2 pi");
        }
    }
    let action_axes = axes[..split].to_vec();
    let block: usize = angle_shape.iter().product();
    let nodes = f.len() / block;
    let orders: Vec<MultiIndex> = all_indices(n_angle, max_order as i64);

    let mut planner = FftPlanner::new();
    let plans: Vec<Arc<dyn Fft<f64>>> = angle_shape
        .iter()
        .map(|&m| planner.plan_fft_forward(m))
        .collect();
    let mut raw: BTreeMap<MultiIndex, Vec<Complex64>> = orders
        .iter()
        .map(|k| (k.clone(), vec![Complex64::default(); nodes]))
        .collect();
    let mut buf = vec![Complex64::default(); block];
    for a in 0..nodes {
        for (b, v) in buf.iter_mut().zip(&f.values()[a * block..(a + 1) * block]) {
            *b = Complex64::new(*v, 0.0);
        }
        fft_nd_with(&mut buf, &angle_shape, &plans);
        for k in &orders {
            let mut flat = 0;
            for (j, &kj) in k.0.iter().enumerate() {
                let m = angle_shape[j] as i64;
                flat = flat * angle_shape[j] + kj.rem_euclid(m) as usize;
            }
            // Angles start at `lo`; shift the phase accordingly.
            let shift: f64 = k
                .0
                .iter()
                .zip(&axes[split..])
                .map(|(&kj, ax)| kj as f64 * ax.lo)
                .sum();
            raw.get_mut(k).expect("index present")[a] =
                buf[flat] / block as f64 * Complex64::from_polar(1.0, -shift);
        }
    }
    let scale = f.sup_abs();
    let mut coeffs = BTreeMap::new();
    for k in &orders {
        let v = &raw[k];
        let w = &raw[&k.neg()];
        let sym: Vec<Complex64> = v.iter().zip(w).map(|(c, d)| (c + d.conj()) * 0.5).collect();
        let m = sym.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        if m > HARMONIC_FLOOR * scale {
            coeffs.insert(k.clone(), sym);
        }
    }
    CoefficientTable::new(n_angle, action_axes, coeffs)
}

/// All multi-indices with `|k|_inf <= m`, in lexicographic order.
pub fn all_indices(n: usize, m: i64) -> Vec<MultiIndex> {
    let mut out = vec![MultiIndex(Vec::new())];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * (2 * m as usize + 1));
        for k in &out {
            for v in -m..=m {
                let mut kk = k.0.clone();
                kk.push(v);
                next.push(MultiIndex(kk));
            }
        }
        out = next;
    }
    out
}

/// All multi-indices with `|k|_1 <= m`.
pub fn l1_ball(n: usize, m: i64) -> Vec<MultiIndex> {
    all_indices(n, m).into_iter().filter(|k| k.l1() <= m).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_has_two_halves() {
        let f = GridFunction::from_fn(vec![Axis::angle(16)], |x| x[0].cos()).unwrap();
        let t = fourier_coefficients(&f, 4).unwrap();
        assert_eq!(t.len(), 2);
        for k in [1, -1] {
            let c = t.get(&MultiIndex(vec![k])).unwrap()[0];
            assert!((c - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn needs_enough_nodes() {
        let f = GridFunction::from_fn(vec![Axis::angle(9)], |x| x[0].cos()).unwrap();
        assert!(matches!(
            fourier_coefficients(&f, 4),
            Err(NekError::Resolution(_))
        ));
    }

    #[test]
    fn rejects_bounded_trailing_axis() {
        let f = GridFunction::from_fn(vec![Axis::bounded(0.0, 1.0, 16)], |x| x[0]).unwrap();
        assert!(matches!(fourier_coefficients(&f, 2), Err(NekError::Domain(_))));
    }
}
