use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::bump::BumpSpec;
use crate::error::{domain, NekError, Result};
use crate::fourier::{bin_frequency, fft_nd_with};
use crate::grid::{Axis, GridFunction};

/// Relative movement under doubled padding below which the smoothing is
/// accepted.
pub const PADDING_TOL: f64 = 1e-6;
const MAX_PAD_FACTOR: usize = 64;

/// Convolution with `s^{-n} K(./s)` on a bounded grid, computed as
/// `sum Phi(s eta) F(eta) e^{i eta x}` over the spectrum of the
/// zero-padded samples. Complex points `x + i v` are reached through the
/// multiplier `e^{-eta.v}`.
#[derive(Clone)]
pub struct NonperiodicSmoother {
    axes: Vec<Axis>,
    padded: Vec<usize>,
    /// Multipliers per probe; probe 0 is the real axis.
    multipliers: Vec<Vec<f64>>,
    offsets: Vec<Vec<f64>>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    pub pad_factor: usize,
}

impl std::fmt::Debug for NonperiodicSmoother {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NonperiodicSmoother")
            .field("padded", &self.padded)
            .field("offsets", &self.offsets)
            .finish()
    }
}

/// Imaginary probe offsets `{s/2, s} e_a` for each axis, after the real one.
pub fn probe_offsets(dim: usize, s: f64) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; dim]];
    for a in 0..dim {
        for t in [0.5 * s, s] {
            let mut v = vec![0.0; dim];
            v[a] = t;
            out.push(v);
        }
    }
    out
}

impl NonperiodicSmoother {
    pub fn new(axes: &[Axis], s: f64, phi: &BumpSpec, pad_factor: usize, probes: bool) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return domain(format!("smoothing width s = {s} outside (0, 1]"));
        }
        if axes.iter().any(|a| a.periodic) {
            return domain("non-periodic smoothing needs bounded axes");
        }
        if phi.dim != axes.len() {
            return domain("bump dimension differs from grid dimension");
        }
        let padded: Vec<usize> = axes
            .iter()
            .map(|a| (2 * a.nodes).next_power_of_two() * pad_factor / 2)
            .collect();
        let offsets = if probes {
            probe_offsets(axes.len(), s)
        } else {
            vec![vec![0.0; axes.len()]]
        };
        let total: usize = padded.iter().product();
        let mut multipliers = vec![vec![0.0; total]; offsets.len()];
        let mut eta = vec![0.0; axes.len()];
        for flat in 0..total {
            let mut rem = flat;
            for d in (0..axes.len()).rev() {
                let m = padded[d];
                let i = rem % m;
                rem /= m;
                eta[d] = std::f64::consts::TAU * bin_frequency(i, m) as f64 / (m as f64 * axes[d].step());
            }
            let se: Vec<f64> = eta.iter().map(|e| e * s).collect();
            let w = phi.eval(&se);
            for (p, off) in offsets.iter().enumerate() {
                let damp: f64 = eta.iter().zip(off).map(|(e, v)| e * v).sum();
                multipliers[p][flat] = if w == 0.0 { 0.0 } else { w * (-damp).exp() };
            }
        }
        let mut planner = FftPlanner::new();
        let forward = padded.iter().map(|&m| planner.plan_fft_forward(m)).collect();
        let inverse = padded.iter().map(|&m| planner.plan_fft_inverse(m)).collect();
        Ok(NonperiodicSmoother {
            axes: axes.to_vec(),
            padded,
            multipliers,
            offsets,
            forward,
            inverse,
            pad_factor,
        })
    }

    pub fn offsets(&self) -> &[Vec<f64>] {
        &self.offsets
    }

    /// Smoothed values on the original nodes, one vector per probe.
    pub fn apply(&self, values: &[Complex64]) -> Vec<Vec<Complex64>> {
        let dim = self.axes.len();
        let total: usize = self.padded.iter().product();
        let mut buf = vec![Complex64::default(); total];
        let shape: Vec<usize> = self.axes.iter().map(|a| a.nodes).collect();
        let count: usize = shape.iter().product();
        let map = |flat: usize| -> usize {
            let mut rem = flat;
            let mut out = 0;
            let mut stride = 1;
            for d in (0..dim).rev() {
                let i = rem % shape[d];
                rem /= shape[d];
                out += i * stride;
                stride *= self.padded[d];
            }
            out
        };
        for (f, v) in values.iter().enumerate().take(count) {
            buf[map(f)] = *v;
        }
        fft_nd_with(&mut buf, &self.padded, &self.forward);
        let norm = 1.0 / total as f64;
        self.multipliers
            .iter()
            .map(|mult| {
                let mut b: Vec<Complex64> = buf.iter().zip(mult).map(|(c, m)| c * (m * norm)).collect();
                fft_nd_with(&mut b, &self.padded, &self.inverse);
                (0..count).map(|f| b[map(f)]).collect()
            })
            .collect()
    }
}

/// Smoothing of a compactly supported grid function.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmoothedField {
    pub width: f64,
    /// Real part of `f_s` on the input nodes.
    pub values: Vec<f64>,
    pub probe_offsets: Vec<Vec<f64>>,
    /// `f_s(x + i v)` for every probe offset `v` (probe 0 is real).
    pub probes: Vec<Vec<Complex64>>,
    /// `max |f_s|` over all probes.
    pub strip_sup: f64,
    pub pad_factor: usize,
}

impl SmoothedField {
    pub fn grid(&self, like: &GridFunction) -> Result<GridFunction> {
        GridFunction::new(like.axes().to_vec(), self.values.clone())
    }
}

/// Picks the smallest padding for which doubling moves the result by less
/// than `PADDING_TOL` relative to `scale`.
pub(crate) fn calibrated_smoother(
    axes: &[Axis],
    s: f64,
    phi: &BumpSpec,
    sample: &[Complex64],
    probes: bool,
) -> Result<NonperiodicSmoother> {
    let scale = sample.iter().fold(0.0f64, |m, c| m.max(c.norm())).max(f64::MIN_POSITIVE);
    let mut factor = 2;
    let mut cur = NonperiodicSmoother::new(axes, s, phi, factor, probes)?;
    let mut cur_out = cur.apply(sample);
    while factor < MAX_PAD_FACTOR {
        let next = NonperiodicSmoother::new(axes, s, phi, 2 * factor, probes)?;
        let next_out = next.apply(sample);
        let moved = cur_out
            .iter()
            .zip(&next_out)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0f64, f64::max);
        if moved < PADDING_TOL * scale {
            return Ok(cur);
        }
        factor *= 2;
        cur = next;
        cur_out = next_out;
    }
    Err(NekError::Resolution(format!(
        "smoothing did not settle up to padding factor {MAX_PAD_FACTOR}"
    )))
}

/// `f_s = int K(y) f(x - s y) dy` for `f` supported inside a bounded grid.
pub fn smooth_nonperiodic(f: &GridFunction, s: f64, phi: &BumpSpec) -> Result<SmoothedField> {
    if !(s > 0.0 && s <= 1.0) {
        return domain(format!("smoothing width s = {s} outside (0, 1]"));
    }
    if f.axes().iter().any(|a| a.periodic) {
        return domain("non-periodic smoothing needs bounded axes");
    }
    let scale = f.sup_abs();
    let edge_tol = 1e-12 * scale;
    for flat in 0..f.len() {
        let idx = f.index(flat);
        let on_edge = idx
            .iter()
            .zip(f.axes())
            .any(|(&i, a)| i == 0 || i + 1 == a.nodes);
        if on_edge && f.values()[flat].abs() > edge_tol {
            return domain("support touches the grid boundary");
        }
    }
    let data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    // Padding is calibrated on a data-independent reference so the map
    // stays exactly linear in f.
    let reference = vec![Complex64::new(1.0, 0.0); f.len()];
    let sm = calibrated_smoother(f.axes(), s, phi, &reference, true)?;
    let probes = sm.apply(&data);
    let strip_sup = probes
        .iter()
        .flat_map(|p| p.iter().map(|c| c.norm()))
        .fold(0.0, f64::max);
    Ok(SmoothedField {
        width: s,
        values: probes[0].iter().map(|c| c.re).collect(),
        probe_offsets: sm.offsets().to_vec(),
        probes,
        strip_sup,
        pad_factor: sm.pad_factor,
    })
}
