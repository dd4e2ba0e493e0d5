use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bump::BumpSpec;
use crate::error::{domain, NekError, Result};

/// `K(y) = (2 pi)^{-n} int Phi(eta) e^{-i eta.y} d eta`, tensor trapezoid
/// rule on `[-support, support]^n` with `nodes` points per axis.
fn kernel_raw(y: &[Complex64], spec: &BumpSpec, nodes: usize) -> Complex64 {
    let n = spec.dim;
    let b = spec.support;
    let h = 2.0 * b / (nodes as f64 - 1.0);
    let total = nodes.pow(n as u32);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut eta = vec![0.0; n];
    for flat in 0..total {
        let mut rem = flat;
        for e in eta.iter_mut() {
            *e = -b + (rem % nodes) as f64 * h;
            rem /= nodes;
        }
        let w = spec.eval(&eta);
        if w == 0.0 {
            continue;
        }
        let phase: Complex64 = eta.iter().zip(y).map(|(e, yy)| yy * *e).sum();
        acc += w * (-Complex64::i() * phase).exp();
    }
    acc * h.powi(n as i32) / std::f64::consts::TAU.powi(n as i32)
}

/// Change tolerated between `nodes` and `2 nodes` quadratures, relative
/// to the value or, in the far tail, to `1e-6 K(0)`.
pub const KERNEL_DOUBLING_TOL: f64 = 1e-6;

/// Kernel value at a complex point, verified by a doubling check. Returns
/// the finer of the two quadratures.
pub fn kernel(y: &[Complex64], spec: &BumpSpec, quadrature_nodes: usize) -> Result<Complex64> {
    if quadrature_nodes < 32 {
        return domain("kernel quadrature needs at least 32 nodes per axis");
    }
    if y.len() != spec.dim {
        return domain("kernel argument dimension differs from bump dimension");
    }
    let coarse = kernel_raw(y, spec, quadrature_nodes);
    let fine = kernel_raw(y, spec, 2 * quadrature_nodes);
    let scale = kernel_raw(&vec![Complex64::default(); spec.dim], spec, quadrature_nodes).norm();
    if (coarse - fine).norm() > KERNEL_DOUBLING_TOL * fine.norm().max(1e-6 * scale) {
        return Err(NekError::Resolution(format!(
            "kernel quadrature moved by {:.3e} under doubling at {} nodes",
            (coarse - fine).norm(),
            quadrature_nodes
        )));
    }
    Ok(fine)
}

/// Kernel sampled at real points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelTable {
    pub spec: BumpSpec,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<Complex64>,
    pub quadrature_nodes: usize,
}

impl KernelTable {
    /// Tabulates `K` at real points with `quadrature_nodes` per axis; no
    /// doubling check (callers compare tables at two resolutions).
    pub fn tabulate(points: Vec<Vec<f64>>, spec: &BumpSpec, quadrature_nodes: usize) -> Result<Self> {
        if quadrature_nodes < 32 {
            return domain("kernel quadrature needs at least 32 nodes per axis");
        }
        let values = points
            .iter()
            .map(|p| {
                let z: Vec<Complex64> = p.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                kernel_raw(&z, spec, quadrature_nodes)
            })
            .collect();
        Ok(KernelTable {
            spec: spec.clone(),
            points,
            values,
            quadrature_nodes,
        })
    }

    /// `|K(x)| (1 + |x|_2)^{n+1}` at every tabulated point.
    pub fn decay_ratios(&self) -> Vec<f64> {
        let n = self.spec.dim as i32;
        self.points
            .iter()
            .zip(&self.values)
            .map(|(p, v)| {
                let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.norm() * (1.0 + r).powi(n + 1)
            })
            .collect()
    }
}
