use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Orthonormal basis of an `m`-dimensional subspace of `R^n`, `1 <= m < n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceFrame {
    basis: Vec<Vec<f64>>,
}

impl SubspaceFrame {
    /// Accepts an already orthonormal basis; the Gram matrix must be the
    /// identity within `1e-12`.
    pub fn new(basis: Vec<Vec<f64>>) -> Result<Self> {
        let m = basis.len();
        let n = basis.first().map(|b| b.len()).unwrap_or(0);
        if m == 0 || m >= n {
            return domain("frame dimension must satisfy 1 <= m < n");
        }
        if basis.iter().any(|b| b.len() != n) {
            return domain("frame vectors have different lengths");
        }
        for a in 0..m {
            for b in 0..m {
                let g: f64 = basis[a].iter().zip(&basis[b]).map(|(x, y)| x * y).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                if (g - target).abs() > 1e-12 {
                    return domain("frame is not orthonormal");
                }
            }
        }
        Ok(SubspaceFrame { basis })
    }

    /// Gram-Schmidt on the given vectors after removing the components
    /// along `against` (vectors in the list are orthogonalized in order).
    pub fn orthonormalize(vectors: &[Vec<f64>], against: &[Vec<f64>]) -> Result<Self> {
        let mut done: Vec<Vec<f64>> = Vec::new();
        let mut fixed: Vec<Vec<f64>> = Vec::new();
        for a in against {
            if let Some(u) = reduce(a, &fixed) {
                fixed.push(u);
            }
        }
        for v in vectors {
            let mut all = fixed.clone();
            all.extend(done.iter().cloned());
            match reduce(v, &all) {
                Some(u) => done.push(u),
                None => return domain("frame vectors are linearly dependent"),
            }
        }
        SubspaceFrame::new(done)
    }

    /// Uniformly distributed `m`-frame inside the orthocomplement of `w`.
    pub fn random_orthogonal<R: Rng>(rng: &mut R, w: &[f64], m: usize) -> Result<Self> {
        let n = w.len();
        loop {
            let vs: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
                .collect();
            match SubspaceFrame::orthonormalize(&vs, &[w.to_vec()]) {
                Ok(f) => return Ok(f),
                Err(_) if m < n => continue,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> usize {
        self.basis[0].len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// `n x m` matrix with the basis as columns.
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.ambient(), self.dim(), |i, j| self.basis[j][i])
    }

    /// Coordinates `B^T x`.
    pub fn coords(&self, x: &[f64]) -> Vec<f64> {
        self.basis
            .iter()
            .map(|b| b.iter().zip(x).map(|(p, q)| p * q).sum())
            .collect()
    }

    /// `B c`.
    pub fn embed(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient()];
        for (b, &cj) in self.basis.iter().zip(c) {
            for (o, v) in out.iter_mut().zip(b) {
                *o += cj * v;
            }
        }
        out
    }

    /// Largest `|<b, w>| / |w|` over the basis.
    pub fn obliquity(&self, w: &[f64]) -> f64 {
        let nw = norm(w);
        if nw == 0.0 {
            return 0.0;
        }
        self.coords(w).iter().fold(0.0f64, |a, v| a.max(v.abs())) / nw
    }

    /// Image under an orthogonal matrix.
    pub fn rotate(&self, q: &DMatrix<f64>) -> Result<Self> {
        let basis: Vec<Vec<f64>> = self
            .basis
            .iter()
            .map(|b| (q * DVector::from_column_slice(b)).iter().copied().collect())
            .collect();
        SubspaceFrame::orthonormalize(&basis, &[])
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn reduce(v: &[f64], basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    let scale = norm(v);
    if scale == 0.0 {
        return None;
    }
    let mut u = v.to_vec();
    // Two passes of modified Gram-Schmidt keep the Gram matrix at 1e-16.
    for _ in 0..2 {
        for b in basis {
            let d: f64 = u.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in u.iter_mut().zip(b) {
                *x -= d * y;
            }
        }
    }
    let nu = norm(&u);
    if nu < 1e-10 * scale {
        return None;
    }
    Some(u.into_iter().map(|x| x / nu).collect())
}
