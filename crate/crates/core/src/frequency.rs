//! Integrable Hamiltonians `h(I)` seen through their frequency map
//! `omega = grad h` and Hessian.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{domain, Result};
use crate::grid::{unravel, Axis};
use crate::poly::Poly;

/// Action-to-frequency map of an integrable Hamiltonian on the declared
/// box `B_inf(center, radius)`.
pub trait FrequencyMap: Send + Sync {
    fn dim(&self) -> usize;
    fn energy(&self, i: &[f64]) -> f64;
    fn omega(&self, i: &[f64]) -> Vec<f64>;
    fn hessian(&self, i: &[f64]) -> DMatrix<f64>;
    fn center(&self) -> &[f64];
    fn radius(&self) -> f64;

    fn contains(&self, i: &[f64]) -> bool {
        i.iter()
            .zip(self.center())
            .all(|(x, c)| (x - c).abs() <= self.radius() * (1.0 + 1e-12))
    }
}

/// Polynomial Hamiltonian with exact derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyHamiltonian {
    h: Poly,
    grad: Vec<Poly>,
    hess: Vec<Vec<Poly>>,
    center: Vec<f64>,
    radius: f64,
}

impl PolyHamiltonian {
    pub fn new(h: Poly, center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.len() != h.nvars() {
            return domain("domain center dimension differs from the Hamiltonian");
        }
        if !(radius > 0.0) {
            return domain("domain radius must be positive");
        }
        if h.terms().any(|(_, c)| c.im != 0.0) {
            return domain("Hamiltonian coefficients must be real");
        }
        let grad = h.gradient();
        let hess = grad.iter().map(|g| g.gradient()).collect();
        Ok(PolyHamiltonian {
            h,
            grad,
            hess,
            center,
            radius,
        })
    }

    pub fn poly(&self) -> &Poly {
        &self.h
    }

    /// Same Hamiltonian on another box.
    pub fn with_domain(&self, center: Vec<f64>, radius: f64) -> Result<Self> {
        PolyHamiltonian::new(self.h.clone(), center, radius)
    }
}

impl FrequencyMap for PolyHamiltonian {
    fn dim(&self) -> usize {
        self.h.nvars()
    }

    fn energy(&self, i: &[f64]) -> f64 {
        self.h.eval(i).re
    }

    fn omega(&self, i: &[f64]) -> Vec<f64> {
        self.grad.iter().map(|g| g.eval(i).re).collect()
    }

    fn hessian(&self, i: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |a, b| self.hess[a][b].eval(i).re)
    }

    fn center(&self) -> &[f64] {
        &self.center
    }

    fn radius(&self) -> f64 {
        self.radius
    }
}

/// `h(Q^T I)` for an orthogonal `Q`; the domain is rotated with it.
pub struct Rotated<F> {
    inner: F,
    q: DMatrix<f64>,
    center: Vec<f64>,
}

impl<F: FrequencyMap> Rotated<F> {
    pub fn new(inner: F, q: DMatrix<f64>) -> Result<Self> {
        let n = inner.dim();
        if q.nrows() != n || q.ncols() != n {
            return domain("rotation has the wrong shape");
        }
        if (q.transpose() * &q - DMatrix::identity(n, n)).amax() > 1e-12 {
            return domain("rotation is not orthogonal");
        }
        let center = (&q * DVector::from_column_slice(inner.center()))
            .iter()
            .copied()
            .collect();
        Ok(Rotated { inner, q, center })
    }

    fn back(&self, i: &[f64]) -> Vec<f64> {
        (self.q.transpose() * DVector::from_column_slice(i))
            .iter()
            .copied()
            .collect()
    }
}

impl<F: FrequencyMap> FrequencyMap for Rotated<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn energy(&self, i: &[f64]) -> f64 {
        self.inner.energy(&self.back(i))
    }

    fn omega(&self, i: &[f64]) -> Vec<f64> {
        let w = DVector::from_vec(self.inner.omega(&self.back(i)));
        (&self.q * w).iter().copied().collect()
    }

    fn hessian(&self, i: &[f64]) -> DMatrix<f64> {
        &self.q * self.inner.hessian(&self.back(i)) * self.q.transpose()
    }

    fn center(&self) -> &[f64] {
        &self.center
    }

    /// The box is not rotation invariant; the inscribed ball is.
    fn radius(&self) -> f64 {
        self.inner.radius() / (self.dim() as f64).sqrt()
    }
}

/// `lambda h`.
pub struct Scaled<F> {
    pub inner: F,
    pub lambda: f64,
}

impl<F: FrequencyMap> FrequencyMap for Scaled<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn energy(&self, i: &[f64]) -> f64 {
        self.lambda * self.inner.energy(i)
    }

    fn omega(&self, i: &[f64]) -> Vec<f64> {
        self.inner.omega(i).into_iter().map(|w| self.lambda * w).collect()
    }

    fn hessian(&self, i: &[f64]) -> DMatrix<f64> {
        self.inner.hessian(i) * self.lambda
    }

    fn center(&self) -> &[f64] {
        self.inner.center()
    }

    fn radius(&self) -> f64 {
        self.inner.radius()
    }
}

/// Uniform grid over the declared box, `nodes` per axis.
pub fn box_grid(map: &dyn FrequencyMap, nodes: usize, shrink: f64) -> Vec<Vec<f64>> {
    let r = map.radius() - shrink;
    let axes: Vec<Axis> = map
        .center()
        .iter()
        .map(|&c| Axis::bounded(c - r, c + r, nodes.max(2)))
        .collect();
    if nodes <= 1 {
        return vec![map.center().to_vec()];
    }
    let total: usize = axes.iter().map(|a| a.nodes).product();
    (0..total)
        .map(|f| {
            unravel(f, &axes)
                .iter()
                .zip(&axes)
                .map(|(&i, a)| a.coord(i))
                .collect()
        })
        .collect()
}

fn op_norm(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()))
}

/// `M`: the largest Hessian operator norm over a `nodes`-per-axis grid of
/// the declared box.
pub fn hessian_bound(map: &dyn FrequencyMap, nodes: usize) -> f64 {
    box_grid(map, nodes, 0.0)
        .iter()
        .map(|x| op_norm(&map.hessian(x)))
        .fold(0.0, f64::max)
}

/// Largest mismatch between `omega`, `hessian` and central differences of
/// `energy` and `omega` at the given points, relative to the local scale.
pub fn fd_cross_check(map: &dyn FrequencyMap, points: &[Vec<f64>], step: f64) -> f64 {
    let n = map.dim();
    let mut worst: f64 = 0.0;
    for x in points {
        let w = map.omega(x);
        let hm = map.hessian(x);
        let scale = 1.0 + w.iter().fold(0.0f64, |a, v| a.max(v.abs())) + hm.amax();
        for j in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += step;
            xm[j] -= step;
            let dw = (map.energy(&xp) - map.energy(&xm)) / (2.0 * step);
            worst = worst.max((dw - w[j]).abs() / scale);
            let wp = map.omega(&xp);
            let wm = map.omega(&xm);
            for a in 0..n {
                let d = (wp[a] - wm[a]) / (2.0 * step);
                worst = worst.max((d - hm[(a, j)]).abs() / scale);
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_map() {
        let h = Poly::var(2, 0).pow(2).scale_re(0.5) + Poly::var(2, 1).pow(2).scale_re(-0.5);
        let m = PolyHamiltonian::new(h, vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(m.omega(&[0.3, 0.2]), vec![0.3, -0.2]);
        assert_eq!(hessian_bound(&m, 3), 1.0);
        assert!(fd_cross_check(&m, &[vec![0.1, 0.7]], 1e-4) < 1e-6);
    }
}
