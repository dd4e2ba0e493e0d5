use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Radial cutoff equal to 1 on the plateau ball and 0 outside the support
/// ball, with a `C^inf` transition built from `exp(-1/t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub dim: usize,
    pub plateau: f64,
    pub support: f64,
    pub profile: String,
}

pub const PROFILE: &str = "exp-smooth-step";

impl BumpSpec {
    pub fn new(dim: usize, plateau: f64, support: f64) -> Result<Self> {
        if dim == 0 {
            return domain("bump dimension must be positive");
        }
        if !(plateau > 0.0 && plateau < support) {
            return domain("need 0 < plateau < support");
        }
        Ok(BumpSpec {
            dim,
            plateau,
            support,
            profile: PROFILE.into(),
        })
    }

    /// Action-side bump: plateau 1/2, support the unit Euclidean ball.
    pub fn phi(dim: usize) -> Self {
        BumpSpec::new(dim, 0.5, 1.0).expect("valid constants")
    }

    /// Angle-side bump. Its support radius `1/sqrt(n)` keeps the support
    /// inside the unit l1 ball, so `psi(s k) = 0` whenever `|k|_1 > 1/s`.
    pub fn psi(dim: usize) -> Self {
        let rad = 1.0 / (dim as f64).sqrt();
        BumpSpec::new(dim, 0.5 * rad, rad).expect("valid constants")
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        bump(x, self)
    }

    pub fn radial(&self, r: f64) -> f64 {
        if r <= self.plateau {
            1.0
        } else if r >= self.support {
            0.0
        } else {
            smooth_step((self.support - r) / (self.support - self.plateau))
        }
    }
}

/// `0` for `t <= 0`, `1` for `t >= 1`, smooth and monotone in between.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

pub fn bump(x: &[f64], spec: &BumpSpec) -> f64 {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    spec.radial(r)
}
