//! Resonant normal form for `H = h(I) + f(I, theta)` with polynomial `h`
//! and trigonometric-polynomial `f`: iterated Lie transforms remove the
//! harmonics with `|k|_1 <= K` outside a lattice `Lambda`, leaving
//! `H o Psi = h + g + f*` with `g` supported on `Lambda cap {|k|_1 <= K}`.
//!
//! Brackets follow `{F, G} = F_I . G_theta - F_theta . G_I`. A generator
//! `chi` with `{h, chi} = f_nr` is applied through its time-one flow
//! (`dI/dt = -chi_theta`, `dtheta/dt = chi_I`), which acts on functions as
//! `exp(-{., chi})` and removes `f_nr` at first order.

mod homological;
mod lie;
mod verify;

use serde::{Deserialize, Serialize};

pub use homological::{solve_homological, DegreeCap, Generator};
pub use lie::{lie_transform, lie_transform_with, normalize, NormalFormResult, NormalizeConfig, NormalFormDiagnostics};
pub use verify::{
    commutator_on, flow_map, verify_normalform, NormalFormCheck, VerifyConfig,
};

use crate::geography::Lattice;
use crate::trig::TrigPoly;

/// `P_Lambda P_K f`: harmonics `k in Lambda` with `|k|_1 <= K`.
pub fn project_resonant(f: &TrigPoly, lattice: &Lattice, k: f64) -> TrigPoly {
    f.filter(|h| h.l1() as f64 <= k && lattice.contains(&h.0))
}

/// The non-resonant part removed by the normal form: `|k|_1 <= K`, `k`
/// outside `Lambda`.
pub fn project_nonresonant(f: &TrigPoly, lattice: &Lattice, k: f64) -> TrigPoly {
    f.filter(|h| h.l1() as f64 <= k && !lattice.contains(&h.0))
}

/// Smallness and width conditions of the normal form lemma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Bound on `||f||_{rho, sigma}`.
    pub epsilon: f64,
    /// Small-divisor level.
    pub alpha: f64,
    pub rho: f64,
    pub rho_prime: f64,
    pub sigma: f64,
    pub k: f64,
    pub xi: f64,
    /// Hessian bound of `h`.
    pub m: f64,
}

/// Each margin is the ratio (allowed / actual) and passes at `>= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub pass: bool,
    pub valid: bool,
    /// `alpha rho' / (256 xi K epsilon)`.
    pub epsilon_margin: f64,
    /// `min(rho, alpha / (2 xi M K)) / rho'`.
    pub rho_margin: f64,
    /// `K sigma / 6`.
    pub cutoff_margin: f64,
}

pub fn check_thresholds(t: &Thresholds) -> ThresholdReport {
    let valid = t.epsilon >= 0.0
        && [t.alpha, t.rho, t.rho_prime, t.sigma, t.k, t.m].iter().all(|v| *v > 0.0)
        && t.xi > 1.0;
    let allowed_eps = t.alpha * t.rho_prime / (256.0 * t.xi * t.k);
    let epsilon_margin = if t.epsilon == 0.0 {
        f64::INFINITY
    } else {
        allowed_eps / t.epsilon
    };
    let rho_margin = t.rho.min(t.alpha / (2.0 * t.xi * t.m * t.k)) / t.rho_prime;
    let cutoff_margin = t.k * t.sigma / 6.0;
    ThresholdReport {
        pass: valid && epsilon_margin >= 1.0 && rho_margin >= 1.0 && cutoff_margin >= 1.0,
        valid,
        epsilon_margin,
        rho_margin,
        cutoff_margin,
    }
}
