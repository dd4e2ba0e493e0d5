use serde::{Deserialize, Serialize};

use super::lattice::Lattice;
use crate::error::{domain, Result};

/// Exponent bookkeeping derived from the steepness indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeographyParams {
    pub n: usize,
    pub ell: f64,
    pub alpha: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub c: Vec<f64>,
    pub a: f64,
    pub b: f64,
    /// Stability-time exponent `a (ell - 1) + 1/2`.
    pub theorem_a: f64,
    /// Confinement-radius exponent, equal to `b`.
    pub theorem_b: f64,
}

/// `p_j = alpha_j ... alpha_{n-2}` for `j <= n-2` and 1 otherwise,
/// `q_j = n p_j - j`, `c_j = q_j - q_{j+1}`, `a = 1/(2 n p_1)`,
/// `b = a / alpha_{n-1}`.
pub fn geography_params(n: usize, alpha: &[f64], ell: f64) -> Result<GeographyParams> {
    if n < 3 {
        return domain("the geography needs n >= 3");
    }
    if alpha.len() != n - 1 {
        return domain(format!("expected {} steepness indices, got {}", n - 1, alpha.len()));
    }
    if alpha.iter().any(|a| !(*a >= 1.0)) {
        return domain("steepness indices must be >= 1");
    }
    if !(ell >= n as f64 + 1.0) {
        return domain("regularity must satisfy ell >= n + 1");
    }
    let p: Vec<f64> = (1..=n)
        .map(|j| {
            if j <= n - 2 {
                alpha[j - 1..n - 2].iter().product()
            } else {
                1.0
            }
        })
        .collect();
    let q: Vec<f64> = p
        .iter()
        .enumerate()
        .map(|(i, pj)| n as f64 * pj - (i + 1) as f64)
        .collect();
    let c: Vec<f64> = (0..n - 1).map(|i| q[i] - q[i + 1]).collect();
    let a = 1.0 / (2.0 * n as f64 * p[0]);
    let b = a / alpha[n - 2];
    Ok(GeographyParams {
        n,
        ell,
        alpha: alpha.to_vec(),
        p,
        q,
        c,
        a,
        b,
        theorem_a: a * (ell - 1.0) + 0.5,
        theorem_b: b,
    })
}

impl GeographyParams {
    /// `q_j` for multiplicity `j >= 1`.
    pub fn q_of(&self, j: usize) -> f64 {
        self.q[j - 1]
    }

    pub fn c_of(&self, j: usize) -> f64 {
        self.c[j - 1]
    }
}

/// Implicit constants of the construction, all configurable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Prefactors {
    pub c_s: f64,
    pub c_r: f64,
    pub c_delta: f64,
    /// Zone widths carry an extra `hierarchy^(j-1)` so that higher
    /// multiplicity zones are wide enough to swallow the crossings of
    /// lower ones at moderate `K`.
    pub hierarchy: f64,
    pub c_big_r: f64,
    pub c_alpha: f64,
    pub c_rj: f64,
    pub c_t0: f64,
    pub c_tl: f64,
}

impl Default for Prefactors {
    fn default() -> Self {
        Prefactors {
            c_s: 1e-2,
            c_r: 1.0,
            c_delta: CALIBRATED_C_DELTA,
            hierarchy: CALIBRATED_HIERARCHY,
            c_big_r: 1.0,
            c_alpha: CALIBRATED_C_ALPHA,
            c_rj: 1.0,
            c_t0: 1.0,
            c_tl: 1.0,
        }
    }
}

/// Defaults found by [`super::calibrate_hierarchy`] on the convex benchmark.
pub const CALIBRATED_C_DELTA: f64 = 0.05;
pub const CALIBRATED_HIERARCHY: f64 = 4.0;
/// Small-divisor constant: the convex benchmark shows ratios
/// `|k . omega| / alpha_L` down to 1.8 at this value.
pub const CALIBRATED_C_ALPHA: f64 = 0.01;

/// Cutoff, widths and radii for one `epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub epsilon: f64,
    pub epsilon0: f64,
    pub k: f64,
    pub s: f64,
    pub r: f64,
    pub big_r: f64,
    pub rho: f64,
    pub m: f64,
    pub prefactors: Prefactors,
    pub params: GeographyParams,
    /// Set when `K` is within 1% of 1 or `s` was capped at 1.
    pub warnings: Vec<String>,
}

/// `K = (eps0/eps)^a`, `s = min(1, c_s (eps/eps0)^a |ln (eps/eps0)^(6(1+a ell))|)`,
/// `r = c_r (eps/eps0)^(1/2)`, `R = c_R eps^b`, `rho = R/(2n)`.
pub fn schedule(
    epsilon: f64,
    epsilon0: f64,
    params: &GeographyParams,
    m: f64,
    prefactors: &Prefactors,
) -> Result<Schedule> {
    if !(epsilon > 0.0) || !(epsilon < epsilon0) {
        return domain("schedule needs 0 < epsilon < epsilon0");
    }
    if !(m > 0.0) {
        return domain("Hessian bound M must be positive");
    }
    let pf = prefactors;
    let ratio = epsilon / epsilon0;
    let a = params.a;
    let k = ratio.powf(-a);
    let log_term = (6.0 * (1.0 + a * params.ell) * ratio.ln()).abs();
    let raw_s = pf.c_s * ratio.powf(a) * log_term;
    let mut warnings = Vec::new();
    if k < 1.01 {
        warnings.push(format!("K = {k} is at the boundary epsilon -> epsilon0"));
    }
    if raw_s > 1.0 {
        warnings.push(format!("s = {raw_s} capped at 1"));
    }
    let s = raw_s.min(1.0);
    let r = pf.c_r * ratio.sqrt();
    if r > s {
        warnings.push(format!("r = {r} exceeds s = {s}"));
    }
    let big_r = pf.c_big_r * epsilon.powf(params.b);
    Ok(Schedule {
        epsilon,
        epsilon0,
        k,
        s,
        r,
        big_r,
        rho: big_r / (2.0 * params.n as f64),
        m,
        prefactors: pf.clone(),
        params: params.clone(),
        warnings,
    })
}

impl Schedule {
    /// `delta_L = c_delta hierarchy^(j-1) / (|L| K^q_j)`; infinite for the
    /// trivial lattice, whose zone is the whole ball.
    pub fn delta(&self, l: &Lattice) -> f64 {
        let j = l.rank();
        if j == 0 {
            return f64::INFINITY;
        }
        delta_value(&self.prefactors, l.covolume(), j, self.params.q_of(j), self.k)
    }

    /// `r_L = delta_L / M`.
    pub fn r_lattice(&self, l: &Lattice) -> f64 {
        self.delta(l) / self.m
    }

    /// Small-divisor level: `c_alpha / (|L| K^(q_j - c_j))`, and
    /// `c_alpha / K^q_1` for the trivial lattice.
    pub fn alpha_lattice(&self, l: &Lattice) -> f64 {
        let j = l.rank();
        let pf = &self.prefactors;
        if j == 0 {
            pf.c_alpha / self.k.powf(self.params.q[0])
        } else {
            pf.c_alpha / (l.covolume() * self.k.powf(self.params.q_of(j) - self.params.c_of(j)))
        }
    }

    /// Disc diameter scale `r_j = c_rj K^(-q_j / alpha_j)`.
    pub fn r_j(&self, j: usize) -> f64 {
        self.prefactors.c_rj * self.k.powf(-self.params.q_of(j) / self.params.alpha[j - 1])
    }

    fn log_factor(&self) -> f64 {
        let p = &self.params;
        (6.0 * (1.0 + p.a * p.ell) * self.epsilon.ln()).abs().powf(p.ell - 1.0)
    }

    /// Non-resonant horizon
    /// `T_0 = c_T0 / ((1 + a ell) |ln eps|^(ell-1) eps^(a(ell-1)+1/2))`.
    pub fn t0(&self) -> f64 {
        let p = &self.params;
        self.prefactors.c_t0
            / ((1.0 + p.a * p.ell)
                * self.epsilon.ln().abs().powf(p.ell - 1.0)
                * self.epsilon.powf(p.theorem_a))
    }

    /// Resonant horizon
    /// `T_L = c_TL r_L / (|ln eps^(6(1+a ell))|^(ell-1) eps^(1+a(ell-1)))`.
    pub fn t_lattice(&self, l: &Lattice) -> f64 {
        let p = &self.params;
        self.prefactors.c_tl * self.r_lattice(l)
            / (self.log_factor() * self.epsilon.powf(1.0 + p.a * (p.ell - 1.0)))
    }
}

/// The zone width formula with an explicit cutoff.
pub fn delta_value(pf: &Prefactors, covolume: f64, j: usize, q_j: f64, k: f64) -> f64 {
    pf.c_delta * pf.hierarchy.powi(j as i32 - 1) / (covolume * k.powf(q_j))
}
