use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimate::{sample_points, stream_rng, SteepnessProfile, Witness};
use super::frame::{norm, SubspaceFrame};
use super::margin::{margin_curve, SphereBudget};
use crate::error::{domain, Result};
use crate::frequency::FrequencyMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyBudget {
    pub grid_nodes: usize,
    pub random_points: usize,
    pub frames: usize,
    /// Dyadic `xi` values `delta, delta/2, ...`.
    pub xi_count: usize,
    pub eta_samples: usize,
    pub sphere: SphereBudget,
    pub seed: u64,
}

impl Default for VerifyBudget {
    fn default() -> Self {
        VerifyBudget {
            grid_nodes: 4,
            random_points: 16,
            frames: 16,
            xi_count: 8,
            eta_samples: 8,
            sphere: SphereBudget::default(),
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteepnessCheck {
    pub pass: bool,
    /// `min margin / (C_m xi^alpha_m)` over every sampled `(I, Gamma, xi)`.
    pub worst_ratio: f64,
    pub worst: Option<Witness>,
    /// `min |omega(I)|` over the sample.
    pub inf_frequency: f64,
    pub configurations: usize,
    pub budget: VerifyBudget,
}

/// Checks both steepness conditions on a sample: `inf |omega| > 0` and
/// `margin > C_m xi^alpha_m` for `xi` in `(0, delta]`. Failures are report
/// content; only malformed input is an error.
pub fn verify_steepness(
    map: &dyn FrequencyMap,
    profile: &SteepnessProfile,
    budget: &VerifyBudget,
) -> Result<SteepnessCheck> {
    let n = map.dim();
    if profile.alpha.len() != n.saturating_sub(1) || profile.c.len() != profile.alpha.len() {
        return domain("profile does not have one entry per multiplicity 1..n-1");
    }
    if !(profile.delta > 0.0) || profile.delta >= map.radius() {
        return domain("profile delta must lie in (0, domain radius)");
    }
    let mut xis: Vec<f64> = (0..budget.xi_count.max(1))
        .map(|j| profile.delta / 2f64.powi(j as i32))
        .collect();
    xis.reverse();
    let points = sample_points(map, budget.grid_nodes, budget.random_points, profile.delta, budget.seed);
    let inf_frequency = points
        .iter()
        .map(|p| norm(&map.omega(p)))
        .fold(f64::INFINITY, f64::min);

    let mut worst_ratio = f64::INFINITY;
    let mut worst = None;
    let mut configurations = 0;
    for m in 1..n {
        let (alpha, c) = (profile.alpha[m - 1], profile.c[m - 1]);
        let rows: Vec<Vec<(f64, Witness)>> = points
            .par_iter()
            .enumerate()
            .map(|(pi, p)| {
                let mut rng = stream_rng(budget.seed, m, pi as u64);
                let w = map.omega(p);
                let count = if m == n - 1 { 1 } else { budget.frames };
                let mut out = Vec::new();
                for _ in 0..count {
                    let f = SubspaceFrame::random_orthogonal(&mut rng, &w, m)?;
                    let curve = margin_curve(map, p, &f, &xis, budget.eta_samples, &budget.sphere)?;
                    for (xi, mg) in xis.iter().zip(&curve) {
                        let ratio = mg / (c * xi.powf(alpha));
                        out.push((
                            ratio,
                            Witness {
                                multiplicity: m,
                                point: p.clone(),
                                basis: f.basis().to_vec(),
                                eta: *xi,
                                margin: *mg,
                            },
                        ));
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        for (r, w) in rows.into_iter().flatten() {
            configurations += 1;
            if r < worst_ratio {
                worst_ratio = r;
                worst = Some(w);
            }
        }
    }
    Ok(SteepnessCheck {
        pass: inf_frequency > 0.0 && worst_ratio > 1.0,
        worst_ratio,
        worst,
        inf_frequency,
        configurations,
        budget: budget.clone(),
    })
}
