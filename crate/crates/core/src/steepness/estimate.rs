use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::frame::{norm, SubspaceFrame};
use super::margin::{margin_curve, steepness_margin, SphereBudget};
use crate::error::{domain, Result};
use crate::fit::loglog_fit;
use crate::frequency::{box_grid, FrequencyMap};

/// Margins below this count as a steepness violation.
pub const VIOLATION_FLOOR: f64 = 1e-12;
/// Points with `|omega| <` this are excluded as degenerate.
pub const DEGENERATE_FREQUENCY: f64 = 1e-8;

/// Sample sizes for [`estimate_indices`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    /// Uniform grid nodes per axis over the sampled box.
    pub grid_nodes: usize,
    /// Extra uniform random points.
    pub random_points: usize,
    /// Random frames per point and multiplicity.
    pub frames: usize,
    pub xi_min: f64,
    pub xi_max: f64,
    pub xi_count: usize,
    pub eta_samples: usize,
    pub sphere: SphereBudget,
    /// Rounds of randomized local search on the worst frame.
    pub refine_rounds: usize,
    pub seed: u64,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            grid_nodes: 5,
            random_points: 16,
            frames: 16,
            xi_min: 0.1 / 128.0,
            xi_max: 0.1,
            xi_count: 8,
            eta_samples: 8,
            sphere: SphereBudget::default(),
            refine_rounds: 400,
            seed: 0,
        }
    }
}

impl EstimateConfig {
    /// Geometric grid from `xi_min` to `xi_max`.
    pub fn xi_grid(&self) -> Vec<f64> {
        let k = self.xi_count.max(2);
        let r = (self.xi_max / self.xi_min).ln();
        (0..k)
            .map(|j| self.xi_min * (r * j as f64 / (k - 1) as f64).exp())
            .collect()
    }
}

/// A sampled configuration `(I, Gamma)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub multiplicity: usize,
    pub point: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    pub eta: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteepnessProfile {
    /// `alpha_1 .. alpha_{n-1}`.
    pub alpha: Vec<f64>,
    #[serde(rename = "C")]
    pub c: Vec<f64>,
    pub delta: f64,
    /// Root-mean-square log residual of each fit.
    pub residuals: Vec<f64>,
    pub seed: u64,
    pub budget: EstimateConfig,
    /// Unclamped fitted slopes.
    pub raw_slopes: Vec<f64>,
    /// Whether `alpha_m` was raised to 1.
    pub clamped: Vec<bool>,
    /// Worst configuration per multiplicity, after refinement.
    pub worst: Vec<Witness>,
    pub xi: Vec<f64>,
    /// Margin curve at the worst configuration, per multiplicity.
    pub curves: Vec<Vec<f64>>,
    pub points_sampled: usize,
    /// Points dropped because `omega(I)` nearly vanishes.
    pub excluded: Vec<Vec<f64>>,
}

impl SteepnessProfile {
    /// A hand-written profile, e.g. to test [`super::verify_steepness`].
    pub fn manual(alpha: Vec<f64>, c: Vec<f64>, delta: f64) -> Result<Self> {
        if alpha.len() != c.len() || alpha.is_empty() {
            return domain("profile needs one alpha and one C per multiplicity");
        }
        if alpha.iter().any(|a| !(*a >= 1.0)) || c.iter().any(|v| !(*v > 0.0)) || !(delta > 0.0) {
            return domain("profile needs alpha >= 1, C > 0 and delta > 0");
        }
        let k = alpha.len();
        Ok(SteepnessProfile {
            raw_slopes: alpha.clone(),
            alpha,
            c,
            delta,
            residuals: vec![0.0; k],
            seed: 0,
            budget: EstimateConfig::default(),
            clamped: vec![false; k],
            worst: Vec::new(),
            xi: Vec::new(),
            curves: Vec::new(),
            points_sampled: 0,
            excluded: Vec::new(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub witness: Witness,
    pub seed: u64,
    pub budget: EstimateConfig,
    pub excluded: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SteepnessOutcome {
    Profile(SteepnessProfile),
    Violation(ViolationReport),
}

impl SteepnessOutcome {
    pub fn profile(&self) -> Option<&SteepnessProfile> {
        match self {
            SteepnessOutcome::Profile(p) => Some(p),
            SteepnessOutcome::Violation(_) => None,
        }
    }

    pub fn violation(&self) -> Option<&ViolationReport> {
        match self {
            SteepnessOutcome::Violation(v) => Some(v),
            SteepnessOutcome::Profile(_) => None,
        }
    }
}

/// Independent stream per `(multiplicity, point)` so results do not depend
/// on the parallel schedule.
pub(crate) fn stream_rng(seed: u64, m: usize, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((m as u64) << 40) ^ index);
    rng
}

/// Grid points of the box shrunk by `shrink`, plus `random` uniform points.
pub(crate) fn sample_points(
    map: &dyn FrequencyMap,
    nodes: usize,
    random: usize,
    shrink: f64,
    seed: u64,
) -> Vec<Vec<f64>> {
    let mut pts = box_grid(map, nodes, shrink);
    let r = map.radius() - shrink;
    let mut rng = stream_rng(seed, 0, u64::MAX);
    for _ in 0..random {
        pts.push(
            map.center()
                .iter()
                .map(|c| c + r * rng.random_range(-1.0..=1.0))
                .collect(),
        );
    }
    pts
}

fn witness(m: usize, point: &[f64], frame: &SubspaceFrame, eta: f64, margin: f64) -> Witness {
    Witness {
        multiplicity: m,
        point: point.to_vec(),
        basis: frame.basis().to_vec(),
        eta,
        margin,
    }
}

/// Randomized local search over frames in `omega(I)^perp` that lowers the
/// margin at `xi`.
fn refine_frame(
    map: &dyn FrequencyMap,
    point: &[f64],
    start: SubspaceFrame,
    start_value: f64,
    xi: f64,
    cfg: &EstimateConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(SubspaceFrame, f64)> {
    let w = map.omega(point);
    let n = map.dim();
    let (mut best, mut value) = (start, start_value);
    let mut sigma = 0.3;
    for _ in 0..cfg.refine_rounds {
        if sigma < 1e-10 || value < VIOLATION_FLOOR {
            break;
        }
        let moved: Vec<Vec<f64>> = best
            .basis()
            .iter()
            .map(|b| {
                b.iter()
                    .map(|x| x + sigma * rng.sample::<f64, _>(StandardNormal) / (n as f64).sqrt())
                    .collect()
            })
            .collect();
        let Ok(trial) = SubspaceFrame::orthonormalize(&moved, &[w.clone()]) else {
            sigma *= 0.5;
            continue;
        };
        let v = steepness_margin(map, point, &trial, xi, cfg.eta_samples, &cfg.sphere)?;
        if v < value {
            best = trial;
            value = v;
            sigma *= 1.5;
        } else {
            sigma *= 0.8;
        }
    }
    Ok((best, value))
}

/// Estimates `alpha_m` and `C_m` by a log-log fit of the margin against
/// `xi` at the worst sampled configuration of each multiplicity. A margin
/// below [`VIOLATION_FLOOR`] anywhere yields a violation report instead.
pub fn estimate_indices(map: &dyn FrequencyMap, cfg: &EstimateConfig) -> Result<SteepnessOutcome> {
    check_config(map, cfg)?;
    let all = sample_points(map, cfg.grid_nodes, cfg.random_points, cfg.xi_max, cfg.seed);
    estimate_on(map, all, cfg)
}

/// [`estimate_indices`] restricted to the single action `point`: the
/// worst direction through `point` for each multiplicity.
pub fn pointwise_indices(
    map: &dyn FrequencyMap,
    point: &[f64],
    cfg: &EstimateConfig,
) -> Result<SteepnessOutcome> {
    check_config(map, cfg)?;
    if point.len() != map.dim() {
        return domain("point dimension differs from the frequency map");
    }
    estimate_on(map, vec![point.to_vec()], cfg)
}

fn check_config(map: &dyn FrequencyMap, cfg: &EstimateConfig) -> Result<()> {
    if map.dim() < 2 {
        return domain("steepness needs n >= 2");
    }
    if cfg.xi_count < 8 || !(cfg.xi_min > 0.0) || cfg.xi_max / cfg.xi_min < 100.0 {
        return domain("xi grid needs at least 8 points spanning a factor of at least 100");
    }
    if cfg.frames < 16 {
        return domain("at least 16 frames per multiplicity are required");
    }
    if cfg.xi_max >= map.radius() {
        return domain("xi_max must be smaller than the domain radius");
    }
    Ok(())
}

fn estimate_on(map: &dyn FrequencyMap, all: Vec<Vec<f64>>, cfg: &EstimateConfig) -> Result<SteepnessOutcome> {
    let n = map.dim();
    let xis = cfg.xi_grid();
    let xi0 = xis[0];
    let (points, excluded): (Vec<_>, Vec<_>) = all
        .into_iter()
        .partition(|p| norm(&map.omega(p)) >= DEGENERATE_FREQUENCY);
    if points.is_empty() {
        return domain("every sampled point is degenerate");
    }

    let mut profile = SteepnessProfile {
        alpha: Vec::new(),
        c: Vec::new(),
        delta: cfg.xi_max,
        residuals: Vec::new(),
        seed: cfg.seed,
        budget: cfg.clone(),
        raw_slopes: Vec::new(),
        clamped: Vec::new(),
        worst: Vec::new(),
        xi: xis.clone(),
        curves: Vec::new(),
        points_sampled: points.len(),
        excluded: excluded.clone(),
    };
    let violation = |w: Witness| {
        Ok(SteepnessOutcome::Violation(ViolationReport {
            witness: w,
            seed: cfg.seed,
            budget: cfg.clone(),
            excluded: excluded.clone(),
        }))
    };

    for m in 1..n {
        // (point index, frame, margin at xi_min), in sampling order.
        let scored: Vec<Vec<(usize, SubspaceFrame, f64)>> = points
            .par_iter()
            .enumerate()
            .map(|(pi, p)| {
                let mut rng = stream_rng(cfg.seed, m, pi as u64);
                let w = map.omega(p);
                let count = if m == n - 1 { 1 } else { cfg.frames };
                (0..count)
                    .map(|_| {
                        let f = SubspaceFrame::random_orthogonal(&mut rng, &w, m)?;
                        let v = steepness_margin(map, p, &f, xi0, cfg.eta_samples, &cfg.sphere)?;
                        Ok((pi, f, v))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let scored: Vec<_> = scored.into_iter().flatten().collect();
        if let Some((pi, f, v)) = scored.iter().find(|(_, _, v)| *v < VIOLATION_FLOOR) {
            return violation(witness(m, &points[*pi], f, xi0, *v));
        }
        let (pi, f, v) = scored
            .iter()
            .min_by(|a, b| a.2.total_cmp(&b.2))
            .cloned()
            .expect("at least one configuration");
        let point = &points[pi];
        let (frame, value) = if m < n - 1 {
            let mut rng = stream_rng(cfg.seed, m, u64::MAX - 1);
            refine_frame(map, point, f, v, xi0, cfg, &mut rng)?
        } else {
            (f, v)
        };
        if value < VIOLATION_FLOOR {
            return violation(witness(m, point, &frame, xi0, value));
        }
        let curve = margin_curve(map, point, &frame, &xis, cfg.eta_samples, &cfg.sphere)?;
        let fit = loglog_fit(&xis, &curve)?;
        let clamped = fit.slope < 1.0;
        let alpha = fit.slope.max(1.0);
        let log_c = if clamped {
            xis.iter()
                .zip(&curve)
                .map(|(x, y)| y.ln() - alpha * x.ln())
                .sum::<f64>()
                / xis.len() as f64
        } else {
            fit.intercept
        };
        profile.alpha.push(alpha);
        profile.c.push(log_c.exp());
        profile.residuals.push(fit.residual_rms);
        profile.raw_slopes.push(fit.slope);
        profile.clamped.push(clamped);
        profile.worst.push(witness(m, point, &frame, xi0, value));
        profile.curves.push(curve);
    }
    Ok(SteepnessOutcome::Profile(profile))
}
