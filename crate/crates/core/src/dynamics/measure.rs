use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{domain, Result};
use crate::fit::{loglog_fit, LineFit};
use crate::geography::{BlockId, Geography, Lattice};

/// Default sampling stride of escape and itinerary scans, in recorded
/// samples.
pub const DEFAULT_STRIDE: usize = 100;

/// `sup_{t <= T} |I(t) - I(0)|_2` over every integration step up to the
/// last recorded sample at or before `T`.
pub fn max_drift(traj: &Trajectory, horizon: f64) -> Result<f64> {
    if horizon > traj.span() * (1.0 + 1e-12) && traj.exit_time.is_none() {
        return domain(format!(
            "horizon {horizon} exceeds the trajectory span {}",
            traj.span()
        ));
    }
    let last = traj.times.partition_point(|t| *t <= horizon * (1.0 + 1e-12));
    Ok(last
        .checked_sub(1)
        .map(|s| traj.running_drift[s])
        .unwrap_or(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeReport {
    /// First checked time outside the extended block.
    pub time: Option<f64>,
    pub stride: usize,
    /// Time between two checked samples.
    pub stride_time: f64,
    /// Flood-fill step of the membership test.
    pub resolution: f64,
}

/// First sample, scanning every `stride` recorded samples, at which
/// extended-block membership of `block` fails.
pub fn escape_time(
    traj: &Trajectory,
    block: &BlockId,
    geo: &Geography,
    stride: usize,
) -> Result<EscapeReport> {
    if stride == 0 {
        return domain("stride must be positive");
    }
    let lattice = block
        .lattice
        .clone()
        .unwrap_or_else(|| Lattice::trivial(geo.dim()));
    let resolution = geo.default_resolution(&lattice);
    let resolution = if resolution.is_finite() { resolution } else { 1.0 };
    let mut time = None;
    let mut s = 0;
    while s < traj.len() {
        if !geo.ext_block_membership(&traj.actions[s], &lattice, resolution)?.member {
            time = Some(traj.times[s]);
            break;
        }
        s += stride;
    }
    Ok(EscapeReport {
        time,
        stride,
        stride_time: stride as f64 * traj.record_every as f64 * traj.dt,
        resolution,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItineraryEntry {
    pub start: f64,
    pub end: f64,
    pub block: BlockId,
}

/// Piecewise classification of `I(t)` every `stride` samples, merged over
/// consecutive repeats. Intervals partition `[0, span]`.
pub fn block_itinerary(
    traj: &Trajectory,
    geo: &Geography,
    stride: usize,
) -> Result<Vec<ItineraryEntry>> {
    if stride == 0 {
        return domain("stride must be positive");
    }
    let mut out: Vec<ItineraryEntry> = Vec::new();
    let last = traj.len().saturating_sub(1);
    let mut idx: Vec<usize> = (0..traj.len()).step_by(stride).collect();
    if idx.last() != Some(&last) && !traj.is_empty() {
        idx.push(last);
    }
    for s in idx {
        let block = geo.classify(&traj.actions[s])?;
        let t = traj.times[s];
        match out.last_mut() {
            Some(e) if e.block == block => e.end = t,
            Some(e) => {
                e.end = t;
                out.push(ItineraryEntry { start: t, end: t, block });
            }
            None => out.push(ItineraryEntry { start: t, end: t, block }),
        }
    }
    Ok(out)
}

/// Transitions that do not land in a strictly lower multiplicity.
pub fn itinerary_violations(it: &[ItineraryEntry]) -> usize {
    it.windows(2)
        .filter(|w| w[1].block.multiplicity >= w[0].block.multiplicity)
        .count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub fit: LineFit,
    /// `ell` of the `|ln eps|^(ell - 1)` factor applied to the data.
    pub deweight_ell: Option<f64>,
    pub decades: f64,
}

/// Log-log slope of `values` against `eps`. With `deweight_ell`, each
/// value is multiplied by `|ln eps|^(ell - 1)` first.
pub fn fit_exponents(eps: &[f64], values: &[f64], deweight_ell: Option<f64>) -> Result<ExponentFit> {
    if eps.len() != values.len() || eps.len() < 4 {
        return domain("exponent fit needs at least 4 paired points");
    }
    let (lo, hi) = eps
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &e| (a.min(e), b.max(e)));
    let decades = (hi / lo).log10();
    if !(decades >= 2.0 - 1e-12) {
        return domain(format!("epsilon values span {decades:.2} decades, need 2"));
    }
    let y: Vec<f64> = match deweight_ell {
        Some(ell) => eps
            .iter()
            .zip(values)
            .map(|(e, v)| v * e.ln().abs().powf(ell - 1.0))
            .collect(),
        None => values.to_vec(),
    };
    Ok(ExponentFit {
        fit: loglog_fit(eps, &y)?,
        deweight_ell,
        decades,
    })
}
