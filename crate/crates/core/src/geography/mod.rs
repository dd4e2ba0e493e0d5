//! Resonance geography around a base action `I_0`: exponent bookkeeping,
//! `epsilon` schedules, resonance lattices, zones, blocks and extended
//! blocks, with Monte Carlo checks of covering, disjointness and the
//! small-divisor lower bound.
//!
//! Zones use the finite quantifier: `I in Z_L` iff `|k . omega(I)| < delta_L`
//! for every `k in L` with `|k|_1 <= K`. `|L|` is the covolume
//! `sqrt(det Gram)`.

mod blocks;
mod checks;
mod lattice;
mod params;

pub use blocks::{
    plane_frames, BlockId, ExtMembership, Geography, Zone, DEFAULT_ENUMERATION_CAP,
    DEFAULT_MAX_NODES,
};
pub use checks::{
    calibrate_hierarchy, count_violations, covering_check, disjointness_check,
    disjointness_sweep, focused_disjointness, lattices_json, sample_ball, samples_csv, small_divisor_check,
    CalibrationReport, CoveringReport, FOCUS_PILOT, DisjointnessConfig, DisjointnessReport,
    DisjointnessSweep, FocusedSweep, GeographyReport, GeographySetup, SampleRow, SmallDivisorReport, Violation,
};
pub use lattice::{enumerate_lattices, short_vectors, Lattice};
pub use params::{
    delta_value, geography_params, schedule, GeographyParams, Prefactors, Schedule,
    CALIBRATED_C_ALPHA, CALIBRATED_C_DELTA, CALIBRATED_HIERARCHY,
};

use crate::frequency::FrequencyMap;

/// Zone test for a single lattice without a prepared [`Geography`].
pub fn zone_membership(i: &[f64], l: &Lattice, sched: &Schedule, map: &dyn FrequencyMap) -> bool {
    if l.rank() == 0 {
        return true;
    }
    let delta = sched.delta(l);
    let w = map.omega(i);
    short_vectors(l.n, sched.k.floor() as i64)
        .iter()
        .filter(|k| l.contains(k))
        .all(|k| k.iter().zip(&w).map(|(a, b)| *a as f64 * b).sum::<f64>().abs() < delta)
}
