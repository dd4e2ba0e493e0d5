use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{block_itinerary, escape_time, integrate, max_drift, IntegratorSpec, Scheme};
use crate::error::{domain, Result};
use crate::frequency::{FrequencyMap, PolyHamiltonian};
use crate::geography::{geography_params, sample_ball, schedule, Geography, Prefactors};
use crate::trig::TrigPoly;

/// `eps (cos theta_1 + cos(theta_1 - theta_2) + cos(theta_2 - theta_3))`.
pub fn convex3_perturbation(eps: f64) -> TrigPoly {
    [[1, 0, 0], [1, -1, 0], [0, 1, -1]]
        .iter()
        .fold(TrigPoly::zero(3), |acc, k| {
            acc.add(&TrigPoly::cos(k, eps)).expect("same dimension")
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilityConfig {
    pub epsilons: Vec<f64>,
    pub ell: f64,
    /// Steepness indices of the geography.
    pub alpha: Vec<f64>,
    pub epsilon0: f64,
    pub m: f64,
    pub center: Vec<f64>,
    pub prefactors: Prefactors,
    pub dt: f64,
    /// Horizon cap in steps.
    pub max_steps: usize,
    pub initial_conditions: usize,
    /// Initial actions are drawn from `B(I_0, ic_fraction (R - rho))`
    /// and kept when they classify into the non-resonant block.
    pub ic_fraction: f64,
    /// Steps between escape and itinerary checks.
    pub stride_steps: usize,
    pub seed: u64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            epsilons: vec![1e-2, 10f64.powf(-2.5), 1e-3, 10f64.powf(-3.5), 1e-4],
            ell: 4.0,
            alpha: vec![1.0, 1.0],
            epsilon0: 1.0,
            m: 1.0,
            center: vec![1.0; 3],
            prefactors: Prefactors {
                c_t0: 1000.0,
                ..Prefactors::default()
            },
            dt: 0.05,
            max_steps: 10_000_000,
            initial_conditions: 8,
            ic_fraction: 0.5,
            stride_steps: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    /// `min(T_0(eps), max_steps dt)`.
    pub horizon: f64,
    /// Largest drift over the initial conditions.
    pub max_drift: f64,
    /// Earliest escape from the non-resonant extended block, if any.
    pub escape_time: Option<f64>,
    /// Longest itinerary over the initial conditions.
    pub itinerary_len: usize,
    /// `T_0` exceeded the step cap: the bound is only probed up to the cap.
    pub truncated: bool,
    pub initial_conditions: usize,
    pub max_energy_error: f64,
}

/// Drift, escape and itinerary statistics of `h + perturbation(eps)` for
/// every `eps` of the sweep. Sweep points run concurrently; the output
/// order follows `cfg.epsilons`.
pub fn stability_sweep(
    h: &PolyHamiltonian,
    perturbation: &(dyn Fn(f64) -> TrigPoly + Sync),
    cfg: &StabilityConfig,
) -> Result<Vec<SweepRow>> {
    if cfg.epsilons.is_empty() {
        return domain("sweep non-empty: no epsilon values given");
    }
    if !(cfg.dt > 0.0) || cfg.max_steps == 0 || cfg.stride_steps == 0 || cfg.initial_conditions == 0 {
        return domain("dt, max_steps, stride_steps and initial_conditions must be positive");
    }
    let params = geography_params(h.dim(), &cfg.alpha, cfg.ell)?;
    cfg.epsilons
        .par_iter()
        .enumerate()
        .map(|(e_idx, &eps)| {
            let sched = schedule(eps, cfg.epsilon0, &params, cfg.m, &cfg.prefactors)?;
            let t0 = sched.t0();
            let cap = cfg.max_steps as f64 * cfg.dt;
            let horizon = t0.min(cap);
            let geo = Geography::new(h, cfg.center.clone(), sched.clone())?;
            let radius = cfg.ic_fraction * (sched.big_r - sched.rho);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(e_idx as u64));
            let mut ics = Vec::new();
            let mut draws = 0;
            while ics.len() < cfg.initial_conditions && draws < 1000 * cfg.initial_conditions {
                draws += 1;
                let p = sample_ball(&cfg.center, radius, 1, rng.random())
                    .pop()
                    .expect("one sample");
                if geo.classify(&p)?.multiplicity == 0 {
                    let th: Vec<f64> = (0..h.dim())
                        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                        .collect();
                    ics.push((p, th));
                }
            }
            if ics.is_empty() {
                return domain(format!("no non-resonant initial condition found at eps = {eps}"));
            }
            let f = perturbation(eps);
            let spec = IntegratorSpec {
                scheme: Some(Scheme::Splitting),
                dt: cfg.dt,
                total_time: horizon,
                record_every: cfg.stride_steps,
                ..IntegratorSpec::default()
            };
            let mut row = SweepRow {
                epsilon: eps,
                horizon,
                max_drift: 0.0,
                escape_time: None,
                itinerary_len: 0,
                truncated: t0 > cap,
                initial_conditions: ics.len(),
                max_energy_error: 0.0,
            };
            for (i0, th0) in &ics {
                let tr = integrate(h, &f, i0, th0, &spec)?;
                row.max_drift = row.max_drift.max(max_drift(&tr, tr.span())?);
                row.max_energy_error = row.max_energy_error.max(tr.max_energy_error());
                let block = geo.classify(i0)?;
                if let Some(t) = escape_time(&tr, &block, &geo, 1)?.time {
                    row.escape_time = Some(row.escape_time.map_or(t, |e: f64| e.min(t)));
                }
                row.itinerary_len = row.itinerary_len.max(block_itinerary(&tr, &geo, 1)?.len());
            }
            Ok(row)
        })
        .collect()
}

pub const SWEEP_HEADER: &str = "epsilon,horizon,max_drift,escape_time,itinerary_len";

/// CSV with header [`SWEEP_HEADER`]; a missing escape time is an empty
/// field.
pub fn sweep_csv(rows: &[SweepRow], w: &mut impl Write) -> Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        let esc = r.escape_time.map(|t| format!("{t:e}")).unwrap_or_default();
        writeln!(
            w,
            "{:e},{:e},{:e},{},{}",
            r.epsilon, r.horizon, r.max_drift, esc, r.itinerary_len
        )?;
    }
    Ok(())
}
