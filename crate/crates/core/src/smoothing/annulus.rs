use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bump::{smooth_step, BumpSpec};
use super::jackson::{jackson_multiplier, survives};
use super::measure::smoothing_error_table;
use super::nonperiodic::calibrated_smoother;
use super::report::SmoothingReport;
use crate::error::{domain, Result};
use crate::fit::PolyFitter;
use crate::fourier::{fourier_coefficients, CoefficientTable};
use crate::grid::GridFunction;
use crate::trig::{MultiIndex, TrigPoly};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusOptions {
    /// `R`: the input lives on `B_inf(0, 2R) x T^n`.
    pub radius: f64,
    /// Total degree of the polynomial fitted to each smoothed coefficient
    /// over `B_inf(0, R)`.
    pub fit_degree: u32,
    pub phi: Option<BumpSpec>,
    pub psi: Option<BumpSpec>,
    /// Angle-grid oversampling used when measuring errors.
    pub angle_oversample: usize,
}

impl AnnulusOptions {
    pub fn new(radius: f64) -> Self {
        AnnulusOptions {
            radius,
            fit_degree: 8,
            phi: None,
            psi: None,
            angle_oversample: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnnulusOutput {
    pub f_s: TrigPoly,
    pub report: SmoothingReport,
}

/// `chi(I) = prod_a step((2R - |I_a|) / R)`: one on `B_inf(0,R)`, zero
/// outside `B_inf(0,2R)`.
pub fn action_cutoff(x: &[f64], radius: f64) -> f64 {
    x.iter()
        .map(|v| smooth_step((2.0 * radius - v.abs()) / radius))
        .product()
}

/// Smoothing on `B_inf(0,2R) x T^n` from samples whose last `n` axes are
/// angles.
pub fn smooth_annulus(f: &GridFunction, s: f64, ell: f64, opts: &AnnulusOptions) -> Result<AnnulusOutput> {
    let n_angle = f.trailing_periodic();
    if n_angle == 0 {
        return domain("the sampled function has no periodic angle axes");
    }
    let min_nodes = f.axes()[f.dim() - n_angle..]
        .iter()
        .map(|a| a.nodes)
        .min()
        .unwrap_or(2);
    let table = fourier_coefficients(f, (min_nodes - 2) / 2)?;
    smooth_annulus_table(&table, s, ell, opts)
}

/// Same as [`smooth_annulus`] starting from Fourier coefficients sampled on
/// the action grid: cutoff, action smoothing of every surviving harmonic,
/// Jackson multiplier, polynomial fit on `B_inf(0,R)`.
pub fn smooth_annulus_table(
    table: &CoefficientTable,
    s: f64,
    ell: f64,
    opts: &AnnulusOptions,
) -> Result<AnnulusOutput> {
    if !(s > 0.0 && s <= 1.0) {
        return domain(format!("smoothing width s = {s} outside (0, 1]"));
    }
    if !(ell >= 1.0) {
        return domain("annulus smoothing needs ell >= 1");
    }
    let n = table.n_angle();
    let axes = table.action_axes().to_vec();
    if axes.len() != n {
        return domain("annulus tables need as many action axes as angles");
    }
    let r = opts.radius;
    if !(r > 0.0) {
        return domain("radius must be positive");
    }
    for a in &axes {
        if a.lo > -2.0 * r + 1e-9 || a.hi < 2.0 * r - 1e-9 || a.periodic {
            return domain("action grid must cover B_inf(0, 2R) with bounded axes");
        }
    }
    let phi = opts.phi.clone().unwrap_or_else(|| BumpSpec::phi(n));
    let psi = opts.psi.clone().unwrap_or_else(|| BumpSpec::psi(n));
    let nodes = table.node_count();
    let points: Vec<Vec<f64>> = (0..nodes).map(|a| table.action_point(a)).collect();
    let chi: Vec<f64> = points.iter().map(|x| action_cutoff(x, r)).collect();

    let kept: Vec<(MultiIndex, Vec<Complex64>)> = table
        .entries()
        .filter(|(k, _)| survives(k, s, &psi))
        .map(|(k, v)| (k.clone(), v.iter().zip(&chi).map(|(c, w)| c * *w).collect()))
        .collect();
    let probe_data: Vec<Complex64> = chi.iter().map(|&c| Complex64::new(c, 0.0)).collect();
    let smoother = calibrated_smoother(&axes, s, &phi, &probe_data, true)?;

    let inner: Vec<usize> = (0..nodes)
        .filter(|&a| points[a].iter().all(|x| x.abs() <= r + 1e-12))
        .collect();
    let inner_pts: Vec<Vec<f64>> = inner.iter().map(|&a| points[a].clone()).collect();
    let fitter = PolyFitter::new(&inner_pts, opts.fit_degree, &vec![0.0; n], &vec![r; n])?;

    // Parallel over harmonics; collection preserves table order.
    let smoothed: Vec<(MultiIndex, Vec<Vec<Complex64>>)> = kept
        .par_iter()
        .map(|(k, v)| {
            let m = jackson_multiplier(k, s, &psi);
            let probes = smoother
                .apply(v)
                .into_iter()
                .map(|p| p.into_iter().map(|c| c * m).collect())
                .collect();
            (k.clone(), probes)
        })
        .collect();

    let fits: Vec<(MultiIndex, crate::poly::Poly, f64)> = smoothed
        .par_iter()
        .map(|(k, probes)| {
            let vals: Vec<Complex64> = inner.iter().map(|&a| probes[0][a]).collect();
            let (p, res) = fitter.fit(&vals);
            (k.clone(), p, res)
        })
        .collect();
    let mut terms = BTreeMap::new();
    let mut fit_residual: f64 = 0.0;
    for (k, p, res) in fits {
        fit_residual = fit_residual.max(res);
        terms.insert(k, p);
    }
    let mut f_s = TrigPoly::zero(n);
    for (k, p) in terms {
        f_s.add_harmonic(k, p);
    }
    let f_s = f_s.realify();

    // ||f_s||_{s,s}: sup over carrier nodes and imaginary probes of the
    // weighted coefficient sum.
    let probe_count = smoother.offsets().len();
    let mut fourier_norm: f64 = 0.0;
    for a in 0..nodes {
        for pr in 0..probe_count {
            let v: f64 = smoothed
                .iter()
                .map(|(k, probes)| probes[pr][a].norm() * (k.l1() as f64 * s).exp())
                .sum();
            fourier_norm = fourier_norm.max(v);
        }
    }

    let q = ell.floor() as u32;
    let errors = smoothing_error_table(table, &f_s, q, ell, 0.5 * r, opts.angle_oversample)?;
    Ok(AnnulusOutput {
        report: SmoothingReport::new(s, ell, errors, fourier_norm, fit_residual, f_s.len()),
        f_s,
    })
}
