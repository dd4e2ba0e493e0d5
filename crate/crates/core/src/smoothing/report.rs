use std::io::Write;

use serde::{Deserialize, Serialize};

use super::annulus::{smooth_annulus_table, AnnulusOptions};
use crate::error::{domain, Result};
use crate::fit::{loglog_fit, LineFit};
use crate::fourier::CoefficientTable;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Slopes {
    pub p0: Option<f64>,
    pub p1: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    #[serde(rename = "C_A_hat")]
    pub c_a_hat: Option<f64>,
    #[serde(rename = "C_B_hat")]
    pub c_b_hat: Option<f64>,
}

/// Per-width smoothing diagnostics. Slopes and constants are filled in by
/// [`smoothing_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingReport {
    pub s: f64,
    pub ell: f64,
    /// `||f - f_s||_{C^p}` for `p = 0..=floor(ell)`.
    pub errors: Vec<f64>,
    pub fourier_norm: f64,
    pub fit_residual: f64,
    pub harmonics: usize,
    pub slopes: Slopes,
    pub constants: Constants,
}

impl SmoothingReport {
    pub fn new(s: f64, ell: f64, errors: Vec<f64>, fourier_norm: f64, fit_residual: f64, harmonics: usize) -> Self {
        SmoothingReport {
            s,
            ell,
            errors,
            fourier_norm,
            fit_residual,
            harmonics,
            slopes: Slopes::default(),
            constants: Constants::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub reports: Vec<SmoothingReport>,
    /// Log-log fits of the error against `s`, one per order `p`.
    pub fits: Vec<LineFit>,
    /// `max_s ||f_s||_{s,s} / min_s ||f_s||_{s,s}`.
    pub fourier_norm_spread: f64,
}

impl SweepResult {
    /// Rows `s,p,error,fourier_norm`.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "s,p,error,fourier_norm")?;
        for r in &self.reports {
            for (p, e) in r.errors.iter().enumerate() {
                writeln!(w, "{:e},{},{:e},{:e}", r.s, p, e, r.fourier_norm)?;
            }
        }
        Ok(())
    }
}

/// Runs the annulus smoothing over several widths and fits decay slopes.
/// `holder_norm`, when given, normalizes the fitted constants.
pub fn smoothing_sweep(
    table: &CoefficientTable,
    widths: &[f64],
    ell: f64,
    opts: &AnnulusOptions,
    holder_norm: Option<f64>,
) -> Result<SweepResult> {
    if widths.len() < 2 {
        return domain("a sweep needs at least two widths");
    }
    let mut reports = Vec::with_capacity(widths.len());
    for &s in widths {
        reports.push(smooth_annulus_table(table, s, ell, opts)?.report);
    }
    finish_sweep(reports, holder_norm)
}

/// Fits and spread of reports computed one width at a time.
pub fn finish_sweep(mut reports: Vec<SmoothingReport>, holder_norm: Option<f64>) -> Result<SweepResult> {
    let orders = reports[0].errors.len();
    let ss: Vec<f64> = reports.iter().map(|r| r.s).collect();
    let mut fits = Vec::with_capacity(orders);
    for p in 0..orders {
        let es: Vec<f64> = reports.iter().map(|r| r.errors[p].max(f64::MIN_POSITIVE)).collect();
        fits.push(loglog_fit(&ss, &es)?);
    }
    let norms: Vec<f64> = reports.iter().map(|r| r.fourier_norm).collect();
    let hi = norms.iter().cloned().fold(f64::MIN, f64::max);
    let lo = norms.iter().cloned().fold(f64::MAX, f64::min);
    let spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    let scale = holder_norm.unwrap_or(1.0);
    let ell = reports[0].ell;
    let c_a = reports
        .iter()
        .flat_map(|r| {
            r.errors
                .iter()
                .enumerate()
                .map(move |(p, e)| e / (r.s.powf(ell - p as f64) * scale))
        })
        .fold(0.0f64, f64::max);
    let c_b = hi / scale;
    let slopes = Slopes {
        p0: fits.first().map(|f| f.slope),
        p1: fits.get(1).map(|f| f.slope),
    };
    for r in &mut reports {
        r.slopes = slopes.clone();
        r.constants = Constants {
            c_a_hat: Some(c_a),
            c_b_hat: Some(c_b),
        };
    }
    Ok(SweepResult {
        reports,
        fits,
        fourier_norm_spread: spread,
    })
}
