//! Least-squares fits: straight lines with confidence bands, and
//! multivariate polynomials over scattered nodes.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{domain, Result};
use crate::poly::{monomials_up_to, Poly, Powers};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual_rms: f64,
    pub residuals: Vec<f64>,
    /// Two-sided 95% band on the slope; degenerate with two points.
    pub slope_ci95: (f64, f64),
    pub points: usize,
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn line_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return domain("line fit needs at least two paired points");
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return domain("line fit input must be finite");
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return domain("abscissae are all equal");
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| b - (slope * a + intercept))
        .collect();
    let ss: f64 = residuals.iter().map(|r| r * r).sum();
    let residual_rms = (ss / n).sqrt();
    let ci = if x.len() > 2 {
        let dof = n - 2.0;
        let se = (ss / dof / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, dof)
            .map(|d| d.inverse_cdf(0.975))
            .unwrap_or(f64::INFINITY);
        (slope - t * se, slope + t * se)
    } else {
        (slope, slope)
    };
    Ok(LineFit {
        slope,
        intercept,
        residual_rms,
        residuals,
        slope_ci95: ci,
        points: x.len(),
    })
}

/// Fit of `ln y` against `ln x`; all inputs must be positive.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return domain("log-log fit needs positive data");
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    line_fit(&lx, &ly)
}

/// Least-squares fitter for polynomials of bounded total degree over a
/// fixed node set. Works in the scaled variable `t = (x - center) / width`
/// and converts back, which keeps the normal equations well conditioned.
#[derive(Debug, Clone)]
pub struct PolyFitter {
    nvars: usize,
    basis: Vec<Powers>,
    pinv: DMatrix<f64>,
    design: DMatrix<f64>,
    center: Vec<f64>,
    width: Vec<f64>,
}

impl PolyFitter {
    pub fn new(nodes: &[Vec<f64>], degree: u32, center: &[f64], width: &[f64]) -> Result<Self> {
        let nvars = center.len();
        if nodes.is_empty() {
            return domain("no fit nodes");
        }
        let basis = monomials_up_to(nvars, degree);
        if nodes.len() < basis.len() {
            return domain(format!(
                "{} nodes cannot determine {} monomials",
                nodes.len(),
                basis.len()
            ));
        }
        let design = DMatrix::from_fn(nodes.len(), basis.len(), |i, j| {
            let mut v = 1.0;
            for d in 0..nvars {
                let t = (nodes[i][d] - center[d]) / width[d];
                v *= t.powi(basis[j][d] as i32);
            }
            v
        });
        let pinv = design
            .clone()
            .pseudo_inverse(1e-12)
            .map_err(|e| crate::error::NekError::Domain(e.to_string()))?;
        Ok(PolyFitter {
            nvars,
            basis,
            pinv,
            design,
            center: center.to_vec(),
            width: width.to_vec(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.design.nrows()
    }

    /// Fits complex samples; returns the polynomial in the original
    /// variables and the max residual at the nodes.
    pub fn fit(&self, values: &[Complex64]) -> (Poly, f64) {
        let re = nalgebra::DVector::from_iterator(values.len(), values.iter().map(|c| c.re));
        let im = nalgebra::DVector::from_iterator(values.len(), values.iter().map(|c| c.im));
        let cr = &self.pinv * &re;
        let ci = &self.pinv * &im;
        let fr = &self.design * &cr;
        let fi = &self.design * &ci;
        let mut resid: f64 = 0.0;
        for i in 0..values.len() {
            resid = resid.max((Complex64::new(fr[i], fi[i]) - values[i]).norm());
        }
        let mut scaled = Poly::zero(self.nvars);
        for (j, pw) in self.basis.iter().enumerate() {
            scaled.add_term(pw.clone(), Complex64::new(cr[j], ci[j]));
        }
        (scaled.substitute_affine(&self.center, &self.width), resid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let f = line_fit(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!((f.intercept + 1.0).abs() < 1e-14);
        assert!(f.residual_rms < 1e-14);
    }

    #[test]
    fn polynomial_recovered() {
        let nodes: Vec<Vec<f64>> = (0..7)
            .flat_map(|i| (0..7).map(move |j| vec![1.0 + 0.1 * i as f64, -0.3 + 0.1 * j as f64]))
            .collect();
        let truth = |x: &[f64]| 1.0 + x[0] * x[1] - 0.5 * x[1] * x[1] * x[0];
        let vals: Vec<Complex64> = nodes.iter().map(|x| Complex64::new(truth(x), 0.0)).collect();
        let fitter = PolyFitter::new(&nodes, 3, &[1.3, 0.0], &[0.3, 0.3]).unwrap();
        let (p, res) = fitter.fit(&vals);
        assert!(res < 1e-10);
        assert!((p.eval(&[0.2, 0.7]).re - truth(&[0.2, 0.7])).abs() < 1e-9);
    }
}
