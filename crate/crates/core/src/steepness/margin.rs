use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::frame::{norm, SubspaceFrame};
use crate::error::{domain, Result};
use crate::frequency::FrequencyMap;

/// Budget of the inner sphere minimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereBudget {
    pub sphere_samples: usize,
    pub refine_steps: usize,
}

impl Default for SphereBudget {
    fn default() -> Self {
        SphereBudget {
            sphere_samples: 32,
            refine_steps: 40,
        }
    }
}

/// Unit vectors of `R^m`: the two poles for `m = 1`, equispaced angles for
/// `m = 2`, a Fibonacci lattice for `m = 3` and a hyperspherical product
/// grid beyond.
pub fn sphere_points(m: usize, samples: usize) -> Vec<Vec<f64>> {
    let samples = samples.max(2);
    match m {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..samples)
            .map(|j| {
                let t = TAU * j as f64 / samples as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..samples)
                .map(|j| {
                    let z = 1.0 - 2.0 * (j as f64 + 0.5) / samples as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * j as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect()
        }
        _ => {
            let per = ((samples as f64).powf(1.0 / (m - 1) as f64).ceil() as usize).max(2);
            let mut out = Vec::new();
            let total = per.pow(m as u32 - 1);
            for mut f in 0..total {
                let mut angles = Vec::with_capacity(m - 1);
                for a in 0..m - 1 {
                    let i = f % per;
                    f /= per;
                    angles.push(if a == m - 2 {
                        TAU * i as f64 / per as f64
                    } else {
                        PI * (i as f64 + 0.5) / per as f64
                    });
                }
                let mut v = vec![0.0; m];
                let mut sin_prod = 1.0;
                for a in 0..m - 1 {
                    v[a] = sin_prod * angles[a].cos();
                    sin_prod *= angles[a].sin();
                }
                v[m - 1] = sin_prod;
                out.push(v);
            }
            out
        }
    }
}

/// `Gamma`, re-orthogonalized against `omega(I)` when it is off by more
/// than `1e-8`.
pub(crate) fn aligned_frame(map: &dyn FrequencyMap, i: &[f64], frame: &SubspaceFrame) -> Result<SubspaceFrame> {
    if frame.ambient() != map.dim() || i.len() != map.dim() {
        return domain("frame, point and frequency map dimensions differ");
    }
    let w = map.omega(i);
    if frame.obliquity(&w) > 1e-8 {
        SubspaceFrame::orthonormalize(frame.basis(), &[w])
    } else {
        Ok(frame.clone())
    }
}

struct SphereProblem<'a> {
    map: &'a dyn FrequencyMap,
    i: &'a [f64],
    frame: &'a SubspaceFrame,
}

impl SphereProblem<'_> {
    fn point(&self, c: &[f64]) -> Result<Vec<f64>> {
        let u = self.frame.embed(c);
        let x: Vec<f64> = self.i.iter().zip(&u).map(|(a, b)| a + b).collect();
        if !self.map.contains(&x) {
            return domain(format!("I + u = {x:?} leaves the declared domain"));
        }
        Ok(x)
    }

    /// Squared projection `|B^T omega(I + B c)|^2`.
    fn value(&self, c: &[f64]) -> Result<f64> {
        let x = self.point(c)?;
        let g = self.frame.coords(&self.map.omega(&x));
        Ok(g.iter().map(|v| v * v).sum())
    }

    /// Gradient `2 J^T g` with `J = B^T D^2h B`.
    fn gradient(&self, c: &[f64]) -> Result<Vec<f64>> {
        let x = self.point(c)?;
        let g = self.frame.coords(&self.map.omega(&x));
        let b = self.frame.matrix();
        let j = b.transpose() * self.map.hessian(&x) * &b;
        let gv = nalgebra::DVector::from_vec(g);
        Ok((j.transpose() * gv * 2.0).iter().copied().collect())
    }
}

/// `min_{u in Gamma, |u| = eta} |pi_Gamma omega(I + u)|`, sampled on the
/// sphere and refined by projected gradient descent from the best sample.
pub fn min_projection(
    map: &dyn FrequencyMap,
    i: &[f64],
    frame: &SubspaceFrame,
    eta: f64,
    budget: &SphereBudget,
) -> Result<f64> {
    if !(eta > 0.0) {
        return domain("eta must be positive");
    }
    let frame = aligned_frame(map, i, frame)?;
    let p = SphereProblem {
        map,
        i,
        frame: &frame,
    };
    let m = frame.dim();
    let mut best = f64::INFINITY;
    let mut best_c = Vec::new();
    for d in sphere_points(m, budget.sphere_samples) {
        let c: Vec<f64> = d.iter().map(|v| v * eta).collect();
        let v = p.value(&c)?;
        if v < best {
            best = v;
            best_c = c;
        }
    }
    if m >= 2 {
        let mut step = 0.25 * eta;
        for _ in 0..budget.refine_steps {
            if best == 0.0 || step < 1e-14 * eta {
                break;
            }
            let g = p.gradient(&best_c)?;
            let radial: f64 = g.iter().zip(&best_c).map(|(a, b)| a * b).sum::<f64>() / (eta * eta);
            let t: Vec<f64> = g.iter().zip(&best_c).map(|(a, b)| a - radial * b).collect();
            let nt = norm(&t);
            if nt == 0.0 {
                break;
            }
            let mut improved = false;
            while step >= 1e-14 * eta {
                let trial: Vec<f64> = best_c.iter().zip(&t).map(|(c, d)| c - step * d / nt).collect();
                let nr = norm(&trial);
                let trial: Vec<f64> = trial.iter().map(|v| v * eta / nr).collect();
                let v = p.value(&trial)?;
                if v < best {
                    best = v;
                    best_c = trial;
                    improved = true;
                    step *= 1.5;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
    }
    Ok(best.sqrt())
}

/// Equispaced `eta` grid of `eta_samples` points in `(0, xi]`.
pub fn eta_grid(xi: f64, eta_samples: usize) -> Vec<f64> {
    let k = eta_samples.max(1);
    (1..=k).map(|j| xi * j as f64 / k as f64).collect()
}

/// `max_{0 < eta <= xi} min_projection` over [`eta_grid`].
pub fn steepness_margin(
    map: &dyn FrequencyMap,
    i: &[f64],
    frame: &SubspaceFrame,
    xi: f64,
    eta_samples: usize,
    budget: &SphereBudget,
) -> Result<f64> {
    if !(xi > 0.0) {
        return domain("xi must be positive");
    }
    let mut best: f64 = 0.0;
    for eta in eta_grid(xi, eta_samples) {
        best = best.max(min_projection(map, i, frame, eta, budget)?);
    }
    Ok(best)
}

/// Margins at every `xi` of an increasing grid. Entry `j` maximizes over
/// the union of all per-`xi` grids restricted to `(0, xi_j]`, a superset of
/// the grid of [`steepness_margin`], so the curve is non-decreasing by
/// construction.
pub fn margin_curve(
    map: &dyn FrequencyMap,
    i: &[f64],
    frame: &SubspaceFrame,
    xis: &[f64],
    eta_samples: usize,
    budget: &SphereBudget,
) -> Result<Vec<f64>> {
    if xis.windows(2).any(|w| w[1] <= w[0]) || xis.first().is_some_and(|&x| !(x > 0.0)) {
        return domain("xi grid must be positive and increasing");
    }
    let mut etas: Vec<f64> = xis.iter().flat_map(|&x| eta_grid(x, eta_samples)).collect();
    etas.sort_by(f64::total_cmp);
    etas.dedup();
    let mut values = Vec::with_capacity(etas.len());
    for &eta in &etas {
        values.push(min_projection(map, i, frame, eta, budget)?);
    }
    let mut out = Vec::with_capacity(xis.len());
    let mut running: f64 = 0.0;
    let mut e = 0;
    for &xi in xis {
        while e < etas.len() && etas[e] <= xi {
            running = running.max(values[e]);
            e += 1;
        }
        out.push(running);
    }
    Ok(out)
}
