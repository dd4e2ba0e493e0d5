use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{project_resonant, NormalFormResult, Thresholds};
use crate::error::Result;
use crate::frequency::{FrequencyMap, PolyHamiltonian};
use crate::trig::TrigPoly;

/// Vector field `(-chi_theta, chi_I)` with the action derivatives
/// precomputed.
struct Field {
    chi: TrigPoly,
    d_action: Vec<TrigPoly>,
}

impl Field {
    fn new(chi: &TrigPoly) -> Self {
        Field {
            chi: chi.clone(),
            d_action: (0..chi.dim()).map(|j| chi.d_action(j)).collect(),
        }
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.chi.dim();
        let (i, th) = x.split_at(n);
        let mut out: Vec<f64> = self.chi.grad_angle(i, th)?.into_iter().map(|v| -v).collect();
        for d in &self.d_action {
            out.push(d.evaluate(i, th)?);
        }
        Ok(out)
    }
}

fn rk4(field: &Field, x: &[f64], substeps: usize) -> Result<Vec<f64>> {
    let dt = 1.0 / substeps as f64;
    let axpy = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> { a.iter().zip(b).map(|(u, v)| u + s * v).collect() };
    let mut y = x.to_vec();
    for _ in 0..substeps {
        let k1 = field.eval(&y)?;
        let k2 = field.eval(&axpy(&y, &k1, dt / 2.0))?;
        let k3 = field.eval(&axpy(&y, &k2, dt / 2.0))?;
        let k4 = field.eval(&axpy(&y, &k3, dt))?;
        for j in 0..y.len() {
            y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    Ok(y)
}

/// `Psi(x) = Phi_1(..Phi_N(x))` for `x = (I, theta)`, each time-one flow
/// integrated by RK4 with `substeps` steps. Angles are not reduced.
pub fn flow_map(generators: &[TrigPoly], x: &[f64], substeps: usize) -> Result<Vec<f64>> {
    let mut y = x.to_vec();
    for chi in generators.iter().rev() {
        y = rk4(&Field::new(chi), &y, substeps)?;
    }
    Ok(y)
}

/// `max |{h, g}|` over the given states `(I, theta)`.
pub fn commutator_on(h: &PolyHamiltonian, g: &TrigPoly, states: &[Vec<f64>]) -> Result<f64> {
    let bracket = TrigPoly::from_poly(h.poly().clone()).poisson_bracket(g)?;
    let n = h.dim();
    let mut worst: f64 = 0.0;
    for x in states {
        worst = worst.max(bracket.evaluate(&x[..n], &x[n..])?.abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub probes: usize,
    pub seed: u64,
    pub substeps: usize,
    pub fd_step: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            probes: 16,
            seed: 0,
            substeps: 48,
            fd_step: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalFormCheck {
    pub probes: usize,
    pub seed: u64,
    /// `max |H o Psi - (h + g + f*)|`.
    pub energy_defect: f64,
    /// `max |Pi_I Psi - I|_2 / rho'`.
    pub action_ratio: f64,
    pub action_bound: f64,
    /// `max |Pi_theta Psi - theta|_inf / sigma`.
    pub angle_ratio: f64,
    pub angle_bound: f64,
    /// `max ||D^T J D - J||_max` with central differences.
    pub symplectic_defect: f64,
    pub fd_step: f64,
    /// `P_Lambda P_K g = g` as tables.
    pub resonant_support: bool,
    /// Every generator avoids `Lambda`.
    pub generator_support: bool,
}

impl NormalFormCheck {
    pub fn displacements_ok(&self) -> bool {
        self.action_ratio <= self.action_bound && self.angle_ratio <= self.angle_bound
    }
}

fn symplectic_defect(gens: &[TrigPoly], x: &[f64], step: f64, substeps: usize) -> Result<f64> {
    let d = x.len();
    let n = d / 2;
    let mut jac = DMatrix::zeros(d, d);
    for c in 0..d {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[c] += step;
        xm[c] -= step;
        // Actual spacing after rounding, so the identity map differentiates exactly.
        let width = xp[c] - xm[c];
        let yp = flow_map(gens, &xp, substeps)?;
        let ym = flow_map(gens, &xm, substeps)?;
        for r in 0..d {
            jac[(r, c)] = (yp[r] - ym[r]) / width;
        }
    }
    // Coordinates are (I, theta); J pairs theta_j with I_j.
    let mut j = DMatrix::zeros(d, d);
    for a in 0..n {
        j[(a, n + a)] = -1.0;
        j[(n + a, a)] = 1.0;
    }
    Ok((jac.transpose() * &j * &jac - j).amax())
}

/// Pointwise checks of a normal form at `cfg.probes` random states of the
/// real box of `h` times the torus.
pub fn verify_normalform(
    result: &NormalFormResult,
    h: &PolyHamiltonian,
    f: &TrigPoly,
    t: &Thresholds,
    cfg: &VerifyConfig,
) -> Result<NormalFormCheck> {
    let n = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = NormalFormCheck {
        probes: cfg.probes,
        seed: cfg.seed,
        energy_defect: 0.0,
        action_ratio: 0.0,
        action_bound: 1.0 / (32.0 * t.xi),
        angle_ratio: 0.0,
        angle_bound: 1.0 / (24.0 * t.xi),
        symplectic_defect: 0.0,
        fd_step: cfg.fd_step,
        resonant_support: project_resonant(&result.g, &result.lattice, result.k) == result.g,
        generator_support: result
            .generators
            .iter()
            .all(|chi| chi.harmonics().all(|k| !result.lattice.contains(&k.0))),
    };
    for _ in 0..cfg.probes {
        let mut x: Vec<f64> = h
            .center()
            .iter()
            .map(|c| c + h.radius() * rng.random_range(-1.0..=1.0))
            .collect();
        x.extend((0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)));
        let (i, th) = x.split_at(n);
        let y = flow_map(&result.generators, &x, cfg.substeps)?;
        let (yi, yt) = y.split_at(n);
        let lhs = h.energy(yi) + f.evaluate(yi, yt)?;
        let rhs = h.energy(i) + result.g.evaluate(i, th)? + result.remainder.evaluate(i, th)?;
        out.energy_defect = out.energy_defect.max((lhs - rhs).abs());
        let da = yi.iter().zip(i).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        out.action_ratio = out.action_ratio.max(da / t.rho_prime);
        let dt = yt.iter().zip(th).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        out.angle_ratio = out.angle_ratio.max(dt / t.sigma);
        out.symplectic_defect = out
            .symplectic_defect
            .max(symplectic_defect(&result.generators, &x, cfg.fd_step, cfg.substeps)?);
    }
    Ok(out)
}
