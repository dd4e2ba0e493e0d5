use std::f64::consts::TAU;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, NekError, Result};
use crate::frequency::FrequencyMap;
use crate::trig::TrigPoly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Strang splitting with exact sub-flows; needs `f = f(theta)`.
    Splitting,
    ImplicitMidpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSpec {
    /// `None` picks splitting when `f` is angle-only.
    pub scheme: Option<Scheme>,
    pub dt: f64,
    pub total_time: f64,
    /// Fixed-point tolerance of the implicit scheme.
    pub tol: f64,
    pub max_iter: usize,
    /// Keep every `record_every`-th step.
    pub record_every: usize,
    pub seed: u64,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        IntegratorSpec {
            scheme: None,
            dt: 0.01,
            total_time: 1.0,
            tol: 1e-14,
            max_iter: 100,
            record_every: 1,
            seed: 0,
        }
    }
}

/// One-step map of `h + f` for a fixed scheme.
pub struct Stepper<'a> {
    h: &'a dyn FrequencyMap,
    f: TrigPoly,
    scheme: Scheme,
    /// Angle-only harmonics `(k, f_k)` for the splitting kick.
    kicks: Vec<(Vec<f64>, Complex64)>,
    f_action: Vec<TrigPoly>,
    tol: f64,
    max_iter: usize,
}

impl<'a> Stepper<'a> {
    pub fn new(h: &'a dyn FrequencyMap, f: &TrigPoly, scheme: Option<Scheme>, tol: f64, max_iter: usize) -> Result<Self> {
        if f.dim() != h.dim() {
            return domain("perturbation and Hamiltonian dimensions differ");
        }
        let angle_only = f.terms().all(|(_, p)| p.degree() == 0);
        let scheme = scheme.unwrap_or(if angle_only {
            Scheme::Splitting
        } else {
            Scheme::ImplicitMidpoint
        });
        if scheme == Scheme::Splitting && !angle_only {
            return domain("splitting needs a perturbation independent of the actions");
        }
        if !(tol > 0.0) {
            return domain("fixed-point tolerance must be positive");
        }
        let n = h.dim();
        let kicks = f
            .terms()
            .map(|(k, p)| (k.as_f64(), p.coeff(&vec![0; n])))
            .collect();
        Ok(Stepper {
            h,
            f: f.clone(),
            scheme,
            kicks,
            f_action: (0..n).map(|j| f.d_action(j)).collect(),
            tol,
            max_iter,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn energy(&self, i: &[f64], th: &[f64]) -> Result<f64> {
        Ok(self.h.energy(i) + self.f.evaluate(i, th)?)
    }

    /// `-df/dtheta` for the angle-only case.
    fn kick(&self, th: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (k, c) in &self.kicks {
            let phase: f64 = k.iter().zip(th).map(|(a, b)| a * b).sum();
            // d/dtheta of c e^{i k.theta} is i k c e^{i k.theta}.
            let v = (Complex64::i() * c * Complex64::from_polar(1.0, phase)).re;
            for (o, kj) in out.iter_mut().zip(k) {
                *o -= kj * v;
            }
        }
    }

    fn field(&self, i: &[f64], th: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let di: Vec<f64> = self.f.grad_angle(i, th)?.into_iter().map(|v| -v).collect();
        let mut dth = self.h.omega(i);
        for (d, fa) in dth.iter_mut().zip(&self.f_action) {
            *d += fa.evaluate(i, th)?;
        }
        Ok((di, dth))
    }

    /// Advances `(i, th)` by `dt` (negative steps run backwards). Angles
    /// are not reduced.
    pub fn step(&self, i: &mut [f64], th: &mut [f64], dt: f64) -> Result<()> {
        let n = i.len();
        match self.scheme {
            Scheme::Splitting => {
                let mut k = vec![0.0; n];
                self.kick(th, &mut k);
                for j in 0..n {
                    i[j] += 0.5 * dt * k[j];
                }
                let w = self.h.omega(i);
                for j in 0..n {
                    th[j] += dt * w[j];
                }
                self.kick(th, &mut k);
                for j in 0..n {
                    i[j] += 0.5 * dt * k[j];
                }
                Ok(())
            }
            Scheme::ImplicitMidpoint => {
                let (i0, t0) = (i.to_vec(), th.to_vec());
                let (mut i1, mut t1) = (i0.clone(), t0.clone());
                for _ in 0..self.max_iter {
                    let mi: Vec<f64> = i0.iter().zip(&i1).map(|(a, b)| 0.5 * (a + b)).collect();
                    let mt: Vec<f64> = t0.iter().zip(&t1).map(|(a, b)| 0.5 * (a + b)).collect();
                    let (di, dth) = self.field(&mi, &mt)?;
                    let ni: Vec<f64> = i0.iter().zip(&di).map(|(a, d)| a + dt * d).collect();
                    let nt: Vec<f64> = t0.iter().zip(&dth).map(|(a, d)| a + dt * d).collect();
                    let change = ni
                        .iter()
                        .zip(&i1)
                        .chain(nt.iter().zip(&t1))
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    i1 = ni;
                    t1 = nt;
                    if change <= self.tol {
                        i.copy_from_slice(&i1);
                        th.copy_from_slice(&t1);
                        return Ok(());
                    }
                }
                Err(NekError::Integration(format!(
                    "implicit midpoint did not converge in {} iterations",
                    self.max_iter
                )))
            }
        }
    }
}

/// `max ||D^T J D - J||` of one step at `x = (I, theta)`, with central
/// differences at step `fd`.
pub fn step_symplectic_defect(stepper: &Stepper, x: &[f64], dt: f64, fd: f64) -> Result<f64> {
    let d = x.len();
    let n = d / 2;
    let apply = |y: &[f64]| -> Result<Vec<f64>> {
        let (mut i, mut t) = (y[..n].to_vec(), y[n..].to_vec());
        stepper.step(&mut i, &mut t, dt)?;
        i.extend(t);
        Ok(i)
    };
    let mut jac = DMatrix::zeros(d, d);
    for c in 0..d {
        let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
        xp[c] += fd;
        xm[c] -= fd;
        let width = xp[c] - xm[c];
        let (yp, ym) = (apply(&xp)?, apply(&xm)?);
        for r in 0..d {
            jac[(r, c)] = (yp[r] - ym[r]) / width;
        }
    }
    let mut j = DMatrix::zeros(d, d);
    for a in 0..n {
        j[(a, n + a)] = -1.0;
        j[(n + a, a)] = 1.0;
    }
    Ok((jac.transpose() * &j * &jac - j).amax())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub n: usize,
    pub scheme: Scheme,
    pub dt: f64,
    pub record_every: usize,
    pub times: Vec<f64>,
    pub actions: Vec<Vec<f64>>,
    /// Reduced to `[0, 2 pi)`.
    pub angles: Vec<Vec<f64>>,
    pub energy: Vec<f64>,
    /// `max |I(s) - I(0)|_2` over every step `s <= t`, per sample.
    pub running_drift: Vec<f64>,
    /// Time of the first step whose actions left the declared box.
    pub exit_time: Option<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn span(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn max_energy_error(&self) -> f64 {
        let e0 = self.energy.first().copied().unwrap_or(0.0);
        self.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max)
    }

    /// CSV with header `t,I1..In,theta1..thetan,H`.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        let mut head = vec!["t".to_string()];
        head.extend((1..=self.n).map(|j| format!("I{j}")));
        head.extend((1..=self.n).map(|j| format!("theta{j}")));
        head.push("H".into());
        writeln!(w, "{}", head.join(","))?;
        for s in 0..self.len() {
            let mut row = vec![format!("{:e}", self.times[s])];
            row.extend(self.actions[s].iter().map(|v| format!("{v:e}")));
            row.extend(self.angles[s].iter().map(|v| format!("{v:e}")));
            row.push(format!("{:e}", self.energy[s]));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn reduce(th: &[f64]) -> Vec<f64> {
    th.iter().map(|t| t.rem_euclid(TAU)).collect()
}

/// Integrates from `(i0, theta0)` over `spec.total_time`. Leaving the
/// declared box of `h` truncates the run and sets `exit_time`.
pub fn integrate(
    h: &dyn FrequencyMap,
    f: &TrigPoly,
    i0: &[f64],
    theta0: &[f64],
    spec: &IntegratorSpec,
) -> Result<Trajectory> {
    let n = h.dim();
    if i0.len() != n || theta0.len() != n {
        return domain("initial state dimension differs from the Hamiltonian");
    }
    if !(spec.dt > 0.0) || !(spec.total_time >= 0.0) || spec.record_every == 0 {
        return domain("step size and record stride must be positive");
    }
    if !h.contains(i0) {
        return domain(format!("initial actions {i0:?} outside the declared domain"));
    }
    let stepper = Stepper::new(h, f, spec.scheme, spec.tol, spec.max_iter)?;
    let steps = (spec.total_time / spec.dt).round() as usize;
    let mut i = i0.to_vec();
    let mut th = reduce(theta0);
    let mut tr = Trajectory {
        n,
        scheme: stepper.scheme(),
        dt: spec.dt,
        record_every: spec.record_every,
        times: vec![0.0],
        actions: vec![i.clone()],
        angles: vec![th.clone()],
        energy: vec![stepper.energy(&i, &th)?],
        running_drift: vec![0.0],
        exit_time: None,
    };
    let mut peak: f64 = 0.0;
    for s in 1..=steps {
        stepper.step(&mut i, &mut th, spec.dt)?;
        th.iter_mut().for_each(|t| *t = t.rem_euclid(TAU));
        let t = s as f64 * spec.dt;
        let d2: f64 = i.iter().zip(i0).map(|(a, b)| (a - b) * (a - b)).sum();
        peak = peak.max(d2.sqrt());
        let exited = !h.contains(&i);
        if s % spec.record_every == 0 || s == steps || exited {
            tr.times.push(t);
            tr.actions.push(i.clone());
            tr.angles.push(th.clone());
            tr.energy.push(stepper.energy(&i, &th)?);
            tr.running_drift.push(peak);
        }
        if exited {
            tr.exit_time = Some(t);
            break;
        }
    }
    Ok(tr)
}
