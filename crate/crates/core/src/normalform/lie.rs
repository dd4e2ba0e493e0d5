use serde::{Deserialize, Serialize};

use super::{check_thresholds, project_nonresonant, project_resonant, solve_homological, DegreeCap, Thresholds};
use crate::error::{domain, NekError, Result};
use crate::frequency::{FrequencyMap, PolyHamiltonian};
use crate::geography::Lattice;
use crate::grid::DomainSpec;
use crate::norms::weighted_fourier_norm;
use crate::trig::TrigPoly;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormalizeConfig {
    /// Lie steps; `None` means `ceil(K sigma / 6)`.
    pub steps: Option<usize>,
    /// Total degree of least-squares quotients.
    pub fit_degree: u32,
    /// Maximal order of each Lie series.
    pub series_order: usize,
    /// A series stops once a term's norm drops below `series_tol * epsilon`.
    pub series_tol: f64,
    /// Action nodes per axis for weighted norms.
    pub norm_nodes: usize,
}

impl Default for NormalizeConfig {
    fn default() -> Self {
        NormalizeConfig {
            steps: None,
            fit_degree: 14,
            series_order: 16,
            series_tol: 1e-10,
            norm_nodes: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalFormDiagnostics {
    pub steps_requested: usize,
    pub steps_taken: usize,
    /// `||f||_{rho, sigma}` as measured.
    pub f_norm: f64,
    /// Non-resonant norm before each step and after the last one.
    pub nonresonant_norms: Vec<f64>,
    /// Series order used at each step.
    pub series_orders: Vec<usize>,
    /// Norm of the last series term kept at each step.
    pub series_tails: Vec<f64>,
    pub fit_residuals: Vec<f64>,
    /// `||f*||` at widths `(rho'/2, sigma/6)`.
    pub remainder_norm: f64,
    /// `e^{-K sigma / 6} epsilon`.
    pub remainder_bound: f64,
    pub remainder_factor: f64,
    /// `||g - g0||` at widths `(rho', sigma)`.
    pub g_shift_norm: f64,
    /// `64 K epsilon^2 / (alpha rho')`.
    pub g_shift_bound: f64,
    pub g_shift_factor: f64,
    /// Largest `|k|_1` in `f*`.
    pub remainder_max_l1: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormResult {
    pub lattice: Lattice,
    pub k: f64,
    pub g: TrigPoly,
    pub g0: TrigPoly,
    pub remainder: TrigPoly,
    /// `chi_1 .. chi_N`; `Psi = Phi_1 o .. o Phi_N`.
    pub generators: Vec<TrigPoly>,
    pub diagnostics: NormalFormDiagnostics,
}

#[derive(Serialize, Deserialize)]
struct ResultFile {
    schema: String,
    lattice: Vec<Vec<i64>>,
    k: f64,
    g: serde_json::Value,
    g0: serde_json::Value,
    remainder: serde_json::Value,
    generators: Vec<serde_json::Value>,
    diagnostics: NormalFormDiagnostics,
}

const RESULT_SCHEMA: &str = "neklab.normalform/1";

impl NormalFormResult {
    pub fn to_json(&self) -> Result<String> {
        let v = |p: &TrigPoly| -> Result<serde_json::Value> { Ok(serde_json::from_str(&p.to_json()?)?) };
        let file = ResultFile {
            schema: RESULT_SCHEMA.into(),
            lattice: self.lattice.basis.clone(),
            k: self.k,
            g: v(&self.g)?,
            g0: v(&self.g0)?,
            remainder: v(&self.remainder)?,
            generators: self.generators.iter().map(v).collect::<Result<_>>()?,
            diagnostics: self.diagnostics.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ResultFile = serde_json::from_str(s)?;
        if file.schema != RESULT_SCHEMA {
            return Err(NekError::Format(format!("unexpected schema {:?}", file.schema)));
        }
        let p = |v: &serde_json::Value| TrigPoly::from_json(&v.to_string());
        let g = p(&file.g)?;
        let lattice = if file.lattice.is_empty() {
            Lattice::trivial(g.dim())
        } else {
            Lattice::saturate(g.dim(), &file.lattice)?
        };
        Ok(NormalFormResult {
            lattice,
            k: file.k,
            g,
            g0: p(&file.g0)?,
            remainder: p(&file.remainder)?,
            generators: file.generators.iter().map(p).collect::<Result<_>>()?,
            diagnostics: file.diagnostics,
        })
    }
}

/// `exp(-{., chi}) (h + F) - h` by its Lie series: `T_0 = h + F`,
/// `T_m = -{T_{m-1}, chi} / m`. Returns the transformed perturbation,
/// the number of terms added and the norm of the last one.
pub fn lie_transform(
    h: &TrigPoly,
    f: &TrigPoly,
    chi: &TrigPoly,
    max_order: usize,
    stop: impl Fn(&TrigPoly) -> Result<f64>,
    tol: f64,
) -> Result<(TrigPoly, usize, f64)> {
    lie_transform_with(h, f, chi, max_order, stop, tol, |t| t.clone())
}

/// [`lie_transform`] with every new term passed through `reduce`.
pub fn lie_transform_with(
    h: &TrigPoly,
    f: &TrigPoly,
    chi: &TrigPoly,
    max_order: usize,
    stop: impl Fn(&TrigPoly) -> Result<f64>,
    tol: f64,
    reduce: impl Fn(&TrigPoly) -> TrigPoly,
) -> Result<(TrigPoly, usize, f64)> {
    let mut term = h.add(f)?;
    let mut acc = f.clone();
    let mut tail = f64::INFINITY;
    let mut order = 0;
    for m in 1..=max_order {
        term = reduce(&term.poisson_bracket(chi)?.scale(-1.0 / m as f64));
        acc = acc.add(&term)?;
        order = m;
        tail = stop(&term)?;
        if tail <= tol {
            break;
        }
    }
    Ok((acc, order, tail))
}

/// Resonant normal form of `h + f` modulo `lattice` up to the cutoff
/// `t.k`, on the real box of `h` thickened by `t.rho`.
pub fn normalize(
    h: &PolyHamiltonian,
    f: &TrigPoly,
    lattice: &Lattice,
    t: &Thresholds,
    cfg: &NormalizeConfig,
) -> Result<NormalFormResult> {
    let n = h.dim();
    if f.dim() != n || lattice.n != n {
        return domain("Hamiltonian, perturbation and lattice dimensions differ");
    }
    let report = check_thresholds(t);
    if !report.pass {
        return Err(NekError::Threshold(format!(
            "margins eps {:.3e}, rho {:.3e}, cutoff {:.3e}",
            report.epsilon_margin, report.rho_margin, report.cutoff_margin
        )));
    }
    let center = h.center().to_vec();
    let full = DomainSpec::new(center.clone(), h.radius(), t.rho, t.sigma)?;
    let norm = |g: &TrigPoly| weighted_fourier_norm(g, &full, t.sigma, cfg.norm_nodes);
    let f_norm = norm(f)?;
    if f_norm > t.epsilon * (1.0 + 1e-12) {
        return Err(NekError::Threshold(format!(
            "||f|| = {f_norm:.3e} exceeds epsilon = {:.3e}",
            t.epsilon
        )));
    }
    let steps = cfg
        .steps
        .unwrap_or_else(|| (t.k * t.sigma / 6.0).ceil().max(1.0) as usize);
    let h_trig = TrigPoly::from_poly(h.poly().clone());
    let cap = DegreeCap::new(h, t.rho, cfg.fit_degree)?;
    let mut cur = f.clone();
    let mut generators = Vec::new();
    let mut nonresonant_norms = Vec::new();
    let (mut series_orders, mut series_tails, mut fit_residuals) = (vec![], vec![], vec![]);
    for _ in 0..steps {
        let nr = project_nonresonant(&cur, lattice, t.k);
        let nr_norm = norm(&nr)?;
        if let Some(&prev) = nonresonant_norms.last() {
            if nr_norm > prev {
                nonresonant_norms.push(nr_norm);
                return Err(NekError::Divergence(nonresonant_norms));
            }
        }
        nonresonant_norms.push(nr_norm);
        if nr.is_zero() {
            break;
        }
        let gen = solve_homological(h, &nr, lattice, t.k, t.rho, t.alpha, cfg.fit_degree)?;
        let (next, order, tail) = lie_transform_with(
            &h_trig,
            &cur,
            &gen.chi,
            cfg.series_order,
            norm,
            cfg.series_tol * t.epsilon,
            |g| cap.apply(g),
        )?;
        cur = next;
        generators.push(gen.chi);
        series_orders.push(order);
        series_tails.push(tail);
        fit_residuals.push(gen.residual);
    }
    if !generators.is_empty() {
        let last = norm(&project_nonresonant(&cur, lattice, t.k))?;
        if last > *nonresonant_norms.last().unwrap_or(&f64::INFINITY) {
            nonresonant_norms.push(last);
            return Err(NekError::Divergence(nonresonant_norms));
        }
        nonresonant_norms.push(last);
    }
    let g = project_resonant(&cur, lattice, t.k);
    let remainder = cur.sub(&g)?;
    let g0 = project_resonant(f, lattice, t.k);

    let shrunk = DomainSpec::new(center.clone(), h.radius(), t.rho_prime / 2.0, t.sigma / 6.0)?;
    let remainder_norm = weighted_fourier_norm(&remainder, &shrunk, t.sigma / 6.0, cfg.norm_nodes)?;
    let remainder_bound = (-t.k * t.sigma / 6.0).exp() * t.epsilon;
    let mid = DomainSpec::new(center, h.radius(), t.rho_prime, t.sigma)?;
    let g_shift_norm = weighted_fourier_norm(&g.sub(&g0)?, &mid, t.sigma, cfg.norm_nodes)?;
    let g_shift_bound = 64.0 * t.k * t.epsilon * t.epsilon / (t.alpha * t.rho_prime);
    let diagnostics = NormalFormDiagnostics {
        steps_requested: steps,
        steps_taken: generators.len(),
        f_norm,
        nonresonant_norms,
        series_orders,
        series_tails,
        fit_residuals,
        remainder_norm,
        remainder_bound,
        remainder_factor: remainder_norm / remainder_bound,
        g_shift_norm,
        g_shift_bound,
        g_shift_factor: g_shift_norm / g_shift_bound,
        remainder_max_l1: remainder.max_l1(),
    };
    Ok(NormalFormResult {
        lattice: lattice.clone(),
        k: t.k,
        g,
        g0,
        remainder,
        generators,
        diagnostics,
    })
}
