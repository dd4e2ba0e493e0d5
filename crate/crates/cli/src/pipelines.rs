//! The six pipelines. Each reads the resolved config, writes its
//! artifacts through [`Artifacts`] and reports failures as [`CliError`].

use std::time::Instant;

use neklab::benchmarks::{normalform_benchmark, regularity_family};
use neklab::dynamics::{
    convex3_perturbation, fit_exponents, stability_sweep, sweep_csv, StabilityConfig,
};
use neklab::frequency::FrequencyMap;
use neklab::geography::{
    calibrate_hierarchy, covering_check, disjointness_sweep, focused_disjointness, geography_params,
    lattices_json, samples_csv, DisjointnessConfig, GeographyReport, GeographySetup, Prefactors,
};
use neklab::normalform::{check_thresholds, normalize, verify_normalform, NormalizeConfig, VerifyConfig};
use neklab::smoothing::{finish_sweep, smooth_annulus_table, AnnulusOptions};
use neklab::steepness::{estimate_indices, EstimateConfig};
use neklab::TrigPoly;
use serde_json::json;

use crate::config::{invalid, ExperimentConfig, Sweep};
use crate::error::{CliError, CliResult};
use crate::manifest::Artifacts;

/// Wall-clock allowance, checked between pipeline stages.
pub struct Budget {
    start: Instant,
    limit: Option<f64>,
}

impl Budget {
    pub fn new(limit: Option<f64>) -> Self {
        Budget {
            start: Instant::now(),
            limit,
        }
    }

    pub fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    pub fn check(&self, stage: &str) -> CliResult<()> {
        match self.limit {
            Some(l) if self.elapsed() > l => Err(CliError::Budget(format!(
                "{:.2} s spent before {stage}, budget {l} s",
                self.elapsed()
            ))),
            _ => Ok(()),
        }
    }
}

pub struct Context<'a> {
    pub cfg: &'a ExperimentConfig,
    pub seed: u64,
    pub budget: &'a Budget,
}

fn sweep_or(cfg: &ExperimentConfig, default: Vec<f64>) -> CliResult<Vec<f64>> {
    match &cfg.sweep {
        Some(s) => s.resolve(),
        None => Sweep {
            values: Some(default),
            ..Default::default()
        }
        .resolve(),
    }
}

/// `2^-2 .. 2^-8`.
pub fn default_widths() -> Vec<f64> {
    (2..=8).map(|j| 2f64.powi(-j)).collect()
}

pub fn smooth(ctx: &Context, art: &mut Artifacts) -> CliResult<()> {
    let cfg = ctx.cfg;
    let n = cfg.n.unwrap_or(1);
    let ell = cfg.ell.unwrap_or(2.5);
    let sec = cfg.smooth.clone().unwrap_or_default();
    let (modes, nodes) = match n {
        1 => (2048, 65),
        2 => (256, 17),
        _ => (32, 9),
    };
    let modes = sec.modes.unwrap_or(modes);
    let nodes = sec.nodes.unwrap_or(nodes);
    let radius = sec.radius.unwrap_or(1.0);
    if cfg.hamiltonian.is_some() {
        return invalid("hamiltonian: smooth runs on the built-in regularity family");
    }
    let widths = sweep_or(cfg, default_widths())?;
    let table = regularity_family(n, ell, modes, nodes, radius)?;
    let mut opts = AnnulusOptions::new(radius);
    if let Some(d) = sec.fit_degree {
        opts.fit_degree = d;
    }
    let mut reports = Vec::with_capacity(widths.len());
    for &s in &widths {
        ctx.budget.check(&format!("smoothing at s = {s}"))?;
        reports.push(smooth_annulus_table(&table, s, ell, &opts)?.report);
    }
    if reports.len() < 2 {
        return invalid("sweep: smoothing slopes need at least two widths");
    }
    let result = finish_sweep(reports, None)?;
    let mut csv = Vec::new();
    result.write_csv(&mut csv)?;
    art.write("smoothing.csv", &csv)?;
    let slopes: Vec<f64> = result.fits.iter().map(|f| f.slope).collect();
    art.write_json(
        "smoothing.json",
        &json!({
            "family": {"n": n, "ell": ell, "modes": modes, "nodes": nodes, "radius": radius},
            "widths": widths,
            "slopes": slopes,
            "fourier_norm_spread": result.fourier_norm_spread,
            "sweep": result,
        }),
    )
}

pub fn steepness(ctx: &Context, art: &mut Artifacts) -> CliResult<()> {
    let cfg = ctx.cfg;
    let (h, _) = cfg.load_hamiltonian("convex3")?;
    let sec = cfg.steepness.clone().unwrap_or_default();
    let d = EstimateConfig::default();
    let ec = EstimateConfig {
        grid_nodes: sec.grid_nodes.unwrap_or(d.grid_nodes),
        random_points: sec.random_points.unwrap_or(d.random_points),
        frames: sec.frames.unwrap_or(d.frames),
        xi_min: sec.xi_min.unwrap_or(d.xi_min),
        xi_max: sec.xi_max.unwrap_or(d.xi_max),
        xi_count: sec.xi_count.unwrap_or(d.xi_count),
        eta_samples: sec.eta_samples.unwrap_or(d.eta_samples),
        refine_rounds: sec.refine_rounds.unwrap_or(d.refine_rounds),
        seed: ctx.seed,
        ..d
    };
    ctx.budget.check("steepness estimate")?;
    let outcome = estimate_indices(&h, &ec)?;
    art.write_json("steepness.json", &outcome)
}

pub fn geography(ctx: &Context, art: &mut Artifacts) -> CliResult<()> {
    let cfg = ctx.cfg;
    let (h, _) = cfg.load_hamiltonian("convex3")?;
    let n = h.dim();
    if n < 3 {
        return invalid(format!("n must be >= 3 for geography, the hamiltonian has {n} actions"));
    }
    let alpha = cfg.alpha.clone().unwrap_or_else(|| vec![1.0; n - 1]);
    let ell = cfg.ell.unwrap_or(n as f64 + 1.0);
    let params = geography_params(n, &alpha, ell)?;
    let epsilons = sweep_or(cfg, vec![1e-2, 1e-3, 1e-4])?;
    let sec = cfg.geography.clone().unwrap_or_default();
    let center = sec.center.clone().unwrap_or_else(|| h.center().to_vec());
    let epsilon0 = sec.epsilon0.unwrap_or(1.0);
    let m = sec.m.unwrap_or(1.0);
    let samples = sec.samples.unwrap_or(10_000);
    let mut pf = cfg.prefactors.clone().unwrap_or_default().apply(&Prefactors::default())?;
    let setup = GeographySetup {
        map: &h,
        center: &center,
        params: &params,
        epsilon0,
        m,
    };
    let dcfg = DisjointnessConfig {
        samples,
        seed: ctx.seed,
        ..Default::default()
    };
    if sec.calibrate.unwrap_or(false) {
        ctx.budget.check("calibration")?;
        let rep = calibrate_hierarchy(
            &setup,
            &epsilons,
            &pf,
            &dcfg,
            sec.calibration_upper.unwrap_or(64.0),
            sec.calibration_safety.unwrap_or(2.0),
        )?;
        pf.hierarchy = rep.recommended;
        art.write_json("calibration.json", &rep)?;
    }
    art.write_json(
        "params.json",
        &json!({
            "params": params,
            "prefactors": pf,
            "epsilons": epsilons,
            "center": center,
            "epsilon0": epsilon0,
            "m": m,
            "samples": samples,
            "seed": ctx.seed,
        }),
    )?;
    let mut failures = Vec::new();
    for (i, &eps) in epsilons.iter().enumerate() {
        ctx.budget.check(&format!("geography at eps = {eps}"))?;
        let geo = setup.build(eps, &pf)?;
        let cov = covering_check(&geo, samples, ctx.seed);
        let lattices: Vec<_> = (1..n).flat_map(|j| geo.lattices(j)).collect();
        art.write(&format!("lattices_{i}.json"), lattices_json(&lattices)?.as_bytes())?;
        art.write(&format!("samples_{i}.csv"), samples_csv(&cov.rows, n).as_bytes())?;
        let mut violations = cov.violations.clone();
        if sec.disjointness.unwrap_or(true) {
            let uniform = disjointness_sweep(&geo, &dcfg)?;
            let focused = focused_disjointness(&geo, &dcfg)?;
            violations.extend(uniform.violations.iter().cloned());
            violations.extend(focused.violations.iter().cloned());
            art.write_json(
                &format!("disjointness_{i}.json"),
                &json!({"epsilon": eps, "uniform": uniform, "focused": focused}),
            )?;
        }
        if cov.coverage < 1.0 || !violations.is_empty() {
            failures.push(json!({
                "epsilon": eps,
                "coverage": cov.coverage,
                "violations": violations,
            }));
        }
        let report = GeographyReport {
            params: params.clone(),
            schedule: geo.schedule().clone(),
            coverage: cov,
            violations,
        };
        art.write(&format!("geography_{i}.json"), report.to_json()?.as_bytes())?;
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::invariant(
            format!("coverage or disjointness failed at {} epsilon value(s)", failures.len()),
            failures,
        ))
    }
}

pub fn normalform(ctx: &Context, art: &mut Artifacts) -> CliResult<()> {
    let cfg = ctx.cfg;
    if cfg.hamiltonian.is_some() {
        return invalid("hamiltonian: normalform runs the built-in benchmarks; set normalform.benchmark");
    }
    let sec = cfg.normalform.clone().unwrap_or_default();
    let name = sec.benchmark.clone().unwrap_or_else(|| "one-dof".into());
    if let Some(a) = sec.amplitude {
        if !(a > 0.0 && a.is_finite()) {
            return invalid("normalform.amplitude must be positive");
        }
    }
    let b = normalform_benchmark(&name, sec.amplitude)
        .map_err(|e| CliError::Validation(format!("normalform.benchmark: {e}")))?;
    let ncfg = sec.normalize.clone().unwrap_or_else(NormalizeConfig::default);
    let vcfg = VerifyConfig {
        seed: ctx.seed,
        ..sec.verify.clone().unwrap_or_default()
    };
    ctx.budget.check("normalize")?;
    let result = normalize(&b.h, &b.f, &b.lattice, &b.thresholds, &ncfg)?;
    art.write("normalform.json", result.to_json()?.as_bytes())?;
    ctx.budget.check("verification")?;
    let check = verify_normalform(&result, &b.h, &b.f, &b.thresholds, &vcfg)?;
    art.write_json(
        "verification.json",
        &json!({
            "benchmark": name,
            "thresholds": b.thresholds,
            "threshold_report": check_thresholds(&b.thresholds),
            "remainder_factor": result.diagnostics.remainder_factor,
            "g_shift_factor": result.diagnostics.g_shift_factor,
            "displacements_ok": check.displacements_ok(),
            "check": check,
        }),
    )?;
    if !(check.resonant_support && check.generator_support) {
        return Err(CliError::invariant(
            "normal form or generators carry harmonics outside their lattice",
            &check,
        ));
    }
    Ok(())
}

pub fn stability(ctx: &Context, art: &mut Artifacts) -> CliResult<()> {
    let cfg = ctx.cfg;
    let (h, shape) = cfg.load_hamiltonian("convex3")?;
    let n = h.dim();
    if n < 3 {
        return invalid(format!("n must be >= 3 for stability, the hamiltonian has {n} actions"));
    }
    let perturbation: Box<dyn Fn(f64) -> TrigPoly + Sync> = match shape {
        Some(s) => Box::new(move |e| s.scale(e)),
        None if n == 3 => Box::new(convex3_perturbation),
        None => return invalid("hamiltonian: stability needs a perturbation in the hamiltonian file"),
    };
    let d = StabilityConfig::default();
    let sec = cfg.stability.clone().unwrap_or_default();
    let base = d.prefactors.clone();
    let scfg = StabilityConfig {
        epsilons: sweep_or(cfg, d.epsilons.clone())?,
        ell: cfg.ell.unwrap_or(d.ell),
        alpha: cfg.alpha.clone().unwrap_or_else(|| vec![1.0; n - 1]),
        epsilon0: sec.epsilon0.unwrap_or(d.epsilon0),
        m: sec.m.unwrap_or(d.m),
        center: sec.center.clone().unwrap_or_else(|| h.center().to_vec()),
        prefactors: cfg.prefactors.clone().unwrap_or_default().apply(&base)?,
        dt: sec.dt.unwrap_or(d.dt),
        max_steps: sec.max_steps.unwrap_or(d.max_steps),
        initial_conditions: sec.initial_conditions.unwrap_or(d.initial_conditions),
        ic_fraction: sec.ic_fraction.unwrap_or(d.ic_fraction),
        stride_steps: sec.stride_steps.unwrap_or(d.stride_steps),
        seed: ctx.seed,
    };
    ctx.budget.check("stability sweep")?;
    let rows = stability_sweep(&h, &*perturbation, &scfg)?;
    ctx.budget.check("drift report")?;
    let mut csv = Vec::new();
    sweep_csv(&rows, &mut csv)?;
    art.write("sweep.csv", &csv)?;
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let drift: Vec<f64> = rows.iter().map(|r| r.max_drift).collect();
    let fit = fit_exponents(&eps, &drift, None).map_err(|e| e.to_string());
    let worst = |p: f64| {
        rows.iter()
            .map(|r| r.max_drift / r.epsilon.powf(p))
            .fold(0.0, f64::max)
    };
    art.write_json(
        "drift_report.json",
        &json!({
            "config": scfg,
            "rows": rows,
            "drift_fit": fit.as_ref().ok(),
            "drift_fit_error": fit.as_ref().err(),
            "max_ratio_eps_sixth": worst(1.0 / 6.0),
            "max_ratio_eps_half": worst(0.5),
        }),
    )
}

pub fn fit(ctx: &Context, art: &mut Artifacts) -> CliResult<()> {
    let cfg = ctx.cfg;
    let sec = cfg.fit.clone().unwrap_or_default();
    let Some(input) = sec.input.clone() else {
        return invalid("fit.input: required (a CSV such as sweep.csv)");
    };
    let x = sec.x.clone().unwrap_or_else(|| "epsilon".into());
    let quantity = sec.quantity.clone().unwrap_or_else(|| "max_drift".into());
    let mut reader = csv::Reader::from_path(&input)
        .map_err(|e| CliError::Validation(format!("fit.input: {e}")))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Validation(format!("fit.input: {e}")))?
        .clone();
    let col = |name: &str, field: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Validation(format!("fit.{field}: no column {name:?} in {}", input.display())))
    };
    let (ix, iq) = (col(&x, "x")?, col(&quantity, "quantity")?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Validation(format!("fit.input: {e}")))?;
        let (a, b) = (rec.get(ix).unwrap_or(""), rec.get(iq).unwrap_or(""));
        if b.is_empty() {
            continue;
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| CliError::Validation(format!("fit.input: row {}: {s:?} is not a number", line + 2)))
        };
        xs.push(parse(a)?);
        ys.push(parse(b)?);
    }
    ctx.budget.check("exponent fit")?;
    let fit = fit_exponents(&xs, &ys, sec.deweight_ell)?;
    art.write_json(
        "fit.json",
        &json!({
            "input": input,
            "x": x,
            "quantity": quantity,
            "points": xs.len(),
            "fit": fit,
        }),
    )
}
