//! TOML experiment configuration. Every section is optional; unknown keys
//! are rejected by the parser and the message names the key.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use neklab::benchmarks::{hamiltonian, HAMILTONIANS};
use neklab::frequency::{FrequencyMap, PolyHamiltonian};
use neklab::geography::Prefactors;
use neklab::normalform::{NormalizeConfig, VerifyConfig};
use neklab::{MultiIndex, TrigPoly};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Smooth,
    Steepness,
    Geography,
    Normalform,
    Stability,
    Fit,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Smooth => "smooth",
            Pipeline::Steepness => "steepness",
            Pipeline::Geography => "geography",
            Pipeline::Normalform => "normalform",
            Pipeline::Stability => "stability",
            Pipeline::Fit => "fit",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub subcommand: Option<Pipeline>,
    /// Built-in benchmark name or path to a TrigPoly JSON file whose
    /// zero harmonic is the integrable part.
    pub hamiltonian: Option<String>,
    /// Action box; required for Hamiltonians read from a file.
    pub domain: Option<DomainBox>,
    pub ell: Option<f64>,
    pub n: Option<usize>,
    pub alpha: Option<Vec<f64>>,
    pub sweep: Option<Sweep>,
    pub prefactors: Option<PrefactorOverrides>,
    pub seed: Option<u64>,
    pub budget_secs: Option<f64>,
    pub out: Option<PathBuf>,
    pub smooth: Option<SmoothSection>,
    pub steepness: Option<SteepnessSection>,
    pub geography: Option<GeographySection>,
    pub normalform: Option<NormalformSection>,
    pub stability: Option<StabilitySection>,
    pub fit: Option<FitSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBox {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Either explicit `values` or a geometric range `from`, `to`, `points`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub values: Option<Vec<f64>>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub points: Option<usize>,
}

impl Sweep {
    pub fn resolve(&self) -> CliResult<Vec<f64>> {
        let v = match (&self.values, self.from, self.to, self.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(k)) => {
                if !(a > 0.0 && b > 0.0) {
                    return invalid("sweep.from and sweep.to must be positive");
                }
                if k == 1 {
                    vec![a]
                } else {
                    let r = (b / a).ln();
                    (0..k).map(|j| a * (r * j as f64 / (k - 1) as f64).exp()).collect()
                }
            }
            (None, None, None, None) => Vec::new(),
            _ => return invalid("sweep: give either sweep.values or all of sweep.from, sweep.to, sweep.points"),
        };
        if v.is_empty() {
            return invalid("sweep non-empty: the sweep has no values");
        }
        if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return invalid("sweep.values must be positive and finite");
        }
        Ok(v)
    }
}

/// Partial [`Prefactors`], applied over the pipeline's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrefactorOverrides {
    pub c_s: Option<f64>,
    pub c_r: Option<f64>,
    pub c_delta: Option<f64>,
    pub hierarchy: Option<f64>,
    pub c_big_r: Option<f64>,
    pub c_alpha: Option<f64>,
    pub c_rj: Option<f64>,
    pub c_t0: Option<f64>,
    pub c_tl: Option<f64>,
}

impl PrefactorOverrides {
    pub fn apply(&self, base: &Prefactors) -> CliResult<Prefactors> {
        let pick = |o: Option<f64>, b: f64, name: &str| -> CliResult<f64> {
            match o {
                Some(v) if !(v > 0.0 && v.is_finite()) => invalid(format!("prefactors.{name} must be positive")),
                Some(v) => Ok(v),
                None => Ok(b),
            }
        };
        Ok(Prefactors {
            c_s: pick(self.c_s, base.c_s, "c_s")?,
            c_r: pick(self.c_r, base.c_r, "c_r")?,
            c_delta: pick(self.c_delta, base.c_delta, "c_delta")?,
            hierarchy: pick(self.hierarchy, base.hierarchy, "hierarchy")?,
            c_big_r: pick(self.c_big_r, base.c_big_r, "c_big_r")?,
            c_alpha: pick(self.c_alpha, base.c_alpha, "c_alpha")?,
            c_rj: pick(self.c_rj, base.c_rj, "c_rj")?,
            c_t0: pick(self.c_t0, base.c_t0, "c_t0")?,
            c_tl: pick(self.c_tl, base.c_tl, "c_tl")?,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothSection {
    /// Harmonics per line of the test family.
    pub modes: Option<usize>,
    /// Action nodes per axis.
    pub nodes: Option<usize>,
    pub radius: Option<f64>,
    pub fit_degree: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteepnessSection {
    pub grid_nodes: Option<usize>,
    pub random_points: Option<usize>,
    pub frames: Option<usize>,
    pub xi_min: Option<f64>,
    pub xi_max: Option<f64>,
    pub xi_count: Option<usize>,
    pub eta_samples: Option<usize>,
    pub refine_rounds: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeographySection {
    pub center: Option<Vec<f64>>,
    pub epsilon0: Option<f64>,
    pub m: Option<f64>,
    /// Covering and disjointness samples per epsilon.
    pub samples: Option<usize>,
    pub disjointness: Option<bool>,
    /// Search the smallest clean hierarchy factor before checking.
    pub calibrate: Option<bool>,
    pub calibration_upper: Option<f64>,
    pub calibration_safety: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalformSection {
    /// `one-dof` or `two-dof`.
    pub benchmark: Option<String>,
    pub amplitude: Option<f64>,
    pub normalize: Option<NormalizeConfig>,
    pub verify: Option<VerifyConfig>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySection {
    pub center: Option<Vec<f64>>,
    pub epsilon0: Option<f64>,
    pub m: Option<f64>,
    pub dt: Option<f64>,
    pub max_steps: Option<usize>,
    pub initial_conditions: Option<usize>,
    pub ic_fraction: Option<f64>,
    pub stride_steps: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// CSV from an earlier run, e.g. `sweep.csv`.
    pub input: Option<PathBuf>,
    /// Column holding the abscissa.
    pub x: Option<String>,
    /// Column holding the fitted quantity.
    pub quantity: Option<String>,
    pub deweight_ell: Option<f64>,
}

pub fn invalid<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Validation(msg.into()))
}

impl ExperimentConfig {
    /// A config with nothing but the schema version.
    pub fn empty() -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            ..Default::default()
        }
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let de = toml::Deserializer::new(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                CliError::Validation(inner.message().to_string())
            } else {
                CliError::Validation(format!("{path}: {}", inner.message()))
            }
        })?;
        if cfg.schema_version != SCHEMA_VERSION {
            return invalid(format!(
                "schema_version = {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            ));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("config: cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Checks that do not depend on the pipeline's defaults.
    pub fn validate(&self, pipeline: Pipeline) -> CliResult<()> {
        if let Some(s) = self.subcommand {
            if s != pipeline {
                return invalid(format!(
                    "subcommand = {:?} conflicts with the requested {:?}",
                    s.name(),
                    pipeline.name()
                ));
            }
        }
        if let Some(n) = self.n {
            if n == 0 {
                return invalid("n must be >= 1");
            }
            if matches!(pipeline, Pipeline::Geography | Pipeline::Stability) && n < 3 {
                return invalid("n must be >= 3 for geography and stability");
            }
        }
        if let Some(l) = self.ell {
            if !(l > 0.0 && l.is_finite()) {
                return invalid("ell must be positive");
            }
        }
        if let Some(b) = self.budget_secs {
            if !(b > 0.0) {
                return invalid("budget_secs must be positive");
            }
        }
        if let Some(h) = &self.hamiltonian {
            if !HAMILTONIANS.contains(&h.as_str()) && !Path::new(h).exists() {
                return invalid(format!(
                    "hamiltonian: {h:?} is neither a built-in benchmark {HAMILTONIANS:?} nor an existing file"
                ));
            }
        }
        if let Some(input) = self.fit.as_ref().and_then(|f| f.input.as_ref()) {
            if !input.exists() {
                return invalid(format!("fit.input: {} does not exist", input.display()));
            }
        }
        Ok(())
    }

    /// The integrable part and the perturbation shape (non-zero harmonics)
    /// of the configured Hamiltonian, defaulting to `default_name`.
    pub fn load_hamiltonian(&self, default_name: &str) -> CliResult<(PolyHamiltonian, Option<TrigPoly>)> {
        let name = self.hamiltonian.as_deref().unwrap_or(default_name);
        let (h, shape) = if HAMILTONIANS.contains(&name) {
            (hamiltonian(name)?, None)
        } else {
            let text = std::fs::read_to_string(name)
                .map_err(|e| CliError::Validation(format!("hamiltonian: cannot read {name}: {e}")))?;
            let full = TrigPoly::from_json(&text)
                .map_err(|e| CliError::Validation(format!("hamiltonian: {name}: {e}")))?;
            let n = full.dim();
            let zero = MultiIndex::zero(n);
            let h0 = full
                .coeff(&zero)
                .cloned()
                .ok_or_else(|| CliError::Validation("hamiltonian: file has no zero harmonic".into()))?;
            let Some(d) = &self.domain else {
                return invalid("domain: required when hamiltonian is a file");
            };
            let h = PolyHamiltonian::new(h0, d.center.clone(), d.radius)?;
            let rest = full.filter(|k| !k.is_zero());
            (h, (!rest.is_zero()).then_some(rest))
        };
        let h = match &self.domain {
            Some(d) if HAMILTONIANS.contains(&name) => h
                .with_domain(d.center.clone(), d.radius)
                .map_err(|e| CliError::Validation(format!("domain: {e}")))?,
            _ => h,
        };
        if let Some(n) = self.n {
            if n != h.dim() {
                return invalid(format!("n = {n} but the hamiltonian has {} actions", h.dim()));
            }
        }
        Ok((h, shape))
    }
}
