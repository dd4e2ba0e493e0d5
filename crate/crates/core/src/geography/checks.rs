use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::blocks::{BlockId, Geography};
use super::lattice::Lattice;
use super::params::{schedule, GeographyParams, Prefactors, Schedule};
use crate::error::{domain, NekError, Result};
use crate::frequency::FrequencyMap;

/// Uniform sample of `B_2(center, radius)`, reproducible from `seed`.
pub fn sample_ball(center: &[f64], radius: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = center.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let len = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            let u: f64 = rng.random();
            let r = radius * u.powf(1.0 / n as f64);
            center.iter().zip(&g).map(|(c, x)| c + r * x / len).collect()
        })
        .collect()
}

/// A witness point that breaks one of the geometric properties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: String,
    pub point: Vec<f64>,
    pub lattice: String,
    pub other: Option<String>,
    pub value: Option<f64>,
}

/// One classified Monte Carlo sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub point: Vec<f64>,
    pub multiplicity: usize,
    pub lattice_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    pub samples: usize,
    pub classified: usize,
    pub coverage: f64,
    /// Samples per multiplicity `0..n-1`.
    pub histogram: Vec<usize>,
    pub violations: Vec<Violation>,
    #[serde(skip)]
    pub rows: Vec<SampleRow>,
}

/// Classifies uniform samples of `B_2(I_0, R)`; coverage must be 1.
pub fn covering_check(geo: &Geography, count: usize, seed: u64) -> CoveringReport {
    let pts = sample_ball(geo.center(), geo.schedule().big_r, count, seed);
    let results: Vec<(Vec<f64>, Result<BlockId>)> = pts
        .into_par_iter()
        .map(|p| {
            let b = geo.classify(&p);
            (p, b)
        })
        .collect();
    let mut histogram = vec![0; geo.dim()];
    let mut rows = Vec::with_capacity(count);
    let mut violations = Vec::new();
    for (p, b) in results {
        match b {
            Ok(b) => {
                histogram[b.multiplicity] += 1;
                rows.push(SampleRow {
                    lattice_id: b.label(),
                    multiplicity: b.multiplicity,
                    point: p,
                });
            }
            Err(_) => violations.push(Violation {
                kind: "covering".into(),
                point: p,
                lattice: String::new(),
                other: None,
                value: None,
            }),
        }
    }
    let classified = rows.len();
    CoveringReport {
        samples: count,
        classified,
        coverage: if count == 0 { 1.0 } else { classified as f64 / count as f64 },
        histogram,
        violations,
        rows,
    }
}

/// CSV `I1,...,In,multiplicity,lattice_id`.
pub fn samples_csv(rows: &[SampleRow], n: usize) -> String {
    let mut out: Vec<String> = (1..=n).map(|i| format!("I{i}")).collect();
    out.push("multiplicity".into());
    out.push("lattice_id".into());
    let mut s = out.join(",") + "\n";
    for r in rows {
        let coords: Vec<String> = r.point.iter().map(|x| format!("{x:e}")).collect();
        s += &format!("{},{},\"{}\"\n", coords.join(","), r.multiplicity, r.lattice_id);
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisjointnessConfig {
    pub samples: usize,
    pub seed: u64,
    /// Draw near the common resonance until `samples` points land in both
    /// zones, instead of uniformly in the ball.
    pub conditioned: bool,
    /// Rejection cap as a multiple of `samples`.
    pub max_draw_factor: usize,
    /// Flood-fill step as a fraction of `r_L`.
    pub resolution_fraction: f64,
}

impl Default for DisjointnessConfig {
    fn default() -> Self {
        DisjointnessConfig {
            samples: 10_000,
            seed: 0,
            conditioned: false,
            max_draw_factor: 1000,
            resolution_fraction: 0.125,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisjointnessReport {
    pub lattice: Lattice,
    pub other: Lattice,
    pub draws: usize,
    /// Samples lying in both zones, the only place a violation can occur.
    pub tested: usize,
    pub violations: Vec<Violation>,
    /// Set when violations were found: the prefactors need recalibration.
    pub miscalibrated: bool,
}

fn ext_hit(geo: &Geography, p: &[f64], l: &Lattice, frac: f64) -> Result<bool> {
    Ok(geo
        .ext_block_membership(p, l, frac * geo.schedule().r_lattice(l))?
        .member)
}

/// Samples of `B(I_0, R - rho)` lying in the extended block of `L` and in
/// the zone of `L'`. Uniform draws by default; conditioned draws sit near
/// the common resonance of `L` and `L'` (see [`focused_disjointness`]).
pub fn disjointness_check(
    geo: &Geography,
    l: &Lattice,
    other: &Lattice,
    cfg: &DisjointnessConfig,
) -> Result<DisjointnessReport> {
    if l.rank() != other.rank() || l == other || l.rank() == 0 {
        return domain("disjointness needs two distinct nonzero lattices of equal rank");
    }
    let mut both = Vec::new();
    let mut draws = 0;
    if cfg.conditioned {
        let n = geo.dim();
        let mut gens = l.basis.clone();
        gens.extend(other.basis.iter().cloned());
        let sum = Lattice::saturate(n, &gens)?;
        let target = if sum.rank() < n { sum } else { l.clone() };
        let width = geo.schedule().delta(l).max(geo.schedule().delta(other));
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let cap = cfg.samples.saturating_mul(cfg.max_draw_factor);
        while both.len() < cfg.samples && draws < cap {
            draws += 1;
            if let Some(x) = draw_near(geo, &target, width, &mut rng) {
                if geo.zone_membership(&x, l) && geo.zone_membership(&x, other) {
                    both.push(x);
                }
            }
        }
    } else {
        let inner = geo.schedule().big_r - geo.schedule().rho;
        draws = cfg.samples;
        both = sample_ball(geo.center(), inner, cfg.samples, cfg.seed)
            .into_iter()
            .filter(|p| geo.zone_membership(p, l) && geo.zone_membership(p, other))
            .collect();
    }
    let hits: Vec<Result<Option<Vec<f64>>>> = both
        .par_iter()
        .map(|p| Ok(ext_hit(geo, p, l, cfg.resolution_fraction)?.then(|| p.clone())))
        .collect();
    let mut violations = Vec::new();
    for h in hits {
        if let Some(p) = h? {
            violations.push(Violation {
                kind: "disjointness".into(),
                point: p,
                lattice: l.id(),
                other: Some(other.id()),
                value: None,
            });
        }
    }
    Ok(DisjointnessReport {
        lattice: l.clone(),
        other: other.clone(),
        draws,
        tested: both.len(),
        miscalibrated: !violations.is_empty(),
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisjointnessSweep {
    pub epsilon: f64,
    pub samples: usize,
    /// Ordered `(L, L')` pairs examined at sampled points in both zones.
    pub pair_tests: usize,
    pub violations: Vec<Violation>,
}

/// One uniform sample set for every ordered pair of same-rank lattices:
/// each sample lying in two zones is tested against both extended blocks.
pub fn disjointness_sweep(geo: &Geography, cfg: &DisjointnessConfig) -> Result<DisjointnessSweep> {
    let inner = geo.schedule().big_r - geo.schedule().rho;
    let pts = sample_ball(geo.center(), inner, cfg.samples, cfg.seed);
    let per_point: Vec<Result<(usize, Vec<Violation>)>> = pts
        .par_iter()
        .map(|p| {
            let mut tests = 0;
            let mut out = Vec::new();
            for j in 1..geo.dim() {
                let zs = geo.containing_zones(p, j);
                for &a in &zs {
                    for &b in &zs {
                        if a == b {
                            continue;
                        }
                        tests += 1;
                        let la = &geo.zones(j)[a].lattice;
                        if ext_hit(geo, p, la, cfg.resolution_fraction)? {
                            out.push(Violation {
                                kind: "disjointness".into(),
                                point: p.clone(),
                                lattice: la.id(),
                                other: Some(geo.zones(j)[b].lattice.id()),
                                value: None,
                            });
                        }
                    }
                }
            }
            Ok((tests, out))
        })
        .collect();
    let mut pair_tests = 0;
    let mut violations = Vec::new();
    for r in per_point {
        let (t, v) = r?;
        pair_tests += t;
        violations.extend(v);
    }
    Ok(DisjointnessSweep {
        epsilon: geo.schedule().epsilon,
        samples: cfg.samples,
        pair_tests,
        violations,
    })
}

/// Draws near the resonant manifold `{B omega(I) = 0}` of `target`: a
/// uniform point of `B(I_0, R - rho)` is Gauss-Newton projected onto the
/// manifold, then moved by `J^+ y` with `y` uniform in `(-width, width)^s`.
/// `None` when the projection fails or leaves the inner ball.
fn draw_near(geo: &Geography, target: &Lattice, width: f64, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    let inner = geo.schedule().big_r - geo.schedule().rho;
    let n = geo.dim();
    let s = target.rank();
    let b = DMatrix::from_fn(s, n, |r, c| target.basis[r][c] as f64);
    let mut x = sample_ball(geo.center(), inner, 1, rng.random()).pop()?;
    let jac = |x: &[f64]| &b * geo.map().hessian(x);
    let mut converged = false;
    for _ in 0..30 {
        let f = &b * DVector::from_vec(geo.map().omega(&x));
        if f.amax() < 1e-13 {
            converged = true;
            break;
        }
        let j = jac(&x);
        let step = j.transpose() * (&j * j.transpose()).lu().solve(&f)?;
        for (xi, d) in x.iter_mut().zip(step.iter()) {
            *xi -= d;
        }
        if !x.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    if !converged {
        return None;
    }
    let j = jac(&x);
    let y = DVector::from_fn(s, |_, _| width * (2.0 * rng.random::<f64>() - 1.0));
    let u = j.transpose() * (&j * j.transpose()).lu().solve(&y)?;
    for (xi, d) in x.iter_mut().zip(u.iter()) {
        *xi += d;
    }
    geo.in_inner_ball(&x).then_some(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusedSweep {
    pub epsilon: f64,
    /// Ordered pairs whose zones were found to meet inside `B(I_0, R - rho)`.
    pub active_pairs: usize,
    /// Ordered pairs of zones meeting the inner ball, examined by pilot draws.
    pub pairs: usize,
    /// Sampled points lying in both zones of their pair.
    pub tested: usize,
    pub draws: usize,
    pub violations: Vec<Violation>,
}

/// Pilot draws per ordered pair used to detect meeting zones.
pub const FOCUS_PILOT: usize = 64;

/// Disjointness test concentrated where it can fail: for every ordered
/// pair `(L, L')` of equal rank, points are drawn near the resonant manifold
/// of `L + L'` (of `L` when the sum is all of `Z^n`) and kept when they lie
/// in both zones. `cfg.samples` kept points are split evenly over the pairs
/// whose zones meet.
pub fn focused_disjointness(geo: &Geography, cfg: &DisjointnessConfig) -> Result<FocusedSweep> {
    let n = geo.dim();
    // Zones meeting the inner ball at all; pairs are formed among them.
    let mut present = Vec::new();
    for j in 1..n {
        let found: Vec<bool> = (0..geo.zones(j).len())
            .into_par_iter()
            .map(|a| {
                let z = &geo.zones(j)[a];
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
                rng.set_stream(((j as u64) << 32) | a as u64);
                (0..FOCUS_PILOT).any(|_| {
                    draw_near(geo, &z.lattice, z.delta, &mut rng)
                        .is_some_and(|x| geo.zone_membership(&x, &z.lattice))
                })
            })
            .collect();
        present.push((j, found));
    }
    let mut pairs = Vec::new();
    for (j, found) in &present {
        let live: Vec<usize> = (0..found.len()).filter(|&a| found[a]).collect();
        for &a in &live {
            for &b in &live {
                if a != b {
                    pairs.push((*j, a, b));
                }
            }
        }
    }
    let draw_pair = |p: usize, want: usize, cap: usize| -> Result<(Vec<Vec<f64>>, usize)> {
        let (j, a, b) = pairs[p];
        let la = &geo.zones(j)[a].lattice;
        let lb = &geo.zones(j)[b].lattice;
        let mut gens = la.basis.clone();
        gens.extend(lb.basis.iter().cloned());
        let sum = Lattice::saturate(n, &gens)?;
        let target = if sum.rank() < n { sum } else { la.clone() };
        let width = geo.zones(j)[a].delta.max(geo.zones(j)[b].delta);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(p as u64);
        let mut hits = Vec::new();
        let mut draws = 0;
        while hits.len() < want && draws < cap {
            draws += 1;
            if let Some(x) = draw_near(geo, &target, width, &mut rng) {
                if geo.zone_membership(&x, la) && geo.zone_membership(&x, lb) {
                    hits.push(x);
                }
            }
        }
        Ok((hits, draws))
    };
    let pilot: Vec<Result<(Vec<Vec<f64>>, usize)>> = (0..pairs.len())
        .into_par_iter()
        .map(|p| draw_pair(p, 1, FOCUS_PILOT))
        .collect();
    let mut active = Vec::new();
    let mut draws = 0;
    for (p, r) in pilot.into_iter().enumerate() {
        let (h, d) = r?;
        draws += d;
        if !h.is_empty() {
            active.push(p);
        }
    }
    let per = if active.is_empty() {
        0
    } else {
        cfg.samples.div_ceil(active.len())
    };
    let cap = per.saturating_mul(cfg.max_draw_factor);
    let results: Vec<Result<(usize, usize, Vec<Violation>)>> = active
        .par_iter()
        .map(|&p| {
            let (hits, d) = draw_pair(p, per, cap)?;
            let (j, a, b) = pairs[p];
            let la = &geo.zones(j)[a].lattice;
            let mut out = Vec::new();
            for x in &hits {
                if ext_hit(geo, x, la, cfg.resolution_fraction)? {
                    out.push(Violation {
                        kind: "disjointness".into(),
                        point: x.clone(),
                        lattice: la.id(),
                        other: Some(geo.zones(j)[b].lattice.id()),
                        value: None,
                    });
                }
            }
            Ok((hits.len(), d, out))
        })
        .collect();
    let mut tested = 0;
    let mut violations = Vec::new();
    for r in results {
        let (t, d, v) = r?;
        tested += t;
        draws += d;
        violations.extend(v);
    }
    Ok(FocusedSweep {
        epsilon: geo.schedule().epsilon,
        active_pairs: active.len(),
        pairs: pairs.len(),
        tested,
        draws,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    /// Smallest hierarchy factor found with zero violations.
    pub minimal: f64,
    /// `safety * minimal`.
    pub recommended: f64,
    /// `(hierarchy, violations)` for every evaluation.
    pub evaluations: Vec<(f64, usize)>,
}

/// Everything needed to build one geography per `epsilon`.
#[derive(Clone, Copy)]
pub struct GeographySetup<'a> {
    pub map: &'a dyn FrequencyMap,
    pub center: &'a [f64],
    pub params: &'a GeographyParams,
    pub epsilon0: f64,
    pub m: f64,
}

impl GeographySetup<'_> {
    pub fn schedule(&self, epsilon: f64, pf: &Prefactors) -> Result<Schedule> {
        schedule(epsilon, self.epsilon0, self.params, self.m, pf)
    }

    pub fn build(&self, epsilon: f64, pf: &Prefactors) -> Result<Geography<'_>> {
        Geography::new(self.map, self.center.to_vec(), self.schedule(epsilon, pf)?)
    }
}

/// Uniform plus focused sweep violations summed over `epsilons`.
pub fn count_violations(
    setup: &GeographySetup,
    epsilons: &[f64],
    pf: &Prefactors,
    cfg: &DisjointnessConfig,
) -> Result<usize> {
    let mut total = 0;
    for &e in epsilons {
        let geo = setup.build(e, pf)?;
        total += disjointness_sweep(&geo, cfg)?.violations.len();
        total += focused_disjointness(&geo, cfg)?.violations.len();
    }
    Ok(total)
}

/// Smallest hierarchy factor in `[1, upper]` removing every sampled
/// disjointness violation: a scan over `sqrt 2` steps, then bisection in
/// `log hierarchy` between the last violating and the first clean factor.
/// Violations are not monotone in the factor (very wide top-rank zones
/// overlap), so the recommended `safety * minimal` is evaluated as well and
/// replaced by `minimal` when it is not clean.
pub fn calibrate_hierarchy(
    setup: &GeographySetup,
    epsilons: &[f64],
    base: &Prefactors,
    cfg: &DisjointnessConfig,
    upper: f64,
    safety: f64,
) -> Result<CalibrationReport> {
    let mut evaluations = Vec::new();
    let mut eval = |g: f64| -> Result<usize> {
        let pf = Prefactors {
            hierarchy: g,
            ..base.clone()
        };
        let v = count_violations(setup, epsilons, &pf, cfg)?;
        evaluations.push((g, v));
        Ok(v)
    };
    let mut bad = None;
    let mut clean = None;
    let mut g = 1.0f64;
    while g <= upper * (1.0 + 1e-12) {
        if eval(g)? == 0 {
            clean = Some(g);
            break;
        }
        bad = Some(g);
        g *= std::f64::consts::SQRT_2;
    }
    let Some(mut hi) = clean else {
        return Err(NekError::Threshold(format!(
            "sampled violations persist for every hierarchy factor up to {upper}"
        )));
    };
    if let Some(lo) = bad {
        let (mut lo, mut h) = (lo.ln(), hi.ln());
        for _ in 0..6 {
            let mid = 0.5 * (lo + h);
            if eval(mid.exp())? == 0 {
                h = mid;
            } else {
                lo = mid;
            }
        }
        hi = h.exp();
    }
    let recommended = if eval(safety * hi)? == 0 { safety * hi } else { hi };
    Ok(CalibrationReport {
        minimal: hi,
        recommended,
        evaluations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallDivisorReport {
    pub samples: usize,
    /// Smallest `|k . omega| / alpha_L` over sampled block points and
    /// `k` outside the block lattice.
    pub min_ratio: f64,
    pub violations: Vec<Violation>,
}

/// `|k . omega(I)| >= alpha_L` for sampled `I` in `D_L cap B(I_0, R - rho)`
/// and every `k` with `|k|_1 <= K` outside `L`.
pub fn small_divisor_check(geo: &Geography, count: usize, seed: u64) -> Result<SmallDivisorReport> {
    let inner = geo.schedule().big_r - geo.schedule().rho;
    let n = geo.dim();
    let kmax = geo.schedule().k.floor() as i64;
    let short = super::lattice::short_vectors(n, kmax);
    let pts = sample_ball(geo.center(), inner, count, seed);
    let per: Vec<Result<(f64, Option<Violation>)>> = pts
        .par_iter()
        .map(|p| {
            let b = geo.classify(p)?;
            let l = b.lattice.clone().unwrap_or_else(|| Lattice::trivial(n));
            let alpha = geo.schedule().alpha_lattice(&l);
            let w = geo.map().omega(p);
            let mut worst = (f64::INFINITY, None);
            for k in short.iter().filter(|k| !l.contains(k)) {
                let d: f64 = k.iter().zip(&w).map(|(a, b)| *a as f64 * b).sum::<f64>().abs();
                if d / alpha < worst.0 {
                    worst = (d / alpha, Some(k.clone()));
                }
            }
            let v = (worst.0 < 1.0).then(|| Violation {
                kind: "small_divisor".into(),
                point: p.clone(),
                lattice: b.label(),
                other: worst.1.map(|k| format!("{k:?}")),
                value: Some(worst.0),
            });
            Ok((worst.0, v))
        })
        .collect();
    let mut min_ratio = f64::INFINITY;
    let mut violations = Vec::new();
    for r in per {
        let (ratio, v) = r?;
        min_ratio = min_ratio.min(ratio);
        violations.extend(v);
    }
    Ok(SmallDivisorReport {
        samples: count,
        min_ratio,
        violations,
    })
}

/// `{params, schedule, coverage, violations}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeographyReport {
    pub params: GeographyParams,
    pub schedule: Schedule,
    pub coverage: CoveringReport,
    pub violations: Vec<Violation>,
}

impl GeographyReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| NekError::Format(e.to_string()))
    }
}

/// Lattice list as JSON arrays of HNF matrices.
pub fn lattices_json(lattices: &[Lattice]) -> Result<String> {
    let m: Vec<&Vec<Vec<i64>>> = lattices.iter().map(|l| &l.basis).collect();
    serde_json::to_string(&m).map_err(|e| NekError::Format(e.to_string()))
}
