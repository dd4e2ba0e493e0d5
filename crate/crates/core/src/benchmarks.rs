//! Fixed test systems shared by the CLI, the demo and the acceptance suite.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::fourier::CoefficientTable;
use crate::frequency::PolyHamiltonian;
use crate::grid::Axis;
use crate::poly::Poly;
use crate::trig::MultiIndex;

/// Harmonic lines of the finite-regularity family: the coordinate
/// directions plus `(1,..,1)` when `n >= 2`.
fn family_lines(n: usize) -> Vec<MultiIndex> {
    let mut lines: Vec<MultiIndex> = (0..n).map(|j| MultiIndex::unit(n, j)).collect();
    if n >= 2 {
        lines.push(MultiIndex(vec![1; n]));
    }
    lines
}

/// Action profile multiplying every harmonic of the family.
pub fn family_profile(x: &[f64]) -> f64 {
    x.iter().map(|v| 1.0 + 0.3 * v - 0.2 * v * v).product()
}

/// `f(I, theta) = p(I) sum_lines sum_{m <= modes} m^{-(ell+1)} cos(m k.theta)`
/// sampled as Fourier coefficients on `nodes` action points per axis over
/// `B_inf(0, 2 radius)`. Each line has regularity exactly `ell` in the
/// Zygmund sense.
pub fn regularity_family(
    n: usize,
    ell: f64,
    modes: usize,
    nodes: usize,
    radius: f64,
) -> Result<CoefficientTable> {
    if n == 0 || modes == 0 {
        return domain("family needs n >= 1 and at least one mode");
    }
    let axes: Vec<Axis> = (0..n)
        .map(|_| Axis::bounded(-2.0 * radius, 2.0 * radius, nodes))
        .collect();
    let total: usize = axes.iter().map(|a| a.nodes).product();
    let profile: Vec<f64> = (0..total)
        .map(|f| {
            let x: Vec<f64> = crate::grid::unravel(f, &axes)
                .iter()
                .zip(&axes)
                .map(|(&i, a)| a.coord(i))
                .collect();
            family_profile(&x)
        })
        .collect();
    let mut coeffs: BTreeMap<MultiIndex, Vec<Complex64>> = BTreeMap::new();
    for line in family_lines(n) {
        for m in 1..=modes as i64 {
            let amp = 0.5 * (m as f64).powf(-(ell + 1.0));
            for sign in [1, -1] {
                let k = MultiIndex(line.0.iter().map(|v| sign * m * v).collect());
                let e = coeffs
                    .entry(k)
                    .or_insert_with(|| vec![Complex64::default(); total]);
                for (c, p) in e.iter_mut().zip(&profile) {
                    *c += amp * p;
                }
            }
        }
    }
    CoefficientTable::new(n, axes, coeffs)
}

fn power(n: usize, j: usize, e: u32, c: f64) -> Poly {
    Poly::var(n, j).pow(e).scale_re(c)
}

/// `|I|^2 / 2` in `n` actions on `B_inf(center, radius)`.
pub fn convex(n: usize, center: Vec<f64>, radius: f64) -> Result<PolyHamiltonian> {
    let h = (0..n).fold(Poly::zero(n), |acc, j| acc + power(n, j, 2, 0.5));
    PolyHamiltonian::new(h, center, radius)
}

/// `|I|^2 / 2` for `n = 3` on `B_inf((1,1,1), 0.6)`, away from `omega = 0`.
pub fn convex3() -> PolyHamiltonian {
    convex(3, vec![1.0; 3], 0.6).expect("valid benchmark")
}

/// `(I_1^2 - I_2^2) / 2` on `B_inf(0, 1.1)`: the lines `|I_1| = |I_2|`
/// carry channels along which `omega` stays orthogonal to `(1, -1)`.
pub fn superconductivity() -> PolyHamiltonian {
    let h = power(2, 0, 2, 0.5) + power(2, 1, 2, -0.5);
    PolyHamiltonian::new(h, vec![0.0, 0.0], 1.1).expect("valid benchmark")
}

/// `I_1^2/2 + I_2^4/4 + I_3^2/2` on `B_inf((1,0,0), 0.6)`; steep with
/// index 3 in the `I_2` direction on the plane `I_2 = 0`.
pub fn quartic_steep() -> PolyHamiltonian {
    let h = power(3, 0, 2, 0.5) + power(3, 1, 4, 0.25) + power(3, 2, 2, 0.5);
    PolyHamiltonian::new(h, vec![1.0, 0.0, 0.0], 0.6).expect("valid benchmark")
}

/// Names accepted by [`hamiltonian`].
pub const HAMILTONIANS: [&str; 3] = ["convex3", "superconductivity", "quartic-steep"];

pub fn hamiltonian(name: &str) -> Result<PolyHamiltonian> {
    match name {
        "convex3" => Ok(convex3()),
        "superconductivity" => Ok(superconductivity()),
        "quartic-steep" => Ok(quartic_steep()),
        other => domain(format!("unknown benchmark {other:?}; known: {HAMILTONIANS:?}")),
    }
}

/// A normal-form problem: `h + f` near the resonance `lattice`.
#[derive(Debug, Clone)]
pub struct NormalFormBenchmark {
    pub h: PolyHamiltonian,
    pub f: crate::trig::TrigPoly,
    pub lattice: crate::geography::Lattice,
    pub thresholds: crate::normalform::Thresholds,
}

/// Default amplitudes of the two normal-form benchmarks; the smallness
/// threshold `eps <= alpha rho' / (256 xi K)` forces them this low.
pub const ONE_DOF_AMPLITUDE: f64 = 1e-6;
pub const TWO_DOF_AMPLITUDE: f64 = 2e-7;

/// `I^2/2 + amp cos theta` on `[1, 2]`, no resonance, `K = 1`, `sigma = 6`.
pub fn normalform_one_dof(amp: f64) -> NormalFormBenchmark {
    NormalFormBenchmark {
        h: convex(1, vec![1.5], 0.5).expect("valid benchmark"),
        f: crate::trig::TrigPoly::cos(&[1], amp),
        lattice: crate::geography::Lattice::trivial(1),
        thresholds: crate::normalform::Thresholds {
            epsilon: 4.5e-4,
            alpha: 0.5,
            rho: 0.25,
            rho_prime: 0.24,
            sigma: 6.0,
            k: 1.0,
            xi: 1.01,
            m: 1.0,
        },
    }
}

/// `|I|^2/2 + amp (cos(theta_1 - theta_2) + cos theta_1)` on
/// `B_inf((1,1), 0.2)` modulo `span(1, -1)`, `K = 2`, `sigma = 3`.
pub fn normalform_two_dof(amp: f64) -> NormalFormBenchmark {
    use crate::trig::TrigPoly;
    NormalFormBenchmark {
        h: convex(2, vec![1.0, 1.0], 0.2).expect("valid benchmark"),
        f: TrigPoly::cos(&[1, -1], amp)
            .add(&TrigPoly::cos(&[1, 0], amp))
            .expect("same dimension"),
        lattice: crate::geography::Lattice::saturate(2, &[vec![1, -1]]).expect("primitive"),
        thresholds: crate::normalform::Thresholds {
            epsilon: 1.1e-4,
            alpha: 0.6,
            rho: 0.1,
            rho_prime: 0.1,
            sigma: 3.0,
            k: 2.0,
            xi: 1.01,
            m: 1.0,
        },
    }
}

/// Names accepted by [`normalform_benchmark`].
pub const NORMALFORM_BENCHMARKS: [&str; 2] = ["one-dof", "two-dof"];

pub fn normalform_benchmark(name: &str, amp: Option<f64>) -> Result<NormalFormBenchmark> {
    match name {
        "one-dof" => Ok(normalform_one_dof(amp.unwrap_or(ONE_DOF_AMPLITUDE))),
        "two-dof" => Ok(normalform_two_dof(amp.unwrap_or(TWO_DOF_AMPLITUDE))),
        other => domain(format!(
            "unknown normal-form benchmark {other:?}; known: {NORMALFORM_BENCHMARKS:?}"
        )),
    }
}
