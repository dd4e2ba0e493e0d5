mod common;

use std::f64::consts::{LN_2, PI};

use neklab::norms::{fourier_decay_check, strip_sup_norm};
use neklab::poly::Poly;
use neklab::{
    fourier_coefficients, holder_norm_estimate, weighted_fourier_norm, Axis, DomainSpec,
    GridFunction, MultiIndex, NekError, TrigPoly,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn mi(v: &[i64]) -> MultiIndex {
    MultiIndex(v.to_vec())
}

#[test]
fn cosine_coefficients() {
    let f = GridFunction::from_fn(vec![Axis::angle(32)], |x| x[0].cos()).unwrap();
    let t = fourier_coefficients(&f, 8).unwrap();
    assert_eq!(t.len(), 2);
    assert!((t.get(&mi(&[1])).unwrap()[0] - 0.5).norm() < 1e-15);
    assert!((t.get(&mi(&[-1])).unwrap()[0] - 0.5).norm() < 1e-15);
}

#[test]
fn constant_coefficients() {
    let f = GridFunction::from_fn(vec![Axis::angle(16)], |_| 3.0).unwrap();
    let t = fourier_coefficients(&f, 4).unwrap();
    assert_eq!(t.len(), 1);
    assert!((t.get(&mi(&[0])).unwrap()[0] - 3.0).norm() < 1e-15);
}

#[test]
fn product_to_sum_coefficients() {
    let f = GridFunction::from_fn(vec![Axis::angle(16), Axis::angle(16)], |x| {
        x[0].sin() * x[1].cos()
    })
    .unwrap();
    let t = fourier_coefficients(&f, 4).unwrap();
    let quarter = Complex64::new(0.0, -0.25);
    assert_eq!(t.len(), 4);
    for k in [[1, 1], [1, -1]] {
        let c = t.get(&mi(&k)).unwrap()[0];
        assert!((c - quarter).norm() < 1e-15, "{k:?}: {c}");
        let c = t.get(&mi(&[-k[0], -k[1]])).unwrap()[0];
        assert!((c - quarter.conj()).norm() < 1e-15);
    }
    // Quadrature oracle on a finer midpoint grid.
    let m = 200;
    let h = 2.0 * PI / m as f64;
    let mut q = Complex64::default();
    for a in 0..m {
        for b in 0..m {
            let (x, y) = ((a as f64 + 0.5) * h, (b as f64 + 0.5) * h);
            q += x.sin() * y.cos() * Complex64::from_polar(1.0, -(x + y));
        }
    }
    q *= h * h / (4.0 * PI * PI);
    assert!((q - quarter).norm() < 1e-12);
}

#[test]
fn fourier_errors() {
    let f = GridFunction::from_fn(vec![Axis::angle(9)], |x| x[0].cos()).unwrap();
    assert!(matches!(fourier_coefficients(&f, 4), Err(NekError::Resolution(_))));
    let f = GridFunction::from_fn(vec![Axis::bounded(0.0, 1.0, 16)], |x| x[0]).unwrap();
    assert!(matches!(fourier_coefficients(&f, 2), Err(NekError::Domain(_))));
}

#[test]
fn action_dependent_coefficients() {
    let f = GridFunction::from_fn(vec![Axis::bounded(-1.0, 1.0, 5), Axis::angle(8)], |x| {
        x[0] * (2.0 * x[1]).cos()
    })
    .unwrap();
    let t = fourier_coefficients(&f, 3).unwrap();
    let c = t.get(&mi(&[2])).unwrap();
    for (a, v) in c.iter().enumerate() {
        assert!((v.re - 0.5 * t.action_point(a)[0]).abs() < 1e-15);
    }
}

#[test]
fn weighted_norm_examples() {
    let g = TrigPoly::cos(&[1], 1.0);
    let dom = DomainSpec::new(vec![0.0], 1.0, 0.0, 0.0).unwrap();
    assert!((weighted_fourier_norm(&g, &dom, 0.0, 3).unwrap() - 1.0).abs() < 1e-15);
    assert!((weighted_fourier_norm(&g, &dom, LN_2, 3).unwrap() - 2.0).abs() < 1e-14);
    assert!(matches!(
        weighted_fourier_norm(&g, &dom, 0.0, 0),
        Err(NekError::Domain(_))
    ));
}

#[test]
fn holder_examples() {
    let f = GridFunction::from_fn(vec![Axis::bounded(0.0, 1.0, 17)], |_| 2.5).unwrap();
    for ell in [0.3, 1.0, 2.7] {
        assert!((holder_norm_estimate(&f, ell).unwrap().value - 2.5).abs() < 1e-12);
    }
    let f = GridFunction::from_fn(vec![Axis::angle(1024)], |x| x[0].cos()).unwrap();
    let r = holder_norm_estimate(&f, 1.0).unwrap();
    assert!((r.value - 1.0).abs() < 1e-4, "{}", r.value);
    assert!(r.error_estimate.is_some());
    assert!(matches!(holder_norm_estimate(&f, 0.0), Err(NekError::Domain(_))));
}

#[test]
fn holder_square_root() {
    // sup |f| = 1 and the quotient |sqrt|x| - sqrt|y|| / |x - y|^{1/2}
    // peaks at 1 on pairs containing the origin; antipodal pairs give 0.
    let f = GridFunction::from_fn(vec![Axis::bounded(-1.0, 1.0, 201)], |x| x[0].abs().sqrt())
        .unwrap();
    let v = holder_norm_estimate(&f, 0.5).unwrap().value;
    assert!((v - 2.0).abs() < 1e-9, "{v}");
    // Brute-force pairwise oracle on a refined grid.
    let m = 801;
    let xs: Vec<f64> = (0..m).map(|i| -1.0 + 2.0 * i as f64 / (m - 1) as f64).collect();
    let mut best: f64 = 0.0;
    for &x in &xs {
        for &y in &xs {
            let d = (x - y).abs();
            if d > 0.0 && d < 1.0 {
                best = best.max((x.abs().sqrt() - y.abs().sqrt()).abs() / d.sqrt());
            }
        }
    }
    assert!((best - 1.0).abs() < 1e-9);
}

#[test]
fn bracket_examples() {
    let h = TrigPoly::from_poly(Poly::var(1, 0));
    let mut e = TrigPoly::zero(1);
    e.add_harmonic(mi(&[1]), Poly::constant(1, 1.0));
    let b = h.poisson_bracket(&e).unwrap();
    assert_eq!(b.len(), 1);
    assert!((b.coeff(&mi(&[1])).unwrap().coeff(&[0]) - Complex64::i()).norm() < 1e-15);

    let p2 = Poly::var(2, 0).pow(2).scale_re(0.5) + Poly::var(2, 1).pow(2).scale_re(0.5);
    let h = TrigPoly::from_poly(p2);
    let g = TrigPoly::cos(&[1, -1], 1.0);
    let b = h.poisson_bracket(&g).unwrap();
    let diff = Poly::var(2, 0) - Poly::var(2, 1);
    let mut want = TrigPoly::zero(2);
    for (k, c) in [([1, -1], 0.5), ([-1, 1], -0.5)] {
        want.add_harmonic(mi(&k), diff.scale(Complex64::new(0.0, c)));
    }
    // -(I1 - I2) sin(theta1 - theta2).
    assert!(common::max_coeff_diff(&b, &want) < 1e-15);
    let v = b.evaluate(&[1.3, 0.2], &[0.7, 0.1]).unwrap();
    assert!((v + 1.1 * 0.6f64.sin()).abs() < 1e-14);
    assert!(h.poisson_bracket(&TrigPoly::zero(3)).is_err());
}

#[test]
fn evaluate_examples() {
    let g = TrigPoly::cos(&[1], 1.0);
    assert_eq!(g.evaluate(&[0.0], &[0.0]).unwrap(), 1.0);
    assert!(g.evaluate(&[0.0], &[PI / 2.0]).unwrap().abs() < 1e-15);
    assert!(g.evaluate(&[0.0, 1.0], &[0.0]).is_err());
}

#[test]
fn trigpoly_json_roundtrip() {
    let g = TrigPoly::cos(&[1, 2], 0.5)
        .add(&TrigPoly::from_poly(Poly::var(2, 1).pow(3)))
        .unwrap();
    let s = g.to_json().unwrap();
    assert!(s.contains("\"schema\""));
    assert_eq!(TrigPoly::from_json(&s).unwrap(), g);
}

#[test]
fn decay_check_examples() {
    let f = GridFunction::from_fn(vec![Axis::angle(256)], |x| x[0].cos()).unwrap();
    let r = fourier_decay_check(&f, 1.0).unwrap();
    // |f_{+-1}| = 1/2 against ||cos||_{C^1} = 1.
    assert_eq!(r.ratios.len(), 2);
    assert!((r.max_ratio_linf - 0.5).abs() < 1e-4);

    let f = GridFunction::from_fn(vec![Axis::angle(512)], |x| {
        (1..=32).map(|k| (k as f64).powi(-3) * (k as f64 * x[0]).cos()).sum()
    })
    .unwrap();
    let r = fourier_decay_check(&f, 1.0).unwrap();
    for (k, ri, _) in &r.ratios {
        let kk = k[0].unsigned_abs() as f64;
        let want = 0.5 * kk.powi(-2) / r.ck_norm;
        assert!((ri - want).abs() < 1e-10, "{k:?}");
    }
    assert!(r.max_ratio_linf < 1.0);

    // Triangle wave, Lipschitz: coefficients 2/(pi k^2) on odd k.
    let tri = |t: f64| (PI - (t - PI).abs()) - PI / 2.0;
    let f = GridFunction::from_fn(vec![Axis::angle(1024)], |x| tri(x[0])).unwrap();
    let r = fourier_decay_check(&f, 1.0).unwrap();
    assert!(r.max_ratio_linf.is_finite() && r.max_ratio_linf < 1.0);

    // A jump is not C^1.
    let f = GridFunction::from_fn(vec![Axis::angle(1024)], |x| if x[0] < PI { 1.0 } else { -1.0 })
        .unwrap();
    assert!(matches!(fourier_decay_check(&f, 1.0), Err(NekError::Regularity(_))));
}

#[test]
fn holder_monotone_in_ell() {
    let f = GridFunction::from_fn(vec![Axis::angle(256)], |x| (x[0].sin()).powi(3) + 0.2 * x[0].cos())
        .unwrap();
    let v = |ell: f64| holder_norm_estimate(&f, ell).unwrap().value;
    // Monotone within a fixed integer part: the quotient grows with the
    // exponent because pairs are closer than 1.
    for q in [0.0, 1.0, 2.0] {
        let mut last = 0.0;
        for mu in [0.0, 0.25, 0.5, 0.75] {
            if q + mu == 0.0 {
                continue;
            }
            let x = v(q + mu);
            assert!(x + 1e-12 >= last, "ell {}: {x} < {last}", q + mu);
            last = x;
        }
    }
    // Across integer parts only a factor 2 survives: the C^q sup and the
    // order-q quotient are both bounded by the C^{q+1} norm.
    let lo = v(0.5);
    let hi = v(1.0);
    assert!(lo > hi, "this sample separates the two");
    assert!(lo <= 2.0 * hi);
    for (a, b) in [(0.75, 1.25), (1.5, 2.0), (1.75, 2.5)] {
        assert!(v(a) <= 2.0 * v(b) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evaluation_matches_naive_sum(
        g in common::trigpoly(2, 3, 2),
        i in proptest::collection::vec(-1.0f64..1.0, 2),
        th in proptest::collection::vec(0.0f64..6.3, 2),
    ) {
        let raw = g.evaluate_raw(&i, &th).unwrap();
        let want = common::naive_eval(&g, &i, &th);
        prop_assert!((raw - want).norm() < 1e-12);
        prop_assert!(raw.im.abs() < 1e-12 * g.coefficient_mass().max(1.0));
    }

    #[test]
    fn bracket_is_antisymmetric_and_leibniz(
        f in common::trigpoly(2, 2, 2),
        g in common::trigpoly(2, 2, 1),
        h in common::trigpoly(2, 1, 1),
    ) {
        let fg = f.poisson_bracket(&g).unwrap();
        let gf = g.poisson_bracket(&f).unwrap();
        prop_assert!(common::max_coeff_diff(&fg, &gf.scale(-1.0)) < 1e-10);
        prop_assert!(f.poisson_bracket(&f).unwrap().len() == 0
            || common::max_coeff_diff(&f.poisson_bracket(&f).unwrap(), &TrigPoly::zero(2)) < 1e-12);
        let lhs = f.poisson_bracket(&g.mul(&h).unwrap()).unwrap();
        let rhs = fg.mul(&h).unwrap().add(&g.mul(&f.poisson_bracket(&h).unwrap()).unwrap()).unwrap();
        prop_assert!(common::max_coeff_diff(&lhs, &rhs) < 1e-10);
    }

    #[test]
    fn bracket_satisfies_jacobi(
        f in common::trigpoly(2, 1, 2),
        g in common::trigpoly(2, 1, 1),
        h in common::trigpoly(2, 1, 1),
    ) {
        let a = f.poisson_bracket(&g.poisson_bracket(&h).unwrap()).unwrap();
        let b = g.poisson_bracket(&h.poisson_bracket(&f).unwrap()).unwrap();
        let c = h.poisson_bracket(&f.poisson_bracket(&g).unwrap()).unwrap();
        let sum = a.add(&b).unwrap().add(&c).unwrap();
        prop_assert!(common::max_coeff_diff(&sum, &TrigPoly::zero(2)) < 1e-10);
    }

    #[test]
    fn sampled_coefficients_reconstruct(g in common::trigpoly(2, 3, 0)) {
        let m = 8;
        let f = GridFunction::from_fn(vec![Axis::angle(m), Axis::angle(m)], |x| {
            g.evaluate(&[0.0, 0.0], x).unwrap()
        }).unwrap();
        let t = fourier_coefficients(&f, 3).unwrap();
        for flat in 0..f.len() {
            let th = f.point(flat);
            prop_assert!((t.evaluate(0, &th) - f.values()[flat]).abs() < 1e-10);
        }
    }

    #[test]
    fn sup_below_weighted_norm(g in common::trigpoly(1, 4, 1), s in 0.0f64..0.5) {
        let dom = DomainSpec::new(vec![0.0], 1.0, 0.1, s).unwrap();
        let sup = strip_sup_norm(&g, &dom, s, 5, 64).unwrap();
        let w = weighted_fourier_norm(&g, &dom, s, 5).unwrap();
        prop_assert!(sup <= w * (1.0 + 1e-12) + 1e-14);
    }
}

#[test]
fn norm_chain_with_cauchy_bound() {
    // |g|_{r,s} <= ||g||_{r,s} <= coth^n(sigma) |g|_{r,s+sigma}, sigma = 1/2.
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let mut runner = TestRunner::deterministic();
    let sigma: f64 = 0.5;
    for trial in 0..6 {
        let n = 1 + trial % 2;
        let g = common::trigpoly(n, 4, 1).new_tree(&mut runner).unwrap().current();
        if g.is_zero() {
            continue;
        }
        let s = 0.3;
        let dom = DomainSpec::new(vec![0.0; n], 1.0, 0.05, s).unwrap();
        let lo = strip_sup_norm(&g, &dom, s, 3, 64).unwrap();
        let mid = weighted_fourier_norm(&g, &dom, s, 3).unwrap();
        let hi = strip_sup_norm(&g, &dom, s + sigma, 3, 64).unwrap();
        let coth = 1.0 / sigma.tanh();
        assert!(lo <= mid * (1.0 + 1e-12), "trial {trial}: {lo} > {mid}");
        assert!(mid <= coth.powi(n as i32) * hi, "trial {trial}: {mid} > coth^n {hi}");
    }
}
