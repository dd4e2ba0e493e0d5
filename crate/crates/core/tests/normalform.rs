use std::f64::consts::E;

use neklab::benchmarks::{normalform_one_dof, normalform_two_dof};
use neklab::frequency::PolyHamiltonian;
use neklab::geography::{geography_params, schedule, Lattice, Prefactors};
use neklab::normalform::*;
use neklab::poly::Poly;
use neklab::trig::{MultiIndex, TrigPoly};
use neklab::NekError;
use num_complex::Complex64;

fn lat(gens: &[&[i64]]) -> Lattice {
    let n = gens[0].len();
    Lattice::saturate(n, &gens.iter().map(|g| g.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn one_dof() -> PolyHamiltonian {
    normalform_one_dof(1e-6).h
}

fn one_dof_thresholds() -> Thresholds {
    normalform_one_dof(1e-6).thresholds
}

fn two_dof() -> PolyHamiltonian {
    normalform_two_dof(2e-7).h
}

fn two_dof_thresholds() -> Thresholds {
    normalform_two_dof(2e-7).thresholds
}

fn two_dof_f(amp: f64) -> TrigPoly {
    normalform_two_dof(amp).f
}

fn mixed() -> TrigPoly {
    let mut f = TrigPoly::zero(2);
    for k in [[1, -1], [2, -2], [3, -3], [1, 0], [0, 2], [1, 1], [0, 0]] {
        let p = Poly::var(2, 0).scale_re(0.1 * (k[0] + 2 * k[1]) as f64) + Poly::constant(2, 1.0);
        f.add_harmonic(MultiIndex(k.to_vec()), p);
    }
    f
}

#[test]
fn projector_algebra() {
    let l = lat(&[&[1, -1]]);
    let f = mixed();
    let p = project_resonant(&f, &l, 4.0);
    let kept: Vec<Vec<i64>> = p.harmonics().map(|k| k.0.clone()).collect();
    assert_eq!(kept, vec![vec![-1, 1], vec![-2, 2], vec![0, 0], vec![1, -1], vec![2, -2]]
        .into_iter()
        .filter(|k| f.coeff(&MultiIndex(k.clone())).is_some())
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect::<Vec<_>>());
    // Idempotent, commuting, and a set filter of the input table.
    assert_eq!(project_resonant(&p, &l, 4.0), p);
    assert_eq!(f.truncate_l1(4.0).filter(|k| l.contains(&k.0)), p);
    assert_eq!(f.filter(|k| l.contains(&k.0)).truncate_l1(4.0), p);
    for (k, c) in p.terms() {
        assert_eq!(f.coeff(k), Some(c));
    }
    let only_res = TrigPoly::cos(&[1, -1], 0.3);
    assert_eq!(project_resonant(&only_res, &l, 2.0), only_res);
    assert!(project_resonant(&TrigPoly::cos(&[1, 0], 0.3), &l, 2.0).is_zero());
    let dom = neklab::DomainSpec::new(vec![1.0, 1.0], 0.2, 0.1, 0.5).unwrap();
    let nf = neklab::weighted_fourier_norm(&f, &dom, 0.5, 3).unwrap();
    let np = neklab::weighted_fourier_norm(&p, &dom, 0.5, 3).unwrap();
    assert!(np <= nf);
}

#[test]
fn threshold_examples() {
    let mut t = one_dof_thresholds();
    t.epsilon = 0.0;
    assert!(check_thresholds(&t).pass);
    t.k = 1.0;
    t.sigma = 5.9;
    let r = check_thresholds(&t);
    assert!(!r.pass);
    assert!((r.cutoff_margin - 5.9 / 6.0).abs() < 1e-15);
    let mut bad = one_dof_thresholds();
    bad.xi = 1.0;
    assert!(!check_thresholds(&bad).valid);
    assert!(check_thresholds(&one_dof_thresholds()).pass);
    assert!(check_thresholds(&two_dof_thresholds()).pass);
}

/// At `eps / eps0 = e^-6` the convex n = 3 schedule gives `K = e` and
/// `s <= 1`, so `K sigma <= e < 6`: the cutoff condition cannot hold for
/// any prefactors. The other two margins are reachable by choice of
/// `eps0`.
#[test]
fn schedule_thresholds_at_e_minus_six() {
    let params = geography_params(3, &[1.0, 1.0], 4.0).unwrap();
    let pf = Prefactors::default();
    let probe = schedule(E.powi(-6), 1.0, &params, 1.0, &pf).unwrap();
    assert!((probe.k - E).abs() < 1e-12);
    let trivial = Lattice::trivial(3);
    let alpha = probe.alpha_lattice(&trivial);
    let (xi, m) = (1.01, 1.0);
    let rho_prime = probe.r.min(alpha / (2.0 * xi * m * probe.k));
    let eps = alpha * rho_prime / (256.0 * xi * probe.k);
    let sched = schedule(eps, eps * E.powi(6), &params, m, &pf).unwrap();
    let t = Thresholds {
        epsilon: eps,
        alpha: sched.alpha_lattice(&trivial),
        rho: sched.r,
        rho_prime,
        sigma: sched.s,
        k: sched.k,
        xi,
        m,
    };
    let r = check_thresholds(&t);
    assert!(r.epsilon_margin >= 1.0 - 1e-12, "{r:?}");
    assert!(r.rho_margin >= 1.0 - 1e-12, "{r:?}");
    assert!(r.cutoff_margin <= E / 6.0 + 1e-12);
    assert!(!r.pass);
}

#[test]
fn homological_one_dof() {
    let h = one_dof();
    let eps = 1e-3;
    let l = Lattice::trivial(1);
    let f = TrigPoly::cos(&[1], eps);
    // 1/I is not polynomial: least squares at degree 14 on [0.75, 2.25].
    let gen = solve_homological(&h, &f, &l, 1.0, 0.25, 0.5, 14).unwrap();
    assert_eq!(gen.fitted_harmonics, 2);
    assert!(gen.residual < 1e-8 * eps, "{}", gen.residual);
    // chi = (eps / I) sin theta.
    for &i in &[1.0, 1.3, 1.7, 2.0] {
        for &th in &[0.0, 0.4, 2.0, 5.0] {
            let v = gen.chi.evaluate(&[i], &[th]).unwrap();
            assert!((v - eps * th.sin() / i).abs() < 1e-8 * eps);
        }
    }
    let ht = TrigPoly::from_poly(h.poly().clone());
    let b = ht.poisson_bracket(&gen.chi).unwrap();
    for &i in &[1.1, 1.9] {
        for &th in &[0.3, 2.5] {
            let v = b.evaluate(&[i], &[th]).unwrap();
            assert!((v - eps * th.cos()).abs() < 1e-8 * eps);
        }
    }
    let zero = solve_homological(&h, &TrigPoly::zero(1), &l, 1.0, 0.25, 0.5, 10).unwrap();
    assert!(zero.chi.is_zero());
}

#[test]
fn homological_linear_and_exact() {
    // Angle-independent frequencies divide exactly.
    let h = PolyHamiltonian::new(
        Poly::var(2, 0).scale_re(1.0) + Poly::var(2, 1).scale_re(std::f64::consts::SQRT_2),
        vec![0.0, 0.0],
        1.0,
    )
    .unwrap();
    let l = Lattice::trivial(2);
    let a = TrigPoly::cos(&[1, 0], 0.1);
    let b = TrigPoly::sin(&[1, 1], 0.2);
    let ga = solve_homological(&h, &a, &l, 2.0, 0.1, 0.5, 4).unwrap();
    let gb = solve_homological(&h, &b, &l, 2.0, 0.1, 0.5, 4).unwrap();
    let gab = solve_homological(&h, &a.add(&b).unwrap(), &l, 2.0, 0.1, 0.5, 4).unwrap();
    assert_eq!(gab.fitted_harmonics, 0);
    assert_eq!(gab.chi, ga.chi.add(&gb.chi).unwrap());
    assert!(gab.residual < 1e-15);
}

#[test]
fn homological_errors() {
    let h = one_dof();
    let l = Lattice::trivial(1);
    // Box [1, 2] widened by 0.25 reaches I = 0.75.
    match solve_homological(&h, &TrigPoly::cos(&[1], 1e-3), &l, 1.0, 0.25, 0.8, 6) {
        Err(NekError::SmallDivisor { k, value, .. }) => {
            assert_eq!(k.len(), 1);
            assert!((value - 0.75).abs() < 0.01);
        }
        other => panic!("{other:?}"),
    }
    let two = two_dof();
    let res = lat(&[&[1, -1]]);
    assert!(matches!(
        solve_homological(&two, &TrigPoly::cos(&[1, -1], 1e-3), &res, 2.0, 0.1, 0.5, 4),
        Err(NekError::Domain(_))
    ));
    assert!(matches!(
        solve_homological(&two, &TrigPoly::cos(&[2, 1], 1e-3), &res, 2.0, 0.1, 0.5, 4),
        Err(NekError::Domain(_))
    ));
}

#[test]
fn resonant_input_is_left_alone() {
    let h = two_dof();
    let l = lat(&[&[1, -1]]);
    let f = TrigPoly::cos(&[1, -1], 2e-7);
    let t = two_dof_thresholds();
    let r = normalize(&h, &f, &l, &t, &NormalizeConfig::default()).unwrap();
    assert_eq!(r.g, f);
    assert!(r.remainder.is_zero());
    assert!(r.generators.is_empty());
    let cfg = VerifyConfig { probes: 8, ..Default::default() };
    let v = verify_normalform(&r, &h, &f, &t, &cfg).unwrap();
    assert!(v.energy_defect <= 1e-12);
    assert!(v.action_ratio <= 1e-12 && v.angle_ratio <= 1e-12);
    assert!(v.symplectic_defect <= 1e-12, "{}", v.symplectic_defect);
    assert!(v.resonant_support && v.generator_support);
}

#[test]
fn normalize_one_dof() {
    let h = one_dof();
    let t = one_dof_thresholds();
    let l = Lattice::trivial(1);
    let amp = 1e-6;
    let f = TrigPoly::cos(&[1], amp);
    let r = normalize(&h, &f, &l, &t, &NormalizeConfig::default()).unwrap();
    let d = &r.diagnostics;
    assert_eq!(d.steps_taken, 1);
    // Degree-capped terms keep the series norm honest, so it stops early.
    assert!(d.series_orders[0] < NormalizeConfig::default().series_order, "{d:?}");
    assert!(d.f_norm <= t.epsilon);
    assert!(d.remainder_factor <= 10.0, "{d:?}");
    assert!(d.g_shift_factor <= 1.0, "{d:?}");
    // Second-order oracle: g = eps^2 / (4 I^2) with no angle dependence.
    assert_eq!(r.g.harmonics().map(|k| k.0.clone()).collect::<Vec<_>>(), vec![vec![0]]);
    for &i in &[1.0, 1.25, 1.5, 2.0] {
        let v = r.g.evaluate(&[i], &[0.0]).unwrap();
        let want = amp * amp / (4.0 * i * i);
        assert!((v - want).abs() < 1e-5 * want, "{v} vs {want}");
    }
    // The first harmonic is gone to second order.
    let dom = neklab::DomainSpec::new(vec![1.5], 0.5, 0.0, 0.0).unwrap();
    let nr = project_nonresonant(&r.remainder, &l, 1.0);
    assert!(neklab::weighted_fourier_norm(&nr, &dom, 0.0, 9).unwrap() < amp * amp);

    let cfg = VerifyConfig::default();
    let v = verify_normalform(&r, &h, &f, &t, &cfg).unwrap();
    assert!(v.energy_defect < 1e-14, "{v:?}");
    assert!(v.displacements_ok(), "{v:?}");
    assert!(v.symplectic_defect <= 1e-6, "{v:?}");
    assert!(v.resonant_support && v.generator_support);

    let json = r.to_json().unwrap();
    let back = NormalFormResult::from_json(&json).unwrap();
    assert_eq!(back.g, r.g);
    assert_eq!(back.generators, r.generators);
    assert_eq!(back.diagnostics, r.diagnostics);
}

#[test]
fn g_shift_is_quadratic() {
    let h = one_dof();
    let t = one_dof_thresholds();
    let l = Lattice::trivial(1);
    let shift = |amp: f64| {
        normalize(&h, &TrigPoly::cos(&[1], amp), &l, &t, &NormalizeConfig::default())
            .unwrap()
            .diagnostics
            .g_shift_norm
    };
    let (a, b) = (shift(1e-6), shift(5e-7));
    assert!((3.5..=4.5).contains(&(a / b)), "{a} / {b} = {}", a / b);
}

#[test]
fn normalize_two_dof() {
    let h = two_dof();
    let t = two_dof_thresholds();
    let l = lat(&[&[1, -1]]);
    let amp = 2e-7;
    let f = two_dof_f(amp);
    let r = normalize(&h, &f, &l, &t, &NormalizeConfig::default()).unwrap();
    let d = &r.diagnostics;
    assert!(d.remainder_factor <= 10.0, "{d:?}");
    let c = r.g.coeff(&MultiIndex(vec![1, -1])).unwrap();
    assert!((c.coeff(&[0, 0]) - Complex64::new(amp / 2.0, 0.0)).norm() < 1e-3 * amp);
    assert!(r.g.harmonics().all(|k| l.contains(&k.0) && k.l1() <= 2));
    let dom = neklab::DomainSpec::new(vec![1.0, 1.0], 0.2, 0.0, 0.0).unwrap();
    let nr = project_nonresonant(&r.remainder, &l, 2.0);
    assert!(neklab::weighted_fourier_norm(&nr, &dom, 0.0, 5).unwrap() < 10.0 * amp * amp);

    let v = verify_normalform(&r, &h, &f, &t, &VerifyConfig::default()).unwrap();
    assert!(v.energy_defect < 1e-14, "{v:?}");
    assert!(v.displacements_ok(), "{v:?}");
    assert!(v.symplectic_defect <= 1e-6, "{v:?}");
    assert!(v.resonant_support && v.generator_support);

    // {h, g} vanishes on the slice I_1 = I_2.
    let states: Vec<Vec<f64>> = (0..12)
        .map(|j| {
            let s = 0.85 + 0.025 * j as f64;
            vec![s, s, 0.3 * j as f64, 1.0 - 0.2 * j as f64]
        })
        .collect();
    assert!(commutator_on(&h, &r.g, &states).unwrap() <= 1e-10);
    let off = vec![vec![1.1, 0.9, 0.3, 1.2]];
    assert!(commutator_on(&h, &r.g, &off).unwrap() > 0.0);
}

#[test]
fn refusals() {
    let h = one_dof();
    let l = Lattice::trivial(1);
    let mut t = one_dof_thresholds();
    t.sigma = 5.9;
    assert!(matches!(
        normalize(&h, &TrigPoly::cos(&[1], 1e-6), &l, &t, &NormalizeConfig::default()),
        Err(NekError::Threshold(_))
    ));
    // Measured norm above epsilon.
    let t = one_dof_thresholds();
    assert!(matches!(
        normalize(&h, &TrigPoly::cos(&[1], 1e-5), &l, &t, &NormalizeConfig::default()),
        Err(NekError::Threshold(_))
    ));
}

#[test]
fn lie_series_of_a_constant_generator() {
    // chi = c theta-free shift: exp(-{., chi}) with chi = a.I translates angles.
    let h = TrigPoly::from_poly(Poly::var(1, 0).pow(2).scale_re(0.5));
    let f = TrigPoly::cos(&[1], 0.1);
    let chi = TrigPoly::from_poly(Poly::var(1, 0).scale_re(0.3));
    let (out, order, _) =
        lie_transform(&h, &f, &chi, 30, |p| Ok(p.coefficient_mass()), 1e-18).unwrap();
    assert!(order < 30);
    // Flow theta -> theta + 0.3, so (h + f) o Phi = h + 0.1 cos(theta + 0.3).
    for &th in &[0.0, 1.0, 2.5] {
        let v = out.evaluate(&[1.2], &[th]).unwrap();
        assert!((v - 0.1 * (th + 0.3).cos()).abs() < 1e-15);
    }
    let y = flow_map(&[chi], &[1.2, 1.0], 8).unwrap();
    assert!((y[0] - 1.2).abs() < 1e-15 && (y[1] - 1.3).abs() < 1e-14);
}
