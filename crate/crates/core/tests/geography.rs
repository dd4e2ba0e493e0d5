use std::f64::consts::E;

use neklab::benchmarks::{convex, convex3};
use neklab::geography::*;
use neklab::NekError;
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

fn convex_params() -> GeographyParams {
    geography_params(3, &[1.0, 1.0], 4.0).unwrap()
}

fn lat(gens: &[&[i64]]) -> Lattice {
    let n = gens[0].len();
    Lattice::saturate(n, &gens.iter().map(|g| g.to_vec()).collect::<Vec<_>>()).unwrap()
}

/// Schedule with a prescribed cutoff `K` (via `eps = eps0 K^(-1/a)`).
fn schedule_at_k(params: &GeographyParams, k: f64, pf: &Prefactors) -> Schedule {
    schedule(k.powf(-1.0 / params.a), 1.0, params, 1.0, pf).unwrap()
}

#[test]
fn params_for_three_degrees_of_freedom() {
    let p = convex_params();
    assert_eq!(p.p, vec![1.0, 1.0, 1.0]);
    assert_eq!(p.q, vec![2.0, 1.0, 0.0]);
    assert_eq!(p.c, vec![1.0, 1.0]);
    assert!(close(p.a, 1.0 / 6.0, 1e-15));
    assert!(close(p.b, 1.0 / 6.0, 1e-15));
    assert!(close(p.theorem_a, 1.0, 1e-15));
    assert!(close(p.theorem_b, 1.0 / 6.0, 1e-15));
}

#[test]
fn params_for_four_degrees_of_freedom() {
    let p = geography_params(4, &[1.0, 2.0, 3.0], 5.0).unwrap();
    assert_eq!(p.p, vec![2.0, 2.0, 1.0, 1.0]);
    assert_eq!(p.q, vec![7.0, 6.0, 1.0, 0.0]);
    assert_eq!(p.c, vec![1.0, 5.0, 1.0]);
    assert!(close(p.a, 1.0 / 16.0, 1e-15));
    assert!(close(p.b, 1.0 / 48.0, 1e-15));
    assert!(close(p.theorem_a, 4.0 / 16.0 + 0.5, 1e-15));
}

#[test]
fn params_reject_bad_inputs() {
    assert!(matches!(geography_params(2, &[1.0], 4.0), Err(NekError::Domain(_))));
    assert!(matches!(geography_params(3, &[0.5, 1.0], 4.0), Err(NekError::Domain(_))));
    assert!(matches!(geography_params(3, &[1.0, 1.0], 3.5), Err(NekError::Domain(_))));
}

proptest! {
    #[test]
    fn parameter_identities(n in 3usize..7, raw in proptest::collection::vec(1.0f64..4.0, 6), ell_extra in 0.0f64..3.0) {
        let alpha = &raw[..n - 1];
        let p = geography_params(n, alpha, n as f64 + 1.0 + ell_extra).unwrap();
        prop_assert_eq!(p.p[n - 2], 1.0);
        prop_assert_eq!(p.p[n - 1], 1.0);
        prop_assert_eq!(p.q[n - 1], 0.0);
        for j in 1..=n {
            prop_assert!(close(p.q[j - 1], n as f64 * p.p[j - 1] - j as f64, 1e-14));
            // 1 + q_1 >= j + q_j, equivalently p_1 >= p_j.
            prop_assert!(1.0 + p.q[0] >= j as f64 + p.q[j - 1] - 1e-12);
        }
        for j in 1..n {
            prop_assert!(close(p.c[j - 1], p.q[j - 1] - p.q[j], 1e-14));
        }
        prop_assert!(close(p.b, p.a / alpha[n - 2], 1e-14));
    }
}

#[test]
fn schedule_example() {
    let p = convex_params();
    let pf = Prefactors {
        c_s: 1e-2,
        c_r: 1.0,
        ..Prefactors::default()
    };
    let s = schedule((-6.0f64).exp(), 1.0, &p, 1.0, &pf).unwrap();
    assert!(close(s.k, E, 1e-14));
    assert!(close(s.s, 1e-2 * 60.0 / E, 1e-13));
    assert!((s.s - 0.2207).abs() < 1e-4);
    assert!(close(s.r, (-3.0f64).exp(), 1e-14));
    assert!(s.r <= s.s && s.s <= 1.0);
    assert!(close(s.rho, s.big_r / 6.0, 1e-15));
}

#[test]
fn schedule_boundary_and_errors() {
    let p = convex_params();
    let pf = Prefactors::default();
    let s = schedule(0.999, 1.0, &p, 1.0, &pf).unwrap();
    assert!(s.k > 1.0 && s.k < 1.01);
    assert!(s.s > 0.0 && s.s < 1e-3);
    assert!(!s.warnings.is_empty());
    assert!(matches!(schedule(1.0, 1.0, &p, 1.0, &pf), Err(NekError::Domain(_))));
    assert!(matches!(schedule(2.0, 1.0, &p, 1.0, &pf), Err(NekError::Domain(_))));
}

#[test]
fn zone_width_example() {
    let p = convex_params();
    let pf = Prefactors {
        c_delta: 1.0,
        ..Prefactors::default()
    };
    let m = 2.5;
    let s = schedule(1e-6, 1.0, &p, m, &pf).unwrap();
    assert!(close(s.k, 10.0, 1e-13));
    let l = lat(&[&[1, 0, 0]]);
    assert_eq!(l.covolume(), 1.0);
    assert!(close(s.delta(&l), 1e-2, 1e-13));
    assert!(close(s.r_lattice(&l), 1e-2 / m, 1e-13));
    assert!(s.delta(&Lattice::trivial(3)).is_infinite());
}

#[test]
fn enumeration_examples() {
    assert_eq!(enumerate_lattices(2, 1.0, 1, 1000).unwrap().len(), 2);
    let k2 = enumerate_lattices(2, 2.0, 1, 1000).unwrap();
    let bases: Vec<Vec<Vec<i64>>> = k2.iter().map(|l| l.basis.clone()).collect();
    assert_eq!(k2.len(), 4);
    for b in [vec![vec![1, 0]], vec![vec![0, 1]], vec![vec![1, 1]], vec![vec![1, -1]]] {
        assert!(bases.contains(&b), "{b:?} missing from {bases:?}");
    }
    let zero = enumerate_lattices(3, 4.0, 0, 1).unwrap();
    assert_eq!(zero.len(), 1);
    assert_eq!(zero[0].rank(), 0);
    assert!(matches!(
        enumerate_lattices(3, 4.0, 2, 10),
        Err(NekError::Budget { cap: 10, .. })
    ));
}

#[test]
fn enumeration_is_canonical_and_monotone() {
    for j in 1..3 {
        let small = enumerate_lattices(3, 2.0, j, 1_000_000).unwrap();
        let big = enumerate_lattices(3, 3.0, j, 1_000_000).unwrap();
        for l in &small {
            assert_eq!(l.rank(), j);
            assert!(l.covolume() >= 1.0 - 1e-12);
            assert_eq!(&Lattice::saturate(3, &l.basis).unwrap(), l);
            assert!(big.contains(l));
        }
    }
    // (2,0) saturates to (1,0); scaled generators give the same lattice.
    assert_eq!(lat(&[&[2, 0]]), lat(&[&[1, 0]]));
    assert_eq!(lat(&[&[1, 1, 0], &[1, -1, 0]]), lat(&[&[1, 0, 0], &[0, 1, 0]]));
    assert_eq!(lattices_json(&[lat(&[&[1, -1]])]).unwrap(), "[[[1,-1]]]");
}

#[test]
fn zone_membership_examples() {
    let p = convex_params();
    // K = 5 and delta = 0.01 for a covolume-one line.
    let pf = Prefactors {
        c_delta: 0.25,
        ..Prefactors::default()
    };
    let s = schedule_at_k(&p, 5.0, &pf);
    let l = lat(&[&[0, 0, 1]]);
    assert!(close(s.delta(&l), 0.01, 1e-12));
    let map = convex(3, vec![0.0; 3], 2.0).unwrap();
    assert!(zone_membership(&[1.0, 0.5, 0.001], &l, &s, &map));
    assert!(!zone_membership(&[1.0, 0.5, 0.1], &l, &s, &map));
    // Exactly orthogonal.
    assert!(zone_membership(&[1.0, 0.5, 0.0], &l, &s, &map));
    // Strict inequality at the boundary.
    let edge = s.delta(&l);
    assert!(!zone_membership(&[1.0, 0.5, edge], &l, &s, &map));
}

fn convex_geo<'a>(map: &'a neklab::frequency::PolyHamiltonian, eps: f64, pf: &Prefactors) -> Geography<'a> {
    let s = schedule(eps, 1.0, &convex_params(), 1.0, pf).unwrap();
    Geography::new(map, vec![1.0; 3], s).unwrap()
}

#[test]
fn blocks_and_classification() {
    let map = convex3();
    let geo = convex_geo(&map, 1e-2, &Prefactors::default());
    let diag = lat(&[&[1, -1, 0], &[0, 1, -1]]);
    let line = lat(&[&[1, -1, 0]]);
    let center = [1.0, 1.0, 1.0];

    // Top rank: block equals zone.
    for p in [[1.0, 1.0, 1.0], [1.02, 1.0, 0.98], [1.2, 1.0, 0.9]] {
        assert_eq!(geo.block_membership(&p, &diag), geo.zone_membership(&p, &diag));
    }
    // Doubly resonant point: in the line zone, not in its block.
    assert!(geo.zone_membership(&center, &line));
    assert!(!geo.block_membership(&center, &line));
    let b = geo.classify(&center).unwrap();
    assert_eq!((b.multiplicity, b.lattice), (2, Some(diag.clone())));

    // omega in the line's orthogonal complement only.
    let p = [1.1, 1.1, 0.9];
    let b = geo.classify(&p).unwrap();
    assert_eq!((b.multiplicity, b.lattice.as_ref()), (1, Some(&line)));
    assert!(geo.block_membership(&p, &line));

    // Strongly non-resonant.
    let p = [1.2, 0.95, 0.75];
    let b = geo.classify(&p).unwrap();
    assert_eq!((b.multiplicity, b.lattice), (0, None));
    assert!(geo.block_membership(&p, &Lattice::trivial(3)));

    // Overlap of D_0 and D_2: no line zone, but inside the plane zone.
    let p = [1.02, 1.0, 0.98];
    assert!(geo.containing_zones(&p, 1).is_empty());
    assert!(geo.block_membership(&p, &Lattice::trivial(3)));
    assert!(geo.block_membership(&p, &diag));
    assert_eq!(geo.classify(&p).unwrap().multiplicity, 0);
}

#[test]
fn zone_nesting() {
    let map = convex3();
    let geo = convex_geo(&map, 1e-3, &Prefactors::default());
    let pts = sample_ball(geo.center(), geo.schedule().big_r, 4000, 9);
    let mut pairs = 0;
    for small in geo.lattices(1) {
        for big in geo.lattices(2) {
            if !small.is_sublattice_of(&big) || geo.schedule().delta(&big) > geo.schedule().delta(&small) {
                continue;
            }
            pairs += 1;
            for p in &pts {
                if geo.zone_membership(p, &big) {
                    assert!(geo.zone_membership(p, &small));
                }
            }
        }
    }
    // The hierarchy factor makes rank-two zones wider, so the premise
    // rarely holds; the property is vacuous then.
    let _ = pairs;
}

#[test]
fn extended_block_examples() {
    let map = convex3();
    let geo = convex_geo(&map, 1e-2, &Prefactors::default());
    let line = lat(&[&[1, -1, 0]]);
    let h = geo.default_resolution(&line);

    let inside = [1.1, 1.1, 0.9];
    assert!(geo.block_membership(&inside, &line) && geo.in_inner_ball(&inside));
    let m = geo.ext_block_membership(&inside, &line, h).unwrap();
    assert!(m.member);
    assert_eq!(m.resolution, h);

    let outside = [1.2, 0.95, 0.75];
    assert!(!geo.ext_block_membership(&outside, &line, h).unwrap().member);
    assert!(matches!(geo.ext_block_membership(&inside, &line, 0.0), Err(NekError::Domain(_))));

    // Trivial lattice: D_0 inside the shrunk ball.
    let t = Lattice::trivial(3);
    assert!(geo.ext_block_membership(&outside, &t, h).unwrap().member);
    assert!(!geo.ext_block_membership(&[1.0, 1.0, 1.0], &t, h).unwrap().member);
}

#[test]
fn extended_block_is_local() {
    // Wide plane zone and short discs: the diagonal is farther than
    // r_1 + r_L from the line block.
    let map = convex3();
    let pf = Prefactors {
        hierarchy: 16.0,
        c_rj: 0.01,
        ..Prefactors::default()
    };
    let geo = convex_geo(&map, 1e-2, &pf);
    let line = lat(&[&[1, -1, 0]]);
    let reach = geo.schedule().r_j(1) + geo.schedule().r_lattice(&line);
    let p = [1.0, 1.0, 1.0];
    assert!(geo.zone_membership(&p, &line));
    // Every line-block point along the diagonal directions is beyond reach.
    let probe = sample_ball(&p, reach, 2000, 3);
    assert!(probe.iter().all(|q| !geo.block_membership(q, &line)));
    for h in [geo.default_resolution(&line), geo.default_resolution(&line) / 2.0] {
        assert!(!geo.ext_block_membership(&p, &line, h).unwrap().member);
    }
}

#[test]
fn extended_block_resolution_agreement() {
    let map = convex3();
    let geo = convex_geo(&map, 1e-3, &Prefactors::default());
    let line = lat(&[&[1, -1, 0]]);
    let h = geo.default_resolution(&line);
    let mut checked = 0;
    for p in sample_ball(geo.center(), geo.schedule().big_r, 20000, 5) {
        if !geo.zone_membership(&p, &line) {
            continue;
        }
        checked += 1;
        let a = geo.ext_block_membership(&p, &line, h).unwrap().member;
        let b = geo.ext_block_membership(&p, &line, h / 2.0).unwrap().member;
        assert_eq!(a, b, "resolution disagreement at {p:?}");
    }
    assert!(checked > 20, "only {checked} zone points");
}

#[test]
fn covering_convex_three_epsilons() {
    let map = convex3();
    for eps in [1e-2, 1e-3, 1e-4] {
        let geo = convex_geo(&map, eps, &Prefactors::default());
        assert!(geo.schedule().k <= 5.0);
        let r = covering_check(&geo, 10_000, 11);
        assert_eq!(r.coverage, 1.0);
        assert!(r.violations.is_empty());
        assert_eq!(r.histogram.iter().sum::<usize>(), 10_000);
        assert_eq!(r.rows.len(), 10_000);
    }
}

#[test]
fn report_formats() {
    let map = convex3();
    let geo = convex_geo(&map, 1e-2, &Prefactors::default());
    let cov = covering_check(&geo, 50, 1);
    let csv = samples_csv(&cov.rows, 3);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("I1,I2,I3,multiplicity,lattice_id"));
    assert_eq!(lines.count(), 50);
    let rep = GeographyReport {
        params: geo.schedule().params.clone(),
        schedule: geo.schedule().clone(),
        coverage: cov,
        violations: Vec::new(),
    };
    let v: serde_json::Value = serde_json::from_str(&rep.to_json().unwrap()).unwrap();
    for key in ["params", "schedule", "coverage", "violations"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn disjointness_examples() {
    let map = convex3();
    let geo = convex_geo(&map, 1e-2, &Prefactors::default());
    let x = lat(&[&[1, 0, 0]]);
    let y = lat(&[&[0, 1, 0]]);
    let cfg = DisjointnessConfig::default();
    let r = disjointness_check(&geo, &x, &y, &cfg).unwrap();
    assert!(r.violations.is_empty() && !r.miscalibrated);
    assert_eq!(r.draws, 10_000);

    // Two lines through the double resonance, sampled inside both zones.
    let a = lat(&[&[1, -1, 0]]);
    let b = lat(&[&[0, 1, -1]]);
    let cond = DisjointnessConfig {
        conditioned: true,
        samples: 2000,
        ..cfg.clone()
    };
    let r = disjointness_check(&geo, &a, &b, &cond).unwrap();
    assert_eq!(r.tested, 2000);
    assert!(r.violations.is_empty());

    assert!(matches!(disjointness_check(&geo, &x, &x, &cfg), Err(NekError::Domain(_))));
    let plane = lat(&[&[1, 0, 0], &[0, 1, 0]]);
    assert!(matches!(disjointness_check(&geo, &x, &plane, &cfg), Err(NekError::Domain(_))));
}

#[test]
fn inflated_width_breaks_disjointness() {
    // Line widths times 100, plane widths held fixed. At K < 2 the zones
    // are single slabs, without multiples of the generator.
    let map = convex3();
    let base = Prefactors::default();
    let pf = Prefactors {
        c_delta: 100.0 * base.c_delta,
        hierarchy: base.hierarchy / 100.0,
        ..base
    };
    let geo = convex_geo(&map, 2e-2, &pf);
    assert!(geo.schedule().k < 2.0);
    let r = disjointness_check(&geo, &lat(&[&[1, 0, 0]]), &lat(&[&[0, 1, 0]]), &DisjointnessConfig::default()).unwrap();
    assert!(r.miscalibrated);
    assert!(!r.violations.is_empty());
}

#[test]
fn without_hierarchy_lines_collide() {
    let map = convex3();
    let pf = Prefactors {
        hierarchy: 1.0,
        ..Prefactors::default()
    };
    let geo = convex_geo(&map, 1e-2, &pf);
    let r = focused_disjointness(&geo, &DisjointnessConfig { samples: 2000, ..Default::default() }).unwrap();
    assert!(r.active_pairs >= 6);
    assert!(!r.violations.is_empty());
}

#[test]
fn calibrated_disjointness_convex() {
    let map = convex3();
    let cfg = DisjointnessConfig::default();
    for eps in [1e-2, 1e-3, 1e-4] {
        let geo = convex_geo(&map, eps, &Prefactors::default());
        let u = disjointness_sweep(&geo, &cfg).unwrap();
        assert!(u.violations.is_empty(), "uniform {eps}: {:?}", u.violations.first());
        let f = focused_disjointness(&geo, &cfg).unwrap();
        assert!(f.tested >= 10_000);
        assert!(f.violations.is_empty(), "focused {eps}: {:?}", f.violations.first());
    }
}

#[test]
fn calibration_finds_a_clean_factor() {
    let map = convex3();
    let params = convex_params();
    let center = vec![1.0; 3];
    let setup = GeographySetup {
        map: &map,
        center: &center,
        params: &params,
        epsilon0: 1.0,
        m: 1.0,
    };
    let cfg = DisjointnessConfig {
        samples: 1000,
        ..Default::default()
    };
    let r = calibrate_hierarchy(&setup, &[1e-2, 1e-3], &Prefactors::default(), &cfg, 64.0, 2.0).unwrap();
    assert!(r.minimal > 1.0 && r.minimal <= CALIBRATED_HIERARCHY);
    assert!(r.evaluations[0] == (1.0, r.evaluations[0].1) && r.evaluations[0].1 > 0);
    let pf = Prefactors {
        hierarchy: r.recommended,
        ..Prefactors::default()
    };
    assert_eq!(count_violations(&setup, &[1e-2, 1e-3], &pf, &cfg).unwrap(), 0);
}

#[test]
fn small_divisors_bounded_in_blocks() {
    let map = convex3();
    for eps in [1e-2, 1e-3, 1e-4] {
        let geo = convex_geo(&map, eps, &Prefactors::default());
        let r = small_divisor_check(&geo, 5000, 2).unwrap();
        assert!(r.violations.is_empty(), "{eps}: {:?}", r.violations.first());
        assert!(r.min_ratio >= 1.0);
    }
}

#[test]
fn ball_must_fit_the_domain() {
    let map = convex3();
    let s = schedule(1e-2, 1.0, &convex_params(), 1.0, &Prefactors::default()).unwrap();
    assert!(matches!(Geography::new(&map, vec![1.3, 1.0, 1.0], s), Err(NekError::Domain(_))));
}
