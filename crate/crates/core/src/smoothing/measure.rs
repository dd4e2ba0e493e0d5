use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{domain, Result};
use crate::fourier::{fft_nd_with, fourier_coefficients, CoefficientTable};
use crate::grid::{ravel, unravel, Axis, GridFunction};
use crate::trig::{MultiIndex, TrigPoly};

/// Central stencil for the `m`-th derivative on a uniform grid of step `h`.
fn stencil_1d(m: u32, h: f64) -> Vec<(i64, f64)> {
    let mut st: Vec<(i64, f64)> = vec![(0, 1.0)];
    let conv = |a: &[(i64, f64)], b: &[(i64, f64)]| -> Vec<(i64, f64)> {
        let mut acc: BTreeMap<i64, f64> = BTreeMap::new();
        for (oa, wa) in a {
            for (ob, wb) in b {
                *acc.entry(oa + ob).or_default() += wa * wb;
            }
        }
        acc.into_iter().filter(|(_, w)| *w != 0.0).collect()
    };
    for _ in 0..m / 2 {
        st = conv(&st, &[(-1, 1.0 / (h * h)), (0, -2.0 / (h * h)), (1, 1.0 / (h * h))]);
    }
    if m % 2 == 1 {
        st = conv(&st, &[(-1, -0.5 / h), (1, 0.5 / h)]);
    }
    st
}

/// Multi-dimensional stencil: offsets per action axis with weights.
fn stencil_nd(alpha: &[u32], axes: &[Axis]) -> Vec<(Vec<i64>, f64)> {
    let mut out: Vec<(Vec<i64>, f64)> = vec![(Vec::new(), 1.0)];
    for (d, &m) in alpha.iter().enumerate() {
        let st = stencil_1d(m, axes[d].step());
        let mut next = Vec::new();
        for (off, w) in &out {
            for (o, v) in &st {
                let mut oo = off.clone();
                oo.push(*o);
                next.push((oo, w * v));
            }
        }
        out = next;
    }
    out
}

/// `||f - f_s||_{C^q}` on `B_inf(0, region) x T^n` for every
/// `q = 0..=p`: finite differences along the actions, exact spectral
/// derivatives along the angles, and suprema over an angle grid of
/// `oversample (2 max|k|_inf + 2)` nodes per axis.
pub fn smoothing_error_table(
    table: &CoefficientTable,
    f_s: &TrigPoly,
    p: u32,
    ell: f64,
    region: f64,
    oversample: usize,
) -> Result<Vec<f64>> {
    if p as f64 > ell.floor() {
        return domain(format!("order p = {p} exceeds floor(ell) = {}", ell.floor()));
    }
    let n = table.n_angle();
    if f_s.dim() != n {
        return domain("smoothed function dimension differs from the table");
    }
    let axes = table.action_axes().to_vec();
    let na = axes.len();
    if na != 0 && na != n {
        return domain("action and angle dimensions differ");
    }
    let keys: Vec<MultiIndex> = table
        .harmonics()
        .chain(f_s.harmonics())
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let maxk = keys.iter().map(|k| k.linf()).max().unwrap_or(0) as usize;
    let nang = oversample.max(1) * (2 * maxk + 2);
    let shape = vec![nang; n];
    let total: usize = shape.iter().product();
    let mut planner = FftPlanner::new();
    let plans: Vec<_> = shape.iter().map(|&m| planner.plan_fft_inverse(m)).collect();
    let slots: Vec<usize> = keys
        .iter()
        .map(|k| {
            k.0.iter()
                .fold(0usize, |acc, &kj| acc * nang + kj.rem_euclid(nang as i64) as usize)
        })
        .collect();

    // Region nodes and every action multi-order up to p.
    let region_nodes: Vec<usize> = if na == 0 {
        vec![0]
    } else {
        (0..table.node_count())
            .filter(|&a| {
                table
                    .action_point(a)
                    .iter()
                    .all(|x| x.abs() <= region + 1e-12)
            })
            .collect()
    };
    if region_nodes.is_empty() {
        return domain("no action nodes inside the error region");
    }
    let zero = vec![0.0; n];
    let diff_at = |a: usize| -> Vec<Complex64> {
        let x = if na == 0 { zero.clone() } else { table.action_point(a) };
        keys.iter()
            .map(|k| {
                let f = table.get(k).map(|v| v[a]).unwrap_or_default();
                let g = f_s.coeff(k).map(|q| q.eval(&x)).unwrap_or_default();
                f - g
            })
            .collect()
    };
    let mut orders: Vec<(Vec<u32>, Vec<u32>)> = Vec::new();
    for total_order in 0..=p {
        for split in 0..=total_order {
            let act = if na == 0 {
                if split > 0 {
                    continue;
                }
                vec![Vec::new()]
            } else {
                crate::norms::orders_exact(na, split)
            };
            for aa in act {
                for th in crate::norms::orders_exact(n, total_order - split) {
                    orders.push((aa.clone(), th));
                }
            }
        }
    }

    let per_node: Vec<Vec<f64>> = region_nodes
        .par_iter()
        .map(|&a| {
            let mut errs = vec![0.0f64; p as usize + 1];
            let idx = if na == 0 { Vec::new() } else { unravel(a, &axes) };
            let mut cache: BTreeMap<usize, Vec<Complex64>> = BTreeMap::new();
            let mut buf = vec![Complex64::default(); total];
            for (act, th) in &orders {
                let order = (act.iter().sum::<u32>() + th.iter().sum::<u32>()) as usize;
                let mut coeffs = vec![Complex64::default(); keys.len()];
                if na == 0 {
                    coeffs = cache.entry(0).or_insert_with(|| diff_at(0)).clone();
                } else {
                    let mut ok = true;
                    for (off, w) in stencil_nd(act, &axes) {
                        let mut j = idx.clone();
                        for d in 0..na {
                            let v = j[d] as i64 + off[d];
                            if v < 0 || v >= axes[d].nodes as i64 {
                                ok = false;
                            } else {
                                j[d] = v as usize;
                            }
                        }
                        if !ok {
                            break;
                        }
                        let b = ravel(&j, &axes);
                        let d = cache.entry(b).or_insert_with(|| diff_at(b));
                        for (c, v) in coeffs.iter_mut().zip(d.iter()) {
                            *c += v * w;
                        }
                    }
                    if !ok {
                        continue;
                    }
                }
                buf.iter_mut().for_each(|c| *c = Complex64::default());
                for ((k, c), &slot) in keys.iter().zip(&coeffs).zip(&slots) {
                    let mut m = *c;
                    for (kj, &e) in k.0.iter().zip(th) {
                        m *= (Complex64::i() * *kj as f64).powu(e);
                    }
                    buf[slot] += m;
                }
                fft_nd_with(&mut buf, &shape, &plans);
                let sup = buf.iter().fold(0.0f64, |m, c| m.max(c.re.abs()));
                errs[order] = errs[order].max(sup);
            }
            errs
        })
        .collect();
    let mut by_order = vec![0.0f64; p as usize + 1];
    for e in &per_node {
        for (o, v) in e.iter().enumerate() {
            by_order[o] = by_order[o].max(*v);
        }
    }
    // C^q norms are cumulative over orders.
    let mut out = Vec::with_capacity(by_order.len());
    let mut run: f64 = 0.0;
    for v in by_order {
        run = run.max(v);
        out.push(run);
    }
    Ok(out)
}

/// `||f - f_s||_{C^p}` on `B_inf(0, region) x T^n` for a sampled `f`.
pub fn smoothing_error(f: &GridFunction, f_s: &TrigPoly, p: u32, ell: f64, region: f64) -> Result<f64> {
    let n_angle = f.trailing_periodic();
    if n_angle == 0 {
        return domain("the sampled function has no periodic angle axes");
    }
    let min_nodes = f.axes()[f.dim() - n_angle..]
        .iter()
        .map(|a| a.nodes)
        .min()
        .unwrap_or(2);
    let table = fourier_coefficients(f, (min_nodes - 2) / 2)?;
    let errs = smoothing_error_table(&table, f_s, p, ell, region, 1)?;
    Ok(errs[p as usize])
}
