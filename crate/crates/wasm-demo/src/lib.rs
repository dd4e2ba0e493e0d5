//! Three small operations behind the static page in `www/`. Each returns
//! a JSON string so the page only needs `JSON.parse`.

use neklab::benchmarks::{convex3, hamiltonian, regularity_family};
use neklab::frequency::FrequencyMap;
use neklab::geography::{geography_params, GeographySetup, Prefactors};
use neklab::smoothing::{smooth_annulus_table, AnnulusOptions};
use neklab::steepness::{estimate_indices, EstimateConfig, SteepnessOutcome};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest grid side accepted by [`geography_slice`].
pub const MAX_SLICE: usize = 160;

fn to_js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

/// Smoothing errors `||f - f_s||_{C^p}` for the one-dimensional regularity
/// family, over widths `2^-1 .. 2^-widths`.
pub fn smoothing_curve_value(ell: f64, widths: usize) -> Result<Value, String> {
    if !(ell > 0.0 && ell <= 6.0) {
        return Err(format!("ell = {ell} must lie in (0, 6]"));
    }
    if !(2..=8).contains(&widths) {
        return Err(format!("widths = {widths} must lie in 2..=8"));
    }
    let table = regularity_family(1, ell, 512, 17, 1.0).map_err(|e| e.to_string())?;
    let opts = AnnulusOptions::new(1.0);
    let mut rows = Vec::with_capacity(widths);
    for i in 1..=widths {
        let s = 0.5_f64.powi(i as i32);
        let out = smooth_annulus_table(&table, s, ell, &opts).map_err(|e| e.to_string())?;
        rows.push(json!({"s": s, "errors": out.report.errors}));
    }
    Ok(json!({"ell": ell, "rows": rows}))
}

#[wasm_bindgen]
pub fn smoothing_curve(ell: f64, widths: usize) -> Result<String, JsValue> {
    to_js(smoothing_curve_value(ell, widths))
}

/// Steepness margin curves of a built-in Hamiltonian, or the violation
/// witness when the margin vanishes.
pub fn steepness_margin_value(name: &str) -> Result<Value, String> {
    let h = hamiltonian(name).map_err(|e| e.to_string())?;
    let out = estimate_indices(&h, &EstimateConfig::default()).map_err(|e| e.to_string())?;
    Ok(match out {
        SteepnessOutcome::Profile(p) => json!({
            "kind": "profile",
            "alpha": p.alpha,
            "C": p.c,
            "xi": p.xi,
            "curves": p.curves,
        }),
        SteepnessOutcome::Violation(v) => json!({
            "kind": "violation",
            "point": v.witness.point,
            "margin": v.witness.margin,
            "multiplicity": v.witness.multiplicity,
        }),
    })
}

#[wasm_bindgen]
pub fn steepness_margin(name: &str) -> Result<String, JsValue> {
    to_js(steepness_margin_value(name))
}

/// Block multiplicities of the convex benchmark on the plane
/// `I_3 = centre`, on a `side x side` grid over the action box.
pub fn geography_slice_value(epsilon: f64, side: usize) -> Result<Value, String> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(format!("epsilon = {epsilon} must lie in (0, 1)"));
    }
    if !(2..=MAX_SLICE).contains(&side) {
        return Err(format!("side = {side} must lie in 2..={MAX_SLICE}"));
    }
    let h = convex3();
    let params = geography_params(3, &[1.0, 1.0], 4.0).map_err(|e| e.to_string())?;
    let setup = GeographySetup {
        map: &h,
        center: h.center(),
        params: &params,
        epsilon0: 1.0,
        m: 1.0,
    };
    let geo = setup.build(epsilon, &Prefactors::default()).map_err(|e| e.to_string())?;
    let (c, r) = (h.center(), h.radius());
    let axis: Vec<f64> = (0..side)
        .map(|i| -r + 2.0 * r * i as f64 / (side - 1) as f64)
        .collect();
    let mut cells = Vec::with_capacity(side * side);
    let mut lattices: Vec<Vec<Vec<i64>>> = Vec::new();
    for &y in &axis {
        for &x in &axis {
            let b = geo.classify(&[c[0] + x, c[1] + y, c[2]]).map_err(|e| e.to_string())?;
            let label = match b.lattice {
                None => 0,
                Some(l) => match lattices.iter().position(|k| *k == l.basis) {
                    Some(p) => p + 1,
                    None => {
                        lattices.push(l.basis);
                        lattices.len()
                    }
                },
            };
            cells.push(json!([b.multiplicity, label]));
        }
    }
    Ok(json!({
        "epsilon": epsilon,
        "side": side,
        "x": axis.iter().map(|x| c[0] + x).collect::<Vec<_>>(),
        "y": axis.iter().map(|y| c[1] + y).collect::<Vec<_>>(),
        "cells": cells,
        "lattices": lattices,
    }))
}

#[wasm_bindgen]
pub fn geography_slice(epsilon: f64, side: usize) -> Result<String, JsValue> {
    to_js(geography_slice_value(epsilon, side))
}
