use super::bump::BumpSpec;
use crate::error::{domain, Result};
use crate::fourier::CoefficientTable;
use crate::poly::Poly;
use crate::trig::{MultiIndex, TrigPoly};

/// `psi(s k)`, the Jackson multiplier of harmonic `k`.
pub fn jackson_multiplier(k: &MultiIndex, s: f64, psi: &BumpSpec) -> f64 {
    let x: Vec<f64> = k.0.iter().map(|&v| v as f64 * s).collect();
    psi.eval(&x)
}

/// Whether harmonic `k` can survive at width `s`: `|k|_1 <= 1/s` and a
/// nonzero multiplier.
pub fn survives(k: &MultiIndex, s: f64, psi: &BumpSpec) -> bool {
    (k.l1() as f64) * s <= 1.0 && jackson_multiplier(k, s, psi) > 0.0
}

/// Jackson polynomial of an action-independent table:
/// `(f_s)_k = psi(s k) f_k`, with `|k|_1 > 1/s` removed from the table.
pub fn jackson_smooth(f_hat: &CoefficientTable, s: f64, psi: &BumpSpec) -> Result<TrigPoly> {
    if !(s > 0.0 && s <= 1.0) {
        return domain(format!("smoothing width s = {s} outside (0, 1]"));
    }
    if f_hat.node_count() != 1 {
        return domain("table depends on the actions; use smooth_annulus");
    }
    if psi.dim != f_hat.n_angle() {
        return domain("bump dimension differs from angle dimension");
    }
    let n = f_hat.n_angle();
    let mut out = TrigPoly::zero(n);
    for (k, v) in f_hat.entries() {
        if !survives(k, s, psi) {
            continue;
        }
        let m = jackson_multiplier(k, s, psi);
        out.add_harmonic(k.clone(), Poly::constant(n, v[0] * m));
    }
    Ok(out)
}
