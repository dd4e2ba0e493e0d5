//! Uniform tensor grids and sampled functions on them.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{domain, NekError, Result};

/// One grid axis. Periodic axes cover `[lo, hi)` without the duplicate
/// endpoint; bounded axes include both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub nodes: usize,
    pub periodic: bool,
}

impl Axis {
    pub fn bounded(lo: f64, hi: f64, nodes: usize) -> Self {
        Axis {
            lo,
            hi,
            nodes,
            periodic: false,
        }
    }

    /// `[0, 2 pi)` with `nodes` samples.
    pub fn angle(nodes: usize) -> Self {
        Axis {
            lo: 0.0,
            hi: std::f64::consts::TAU,
            nodes,
            periodic: true,
        }
    }

    pub fn step(&self) -> f64 {
        if self.periodic {
            (self.hi - self.lo) / self.nodes as f64
        } else {
            (self.hi - self.lo) / (self.nodes as f64 - 1.0)
        }
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.coord(i)).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.nodes < 2 {
            return domain("every axis needs at least 2 nodes");
        }
        if !(self.hi > self.lo) || !self.lo.is_finite() || !self.hi.is_finite() {
            return domain("axis bounds must be finite with hi > lo");
        }
        Ok(())
    }
}

/// Samples on a tensor grid, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    axes: Vec<Axis>,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    F64le,
    Csv,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GridHeader {
    schema: String,
    axes: Vec<Axis>,
    encoding: Encoding,
}

pub const GRID_SCHEMA: &str = "neklab.grid/1";

impl GridFunction {
    pub fn new(axes: Vec<Axis>, values: Vec<f64>) -> Result<Self> {
        if axes.is_empty() {
            return domain("grid needs at least one axis");
        }
        for a in &axes {
            a.validate()?;
        }
        let total: usize = axes.iter().map(|a| a.nodes).product();
        if total != values.len() {
            return domain(format!(
                "sample count {} differs from node product {total}",
                values.len()
            ));
        }
        Ok(GridFunction { axes, values })
    }

    pub fn from_fn(axes: Vec<Axis>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        for a in &axes {
            a.validate()?;
        }
        let total: usize = axes.iter().map(|a| a.nodes).product();
        let mut values = Vec::with_capacity(total);
        let mut x = vec![0.0; axes.len()];
        for flat in 0..total {
            let idx = unravel(flat, &axes);
            for (d, a) in axes.iter().enumerate() {
                x[d] = a.coord(idx[d]);
            }
            values.push(f(&x));
        }
        GridFunction::new(axes, values)
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.nodes).collect()
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let idx = unravel(flat, &self.axes);
        idx.iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.coord(i))
            .collect()
    }

    pub fn index(&self, flat: usize) -> Vec<usize> {
        unravel(flat, &self.axes)
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        ravel(idx, &self.axes)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Number of trailing periodic axes.
    pub fn trailing_periodic(&self) -> usize {
        self.axes.iter().rev().take_while(|a| a.periodic).count()
    }

    /// Every other node on every axis; `None` if some axis cannot be halved.
    pub fn coarsen(&self) -> Option<GridFunction> {
        let mut axes = Vec::new();
        for a in &self.axes {
            if a.periodic {
                if a.nodes % 2 != 0 || a.nodes < 4 {
                    return None;
                }
                axes.push(Axis {
                    nodes: a.nodes / 2,
                    ..a.clone()
                });
            } else {
                if a.nodes % 2 == 0 || a.nodes < 5 {
                    return None;
                }
                axes.push(Axis {
                    nodes: a.nodes / 2 + 1,
                    ..a.clone()
                });
            }
        }
        let total: usize = axes.iter().map(|a| a.nodes).product();
        let mut vals = Vec::with_capacity(total);
        for flat in 0..total {
            let idx: Vec<usize> = unravel(flat, &axes).iter().map(|i| 2 * i).collect();
            vals.push(self.values[ravel(&idx, &self.axes)]);
        }
        Some(GridFunction { axes, values: vals })
    }

    pub fn write_to(&self, w: &mut impl Write, enc: Encoding) -> Result<()> {
        let h = GridHeader {
            schema: GRID_SCHEMA.into(),
            axes: self.axes.clone(),
            encoding: enc,
        };
        writeln!(w, "{}", serde_json::to_string(&h)?)?;
        match enc {
            Encoding::F64le => {
                for v in &self.values {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
            Encoding::Csv => {
                for v in &self.values {
                    writeln!(w, "{v:e}")?;
                }
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl BufRead) -> Result<Self> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        let h: GridHeader = serde_json::from_str(line.trim_end())?;
        if h.schema != GRID_SCHEMA {
            return Err(NekError::Format(format!("unknown schema {}", h.schema)));
        }
        let total: usize = h.axes.iter().map(|a| a.nodes).product();
        let values = match h.encoding {
            Encoding::F64le => {
                let mut buf = vec![0u8; total * 8];
                r.read_exact(&mut buf)?;
                buf.chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                    .collect()
            }
            Encoding::Csv => {
                let mut v = Vec::with_capacity(total);
                for l in r.lines() {
                    let l = l?;
                    let t = l.trim();
                    if t.is_empty() {
                        continue;
                    }
                    v.push(
                        t.parse::<f64>()
                            .map_err(|e| NekError::Format(format!("bad sample {t}: {e}")))?,
                    );
                }
                v
            }
        };
        GridFunction::new(h.axes, values)
    }
}

pub(crate) fn unravel(mut flat: usize, axes: &[Axis]) -> Vec<usize> {
    let mut idx = vec![0; axes.len()];
    for d in (0..axes.len()).rev() {
        idx[d] = flat % axes[d].nodes;
        flat /= axes[d].nodes;
    }
    idx
}

pub(crate) fn ravel(idx: &[usize], axes: &[Axis]) -> usize {
    let mut flat = 0;
    for (i, a) in idx.iter().zip(axes) {
        flat = flat * a.nodes + i;
    }
    flat
}

/// Action box `B_inf(center, R)`, complex action width `r`, angle width `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub radius: f64,
    pub r: f64,
    pub s: f64,
    pub center: Vec<f64>,
}

impl DomainSpec {
    pub fn new(center: Vec<f64>, radius: f64, r: f64, s: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return domain("action radius must be positive");
        }
        if !(r >= 0.0) || !(s >= 0.0) {
            return domain("widths must be non-negative");
        }
        Ok(DomainSpec {
            radius,
            r,
            s,
            center,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Uniform real sample of the action box, `nodes` per axis.
    pub fn action_grid(&self, nodes: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        if nodes == 0 || n == 0 {
            return Vec::new();
        }
        let axes: Vec<Axis> = self
            .center
            .iter()
            .map(|&c| Axis::bounded(c - self.radius, c + self.radius, nodes.max(2)))
            .collect();
        let pts: Vec<Vec<f64>> = if nodes == 1 {
            vec![self.center.clone()]
        } else {
            let total: usize = axes.iter().map(|a| a.nodes).product();
            (0..total)
                .map(|f| {
                    unravel(f, &axes)
                        .iter()
                        .zip(&axes)
                        .map(|(&i, a)| a.coord(i))
                        .collect()
                })
                .collect()
        };
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_both_encodings() {
        let g = GridFunction::from_fn(
            vec![Axis::bounded(-1.0, 1.0, 5), Axis::angle(4)],
            |x| x[0] * x[1].cos(),
        )
        .unwrap();
        for enc in [Encoding::F64le, Encoding::Csv] {
            let mut buf = Vec::new();
            g.write_to(&mut buf, enc).unwrap();
            let back = GridFunction::read_from(&mut buf.as_slice()).unwrap();
            assert_eq!(back, g);
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(GridFunction::new(vec![Axis::bounded(0.0, 1.0, 3)], vec![1.0]).is_err());
        assert!(GridFunction::new(vec![Axis::bounded(0.0, 1.0, 1)], vec![1.0]).is_err());
    }

    #[test]
    fn coarsen_keeps_even_nodes() {
        let g = GridFunction::from_fn(vec![Axis::bounded(0.0, 1.0, 9)], |x| x[0]).unwrap();
        let c = g.coarsen().unwrap();
        assert_eq!(c.len(), 5);
        assert!((c.values()[1] - 0.25).abs() < 1e-15);
    }
}
