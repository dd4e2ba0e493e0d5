use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{domain, NekError, Result};

/// Saturated sublattice of `Z^n` in canonical Hermite normal form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Lattice {
    pub n: usize,
    /// HNF rows; empty for the trivial lattice.
    pub basis: Vec<Vec<i64>>,
}

impl Lattice {
    pub fn trivial(n: usize) -> Self {
        Lattice { n, basis: Vec::new() }
    }

    /// Saturation of the lattice spanned by `generators`, in canonical form.
    pub fn saturate(n: usize, generators: &[Vec<i64>]) -> Result<Self> {
        if generators.iter().any(|g| g.len() != n) {
            return domain("generator length differs from n");
        }
        let rows: Vec<Vec<i128>> = generators
            .iter()
            .filter(|g| g.iter().any(|&v| v != 0))
            .map(|g| g.iter().map(|&v| v as i128).collect())
            .collect();
        if rows.is_empty() {
            return Ok(Lattice::trivial(n));
        }
        // span(A) cap Z^n = ker_Z(ker_Z(A)^T).
        let perp = integer_kernel(&rows, n);
        let sat = if perp.is_empty() {
            (0..n)
                .map(|j| (0..n).map(|i| i128::from(i == j)).collect())
                .collect()
        } else {
            integer_kernel(&perp, n)
        };
        let h = hnf(sat, n);
        let basis = h
            .into_iter()
            .map(|r| r.into_iter().map(|v| i64::try_from(v).map_err(|_| overflow())).collect())
            .collect::<Result<Vec<Vec<i64>>>>()?;
        Ok(Lattice { n, basis })
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// `sqrt(det Gram)`; 1 for the trivial lattice.
    pub fn covolume(&self) -> f64 {
        if self.basis.is_empty() {
            return 1.0;
        }
        let j = self.rank();
        let gram: Vec<Vec<i128>> = (0..j)
            .map(|a| {
                (0..j)
                    .map(|b| {
                        self.basis[a]
                            .iter()
                            .zip(&self.basis[b])
                            .map(|(x, y)| *x as i128 * *y as i128)
                            .sum()
                    })
                    .collect()
            })
            .collect();
        (bareiss_det(gram) as f64).sqrt()
    }

    /// Exact membership `k in span(basis)` (equivalent to the lattice since
    /// it is saturated).
    pub fn contains(&self, k: &[i64]) -> bool {
        if k.iter().all(|&v| v == 0) {
            return true;
        }
        if self.basis.is_empty() {
            return false;
        }
        let mut rows: Vec<Vec<i128>> = self
            .basis
            .iter()
            .map(|r| r.iter().map(|&v| v as i128).collect())
            .collect();
        rows.push(k.iter().map(|&v| v as i128).collect());
        rank(rows, self.n) == self.rank()
    }

    pub fn is_sublattice_of(&self, other: &Lattice) -> bool {
        self.basis.iter().all(|b| other.contains(b))
    }

    /// Short identifier such as `[1,0,0;0,1,-1]`.
    pub fn id(&self) -> String {
        let rows: Vec<String> = self
            .basis
            .iter()
            .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        format!("[{}]", rows.join(";"))
    }
}

fn overflow() -> NekError {
    NekError::Invariant("lattice entry overflows i64".into())
}

fn rank(mut rows: Vec<Vec<i128>>, n: usize) -> usize {
    rows = hnf(rows, n);
    rows.len()
}

/// Row Hermite normal form with zero rows dropped: positive pivots, entries
/// above each pivot reduced into `[0, pivot)`.
pub(crate) fn hnf(mut a: Vec<Vec<i128>>, n: usize) -> Vec<Vec<i128>> {
    let m = a.len();
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        // Euclid among rows r.. in column c.
        loop {
            let mut piv = None;
            for i in r..m {
                if a[i][c] != 0 && piv.is_none_or(|p: usize| a[i][c].abs() < a[p][c].abs()) {
                    piv = Some(i);
                }
            }
            let Some(p) = piv else { break };
            a.swap(r, p);
            let mut done = true;
            for i in r + 1..m {
                if a[i][c] != 0 {
                    let q = a[i][c].div_euclid(a[r][c]);
                    let pivot_row = a[r].clone();
                    for (x, y) in a[i].iter_mut().zip(&pivot_row) {
                        *x -= q * y;
                    }
                    if a[i][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if a[r][c] == 0 {
            continue;
        }
        if a[r][c] < 0 {
            for x in a[r].iter_mut() {
                *x = -*x;
            }
        }
        let pivot_row = a[r].clone();
        for i in 0..r {
            let q = a[i][c].div_euclid(pivot_row[c]);
            for (x, y) in a[i].iter_mut().zip(&pivot_row) {
                *x -= q * y;
            }
        }
        r += 1;
    }
    a.truncate(r);
    a
}

/// Basis (as rows) of `{x in Z^n : A x = 0}` via unimodular column
/// reduction.
pub(crate) fn integer_kernel(a: &[Vec<i128>], n: usize) -> Vec<Vec<i128>> {
    let mut m: Vec<Vec<i128>> = a.to_vec();
    let mut u: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect();
    let col_op = |m: &mut Vec<Vec<i128>>, u: &mut Vec<Vec<i128>>, dst: usize, src: usize, q: i128| {
        for row in m.iter_mut() {
            row[dst] -= q * row[src];
        }
        for row in u.iter_mut() {
            row[dst] -= q * row[src];
        }
    };
    let swap = |m: &mut Vec<Vec<i128>>, u: &mut Vec<Vec<i128>>, x: usize, y: usize| {
        for row in m.iter_mut() {
            row.swap(x, y);
        }
        for row in u.iter_mut() {
            row.swap(x, y);
        }
    };
    let mut pc = 0;
    for r in 0..m.len() {
        if pc == n {
            break;
        }
        loop {
            let mut piv = None;
            for c in pc..n {
                if m[r][c] != 0 && piv.is_none_or(|p: usize| m[r][c].abs() < m[r][p].abs()) {
                    piv = Some(c);
                }
            }
            let Some(p) = piv else { break };
            swap(&mut m, &mut u, pc, p);
            let mut done = true;
            for c in pc + 1..n {
                if m[r][c] != 0 {
                    let q = m[r][c].div_euclid(m[r][pc]);
                    col_op(&mut m, &mut u, c, pc, q);
                    if m[r][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if m[r][pc] != 0 {
            pc += 1;
        }
    }
    (pc..n).map(|c| (0..n).map(|i| u[i][c]).collect()).collect()
}

fn bareiss_det(mut a: Vec<Vec<i128>>) -> i128 {
    let n = a.len();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Nonzero `k` with `|k|_1 <= kmax`, one per sign pair (first nonzero
/// entry positive), in lexicographic order.
pub fn short_vectors(n: usize, kmax: i64) -> Vec<Vec<i64>> {
    crate::fourier::l1_ball(n, kmax)
        .into_iter()
        .map(|k| k.0)
        .filter(|k| k.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0))
        .collect()
}

/// Every saturated lattice of rank `j` spanned by vectors with
/// `|k|_1 <= floor(K)`, deduplicated and in canonical order. `cap` bounds
/// the number of generator subsets examined.
pub fn enumerate_lattices(n: usize, k: f64, j: usize, cap: usize) -> Result<Vec<Lattice>> {
    if j >= n {
        return domain("lattice rank must satisfy j <= n - 1");
    }
    if !(k >= 1.0) {
        return domain("cutoff K must be at least 1");
    }
    if j == 0 {
        return Ok(vec![Lattice::trivial(n)]);
    }
    let vs = short_vectors(n, k.floor() as i64);
    let attempted = binomial(vs.len(), j);
    if attempted > cap {
        return Err(NekError::Budget { attempted, cap });
    }
    let mut out = BTreeSet::new();
    let mut idx: Vec<usize> = (0..j).collect();
    loop {
        let gens: Vec<Vec<i64>> = idx.iter().map(|&i| vs[i].clone()).collect();
        let l = Lattice::saturate(n, &gens)?;
        if l.rank() == j {
            out.insert(l);
        }
        // Next combination.
        let mut p = j;
        loop {
            if p == 0 {
                return Ok(out.into_iter().collect());
            }
            p -= 1;
            if idx[p] < vs.len() - j + p {
                idx[p] += 1;
                for q in p + 1..j {
                    idx[q] = idx[q - 1] + 1;
                }
                break;
            }
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r.min(usize::MAX as u128) as usize
}
