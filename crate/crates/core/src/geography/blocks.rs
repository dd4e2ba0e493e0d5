use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::lattice::{enumerate_lattices, short_vectors, Lattice};
use super::params::Schedule;
use crate::error::{domain, NekError, Result};
use crate::frequency::FrequencyMap;

/// A resonant block: multiplicity plus lattice (absent for `j = 0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockId {
    pub multiplicity: usize,
    pub lattice: Option<Lattice>,
    pub epsilon: f64,
}

impl BlockId {
    pub fn label(&self) -> String {
        match &self.lattice {
            Some(l) => l.id(),
            None => "0".into(),
        }
    }
}

/// One enumerated lattice with its width and the indices of the short
/// vectors it contains.
#[derive(Debug, Clone)]
pub struct Zone {
    pub lattice: Lattice,
    pub delta: f64,
    members: Vec<usize>,
}

/// Answer of the resolution-limited extended block test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtMembership {
    pub member: bool,
    pub resolution: f64,
    pub nodes: usize,
}

/// All zones of one `epsilon` around `I_0`, ready for membership queries.
pub struct Geography<'a> {
    map: &'a dyn FrequencyMap,
    center: Vec<f64>,
    schedule: Schedule,
    short: Vec<Vec<i64>>,
    ranks: Vec<Vec<Zone>>,
    index: BTreeMap<Lattice, (usize, usize)>,
    /// Node cap of a single flood fill.
    pub max_nodes: usize,
}

/// Cap on the generator subsets examined per rank.
pub const DEFAULT_ENUMERATION_CAP: usize = 2_000_000;
pub const DEFAULT_MAX_NODES: usize = 200_000;

impl<'a> Geography<'a> {
    pub fn new(map: &'a dyn FrequencyMap, center: Vec<f64>, schedule: Schedule) -> Result<Self> {
        Self::with_cap(map, center, schedule, DEFAULT_ENUMERATION_CAP)
    }

    pub fn with_cap(
        map: &'a dyn FrequencyMap,
        center: Vec<f64>,
        schedule: Schedule,
        cap: usize,
    ) -> Result<Self> {
        let n = map.dim();
        if center.len() != n || schedule.params.n != n {
            return domain("geography dimension differs from the frequency map");
        }
        // The Euclidean ball must sit inside the declared box.
        let inside = center
            .iter()
            .zip(map.center())
            .all(|(c, m)| (c - m).abs() + schedule.big_r <= map.radius() * (1.0 + 1e-12));
        if !inside {
            return domain(format!(
                "ball B(I0, R = {:.4}) leaves the domain of the frequency map",
                schedule.big_r
            ));
        }
        let short = short_vectors(n, schedule.k.floor() as i64);
        let mut ranks = Vec::with_capacity(n);
        let mut index = BTreeMap::new();
        for j in 0..n {
            let zones: Vec<Zone> = enumerate_lattices(n, schedule.k, j, cap)?
                .into_iter()
                .map(|l| {
                    let members = (0..short.len()).filter(|&i| l.contains(&short[i])).collect();
                    Zone {
                        delta: schedule.delta(&l),
                        lattice: l,
                        members,
                    }
                })
                .collect();
            for (idx, z) in zones.iter().enumerate() {
                index.insert(z.lattice.clone(), (j, idx));
            }
            ranks.push(zones);
        }
        Ok(Geography {
            map,
            center,
            schedule,
            short,
            ranks,
            index,
            max_nodes: DEFAULT_MAX_NODES,
        })
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn map(&self) -> &dyn FrequencyMap {
        self.map
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Zones of rank `j` in canonical order.
    pub fn zones(&self, j: usize) -> &[Zone] {
        &self.ranks[j]
    }

    pub fn lattices(&self, j: usize) -> Vec<Lattice> {
        self.ranks[j].iter().map(|z| z.lattice.clone()).collect()
    }

    /// `k . omega(I)` for every short vector.
    pub fn dots(&self, i: &[f64]) -> Vec<f64> {
        let w = self.map.omega(i);
        self.short
            .iter()
            .map(|k| k.iter().zip(&w).map(|(a, b)| *a as f64 * b).sum())
            .collect()
    }

    fn zone_hit(&self, dots: &[f64], z: &Zone) -> bool {
        z.members.iter().all(|&m| dots[m].abs() < z.delta)
    }

    fn any_zone(&self, dots: &[f64], j: usize) -> bool {
        j < self.ranks.len() && self.ranks[j].iter().any(|z| self.zone_hit(dots, z))
    }

    /// Ranked zones containing the point, as `(rank, index)`.
    pub fn containing_zones(&self, i: &[f64], j: usize) -> Vec<usize> {
        let dots = self.dots(i);
        (0..self.ranks[j].len())
            .filter(|&z| self.zone_hit(&dots, &self.ranks[j][z]))
            .collect()
    }

    fn zone_for(&self, l: &Lattice) -> Zone {
        match self.index.get(l) {
            Some(&(j, idx)) => self.ranks[j][idx].clone(),
            None => Zone {
                lattice: l.clone(),
                delta: self.schedule.delta(l),
                members: (0..self.short.len()).filter(|&i| l.contains(&self.short[i])).collect(),
            },
        }
    }

    /// `|k . omega(I)| < delta_L` for every `k in L` with `|k|_1 <= K`.
    pub fn zone_membership(&self, i: &[f64], l: &Lattice) -> bool {
        self.zone_hit(&self.dots(i), &self.zone_for(l))
    }

    fn block_hit(&self, dots: &[f64], z: &Zone) -> bool {
        let j = z.lattice.rank();
        if j == 0 {
            return !self.any_zone(dots, 1);
        }
        self.zone_hit(dots, z) && (j + 1 == self.dim() || !self.any_zone(dots, j + 1))
    }

    /// `I in Z_L` minus every zone of rank `j + 1`.
    pub fn block_membership(&self, i: &[f64], l: &Lattice) -> bool {
        self.block_hit(&self.dots(i), &self.zone_for(l))
    }

    /// Lowest multiplicity block containing `I`, first lattice in canonical
    /// order on ties.
    pub fn classify(&self, i: &[f64]) -> Result<BlockId> {
        let dots = self.dots(i);
        let n = self.dim();
        for j in 0..n {
            if j + 1 < n && self.any_zone(&dots, j + 1) {
                continue;
            }
            let block = if j == 0 {
                Some(None)
            } else {
                self.ranks[j]
                    .iter()
                    .find(|z| self.zone_hit(&dots, z))
                    .map(|z| Some(z.lattice.clone()))
            };
            if let Some(lattice) = block {
                return Ok(BlockId {
                    multiplicity: j,
                    lattice,
                    epsilon: self.schedule.epsilon,
                });
            }
        }
        Err(NekError::Invariant(format!("covering violated: no block contains {i:?}")))
    }

    fn inner_radius(&self) -> f64 {
        self.schedule.big_r - self.schedule.rho
    }

    /// `I in B_2(I_0, R - rho)`.
    pub fn in_inner_ball(&self, i: &[f64]) -> bool {
        dist(i, &self.center) <= self.inner_radius()
    }

    /// Default flood-fill step for a lattice: `r_L / 8`.
    pub fn default_resolution(&self, l: &Lattice) -> f64 {
        self.schedule.r_lattice(l) / 8.0
    }

    /// Resolution-limited membership in the extended block of `L`.
    ///
    /// Sound under-approximation: the point must lie in
    /// `Z_L cap B(I_0, R - rho)`, and a flood fill at step `resolution` on
    /// the plane `I + w + <L>` must reach `D_L cap B(I_0, R - rho)`, where
    /// `w` is zero or a perpendicular offset of length at most `r_L` whose
    /// segment from `I` stays inside the zone. Every such path lies in the
    /// `r_L` tube of one fast-drift plane, hence in a single disc.
    pub fn ext_block_membership(
        &self,
        i: &[f64],
        l: &Lattice,
        resolution: f64,
    ) -> Result<ExtMembership> {
        if !(resolution > 0.0) {
            return domain("flood-fill resolution must be positive");
        }
        let z = self.zone_for(l);
        let answer = |member, nodes| ExtMembership {
            member,
            resolution,
            nodes,
        };
        if !self.in_inner_ball(i) {
            return Ok(answer(false, 0));
        }
        let dots = self.dots(i);
        if l.rank() == 0 {
            return Ok(answer(self.block_hit(&dots, &z), 1));
        }
        if !self.zone_hit(&dots, &z) {
            return Ok(answer(false, 1));
        }
        if self.block_hit(&dots, &z) {
            return Ok(answer(true, 1));
        }
        let (plane, perp) = plane_frames(l);
        let r_l = self.schedule.r_lattice(l);
        let mut total = 0;
        let mut offsets = vec![vec![0.0; self.dim()]];
        for u in &perp {
            for t in [0.5 * r_l, r_l] {
                for s in [1.0, -1.0] {
                    offsets.push(u.iter().map(|x| s * t * x).collect());
                }
            }
        }
        for w in offsets {
            let len = norm(&w);
            if len > 0.0 {
                let steps = (len / resolution).ceil().max(1.0) as usize;
                let clear = (1..=steps).all(|s| {
                    let p: Vec<f64> = axpy(i, s as f64 / steps as f64, &w);
                    self.in_inner_ball(&p) && self.zone_hit(&self.dots(&p), &z)
                });
                if !clear {
                    continue;
                }
            }
            let base = axpy(i, 1.0, &w);
            let (found, nodes) = self.flood(&base, &plane, &z, resolution, total)?;
            total += nodes;
            if found {
                return Ok(answer(true, total));
            }
        }
        Ok(answer(false, total))
    }

    fn flood(
        &self,
        base: &[f64],
        plane: &[Vec<f64>],
        z: &Zone,
        h: f64,
        used: usize,
    ) -> Result<(bool, usize)> {
        let j = plane.len();
        let point = |m: &[i64]| -> Vec<f64> {
            let mut p = base.to_vec();
            for (c, e) in m.iter().zip(plane) {
                for (x, y) in p.iter_mut().zip(e) {
                    *x += h * *c as f64 * y;
                }
            }
            p
        };
        let mut seen: HashSet<Vec<i64>> = HashSet::new();
        let mut queue = VecDeque::new();
        let origin = vec![0i64; j];
        seen.insert(origin.clone());
        queue.push_back(origin);
        let mut visited = 0;
        while let Some(m) = queue.pop_front() {
            let p = point(&m);
            if !self.in_inner_ball(&p) {
                continue;
            }
            let dots = self.dots(&p);
            if !self.zone_hit(&dots, z) {
                continue;
            }
            visited += 1;
            if used + visited > self.max_nodes {
                return Err(NekError::Budget {
                    attempted: used + visited,
                    cap: self.max_nodes,
                });
            }
            if self.block_hit(&dots, z) {
                return Ok((true, visited));
            }
            for a in 0..j {
                for s in [1, -1] {
                    let mut next = m.clone();
                    next[a] += s;
                    if seen.insert(next.clone()) {
                        queue.push_back(next);
                    }
                }
            }
        }
        Ok((false, visited))
    }
}

/// Orthonormal bases of `<L>` and of its orthogonal complement.
pub fn plane_frames(l: &Lattice) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = l.n;
    let mut plane: Vec<Vec<f64>> = Vec::new();
    let rows = l.basis.iter().map(|r| r.iter().map(|&v| v as f64).collect::<Vec<f64>>());
    for v in rows {
        if let Some(u) = reduce(v, &plane) {
            plane.push(u);
        }
    }
    let mut perp: Vec<Vec<f64>> = Vec::new();
    for e in 0..n {
        let v: Vec<f64> = (0..n).map(|i| f64::from(u8::from(i == e))).collect();
        let all: Vec<Vec<f64>> = plane.iter().chain(&perp).cloned().collect();
        if let Some(u) = reduce(v, &all) {
            perp.push(u);
        }
    }
    (plane, perp)
}

fn reduce(mut v: Vec<f64>, against: &[Vec<f64>]) -> Option<Vec<f64>> {
    for _ in 0..2 {
        for u in against {
            let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= d * y;
            }
        }
    }
    let len = norm(&v);
    (len > 1e-9).then(|| v.iter().map(|x| x / len).collect())
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn axpy(x: &[f64], t: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + t * b).collect()
}
