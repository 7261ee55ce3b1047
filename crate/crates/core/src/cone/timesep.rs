use rayon::prelude::*;

use super::grid::{CausalClass, ConeGrid};
use crate::error::{param, Error, Result};
use crate::matrix::SquareMatrix;
use crate::scalar::Scalar;

use super::nulldist::MATRIX_POINT_LIMIT;

const NONE: u32 = u32::MAX;

/// Time separation from one source node: a longest-path value for every node,
/// with predecessors along the maximising chain.
#[derive(Clone, Debug)]
pub struct TimeSeparationRow<T> {
    pub source: usize,
    pub values: Vec<T>,
    /// Nodes reachable from the source by future-directed causal steps.
    pub reachable: Vec<bool>,
    pred: Vec<u32>,
}

impl<T: Scalar> TimeSeparationRow<T> {
    /// Chain of grid nodes realising `values[target]`, source first.
    pub fn path_to(&self, target: usize) -> Option<Vec<usize>> {
        if !self.reachable[target] {
            return None;
        }
        let mut out = vec![target];
        let mut v = target;
        while v != self.source {
            v = self.pred[v] as usize;
            out.push(v);
        }
        out.reverse();
        Some(out)
    }
}

impl<T: Scalar> ConeGrid<T> {
    /// Longest-path dynamic programme over causal steps of `stride` levels.
    /// A step from `(t, x)` to `(t', y)` has length
    /// `sqrt((t' - t)^2 - f(t_mid)^2 d(x,y)^2)`, clamped at zero and zero for
    /// steps that are not chronological. Targets off the stride lattice are
    /// reached by one final shorter step.
    pub fn time_separation_row_strided(&self, source: usize, stride: usize) -> Result<TimeSeparationRow<T>> {
        if stride == 0 {
            return Err(param("stride", "must be positive"));
        }
        if source >= self.len() {
            return Err(Error::InvalidInput(format!("node {source} out of range")));
        }
        let f = self.fiber_len();
        let n = self.len();
        let (i0, x0) = (self.level_of(source), self.fiber_of(source));
        let mut values = vec![T::zero(); n];
        let mut reachable = vec![false; n];
        let mut pred = vec![NONE; n];
        reachable[source] = true;
        let neg = T::neg_infinity();
        let mut cur = vec![neg; f];
        cur[x0] = T::zero();
        let mut level = i0;
        let mut next = vec![neg; f];
        while level < self.n_t() {
            let lattice_next = (level + stride).min(self.n_t());
            // Off-lattice targets between level+1 and lattice_next-1 come from `level` directly.
            for target_level in level + 1..=lattice_next {
                self.dp_step(level, target_level, &cur, &mut next, &mut pred);
                for y in 0..f {
                    if next[y] > neg {
                        let v = self.index(target_level, y);
                        reachable[v] = true;
                        values[v] = next[y].max(T::zero());
                    }
                }
                if target_level == lattice_next {
                    std::mem::swap(&mut cur, &mut next);
                }
            }
            level = lattice_next;
        }
        for v in 0..n {
            if values[v] > T::zero() && self.node_relation(source, v) != CausalClass::Chronological {
                values[v] = T::zero();
            }
        }
        Ok(TimeSeparationRow { source, values, reachable, pred })
    }

    fn dp_step(&self, from: usize, to: usize, cur: &[T], next: &mut [T], pred: &mut [u32]) {
        let f = self.fiber_len();
        let neg = T::neg_infinity();
        next.iter_mut().for_each(|v| *v = neg);
        let (g0, g1) = (self.g_levels()[from], self.g_levels()[to]);
        let room = g1 - g0;
        let dt = self.times()[to] - self.times()[from];
        let fm = self.warping().value((self.times()[to] + self.times()[from]) / T::lit(2.0));
        let fiber = self.fiber();
        for x in 0..f {
            let base = cur[x];
            if base == neg {
                continue;
            }
            for &y in self.sorted_neighbours(x) {
                let y = y as usize;
                let d = fiber.dist(x, y);
                let slack = self.slack(d, g0, g1);
                if d > room + slack {
                    break;
                }
                let len = if d < room - slack {
                    let fd = fm * d;
                    ((dt - fd) * (dt + fd)).max(T::zero()).sqrt()
                } else {
                    T::zero()
                };
                let cand = base + len;
                if cand > next[y] {
                    next[y] = cand;
                    pred[self.index(to, y)] = self.index(from, x) as u32;
                }
            }
        }
    }

    /// Length the programme assigns to a causal step `u -> v` (any level gap).
    pub fn step_length(&self, u: usize, v: usize) -> T {
        let (i, k) = (self.level_of(u), self.level_of(v));
        if k <= i {
            return T::zero();
        }
        let (g0, g1) = (self.g_levels()[i], self.g_levels()[k]);
        let d = self.fiber().dist(self.fiber_of(u), self.fiber_of(v));
        if d >= g1 - g0 - self.slack(d, g0, g1) {
            return T::zero();
        }
        let dt = self.times()[k] - self.times()[i];
        let fd = self.warping().value((self.times()[k] + self.times()[i]) / T::lit(2.0)) * d;
        ((dt - fd) * (dt + fd)).max(T::zero()).sqrt()
    }

    /// Single-step time separation from `source`.
    pub fn time_separation_row(&self, source: usize) -> TimeSeparationRow<T> {
        self.time_separation_row_strided(source, 1).expect("valid stride and source")
    }

    pub fn time_separation_rows(&self, sources: &[usize]) -> Vec<TimeSeparationRow<T>> {
        sources.par_iter().map(|&s| self.time_separation_row(s)).collect()
    }

    /// Time separation between two nodes (zero unless `q` is in the chronological future of `p`).
    pub fn time_separation_between(&self, p: usize, q: usize) -> T {
        if self.level_of(q) <= self.level_of(p) {
            return T::zero();
        }
        self.time_separation_row(p).values[q]
    }

    /// Full time-separation matrix; refused above [`MATRIX_POINT_LIMIT`] nodes.
    pub fn time_separation_matrix(&self) -> Result<SquareMatrix<T>> {
        let n = self.len();
        if n > MATRIX_POINT_LIMIT {
            return Err(Error::SizeBound { size: n, limit: MATRIX_POINT_LIMIT });
        }
        let sources: Vec<usize> = (0..n).collect();
        let rows = self.time_separation_rows(&sources);
        SquareMatrix::from_flat(n, rows.into_iter().flat_map(|r| r.values).collect())
    }

    /// Reachability under single-step causal moves (reflexive and transitive).
    pub fn step_reachability_matrix(&self) -> Result<SquareMatrix<bool>> {
        let n = self.len();
        if n > MATRIX_POINT_LIMIT {
            return Err(Error::SizeBound { size: n, limit: MATRIX_POINT_LIMIT });
        }
        let sources: Vec<usize> = (0..n).collect();
        let rows = self.time_separation_rows(&sources);
        SquareMatrix::from_flat(n, rows.into_iter().flat_map(|r| r.reachable).collect())
    }
}
