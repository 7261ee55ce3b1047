use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::grid::{ConeGrid, CoverGraph};
use crate::error::{Error, Result};
use crate::graph::HeapItem;
use crate::matrix::SquareMatrix;
use crate::scalar::Scalar;

/// Largest grid for which full matrices are materialised.
pub const MATRIX_POINT_LIMIT: usize = 5000;

pub(crate) const UNREACHED: u32 = u32::MAX;

/// Reusable buffers for bucket-queue shortest paths with small integer weights.
#[derive(Default)]
pub(crate) struct LevelSearch {
    pub dist: Vec<u32>,
    pub pred: Vec<u32>,
    buckets: Vec<Vec<u32>>,
}

impl LevelSearch {
    /// Shortest level-weighted distances from all `sources` at once.
    pub fn run(&mut self, g: &CoverGraph, sources: &[usize], track_pred: bool) {
        let n = g.len();
        self.dist.clear();
        self.dist.resize(n, UNREACHED);
        if track_pred {
            self.pred.clear();
            self.pred.resize(n, UNREACHED);
        }
        let width = g.max_weight as usize + 1;
        if self.buckets.len() != width {
            self.buckets = vec![Vec::new(); width];
        }
        for b in &mut self.buckets {
            b.clear();
        }
        let mut pending = 0usize;
        for &s in sources {
            if self.dist[s] != 0 {
                self.dist[s] = 0;
                self.buckets[0].push(s as u32);
                pending += 1;
            }
        }
        let mut current = 0u32;
        while pending > 0 {
            let slot = current as usize % width;
            // Positive weights: nothing relaxed here lands back in this bucket.
            let mut bucket = std::mem::take(&mut self.buckets[slot]);
            for &u in &bucket {
                pending -= 1;
                let u = u as usize;
                if self.dist[u] != current {
                    continue;
                }
                for e in g.edges(u) {
                    let v = g.targets[e] as usize;
                    let nd = current + g.weights[e];
                    if nd < self.dist[v] {
                        self.dist[v] = nd;
                        if track_pred {
                            self.pred[v] = u as u32;
                        }
                        self.buckets[nd as usize % width].push(v as u32);
                        pending += 1;
                    }
                }
            }
            bucket.clear();
            self.buckets[slot] = bucket;
            current += 1;
        }
    }
}

/// Sources per bit-parallel batch.
const BATCH: usize = 64;

/// Bucket-queue search for up to 64 sources at once, one bit per source.
/// Sources close to each other reach a node at nearly the same level, so
/// each node is expanded for only a few levels per batch.
#[derive(Default)]
pub(crate) struct BatchSearch {
    /// `levels[b * n + v]`: level distance from source `b` to `v`.
    pub levels: Vec<u32>,
    visited: Vec<u64>,
    pending: Vec<Vec<u64>>,
    touched: Vec<Vec<u32>>,
}

impl BatchSearch {
    pub fn run(&mut self, g: &CoverGraph, sources: &[usize]) {
        debug_assert!(sources.len() <= BATCH);
        let n = g.len();
        let width = g.max_weight as usize + 1;
        self.levels.clear();
        self.levels.resize(sources.len() * n, UNREACHED);
        self.visited.clear();
        self.visited.resize(n, 0);
        if self.pending.len() != width || self.pending.first().is_some_and(|p| p.len() != n) {
            self.pending = vec![vec![0; n]; width];
            self.touched = vec![Vec::new(); width];
        }
        let mut queued = 0usize;
        for (b, &s) in sources.iter().enumerate() {
            if self.pending[0][s] == 0 {
                self.touched[0].push(s as u32);
                queued += 1;
            }
            self.pending[0][s] |= 1 << b;
        }
        let mut current = 0u32;
        while queued > 0 {
            let slot = current as usize % width;
            // Positive weights: nothing relaxed here lands back in this slot.
            let mut nodes = std::mem::take(&mut self.touched[slot]);
            queued -= nodes.len();
            for &u in &nodes {
                let u = u as usize;
                let word = std::mem::take(&mut self.pending[slot][u]);
                let fresh = word & !self.visited[u];
                if fresh == 0 {
                    continue;
                }
                self.visited[u] |= fresh;
                let mut bits = fresh;
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    self.levels[b * n + u] = current;
                    bits &= bits - 1;
                }
                for e in g.edges(u) {
                    let v = g.targets[e] as usize;
                    let reach = fresh & !self.visited[v];
                    if reach == 0 {
                        continue;
                    }
                    let to = (current + g.weights[e]) as usize % width;
                    if self.pending[to][v] == 0 {
                        self.touched[to].push(v as u32);
                        queued += 1;
                    }
                    self.pending[to][v] |= reach;
                }
            }
            nodes.clear();
            self.touched[slot] = nodes;
            current += 1;
        }
    }
}

impl<T: Scalar> ConeGrid<T> {
    /// Converts a level count to a distance; level-monotone (causal) pairs get
    /// the exact time difference.
    #[inline]
    fn levels_to_distance(&self, source_level: usize, target_level: usize, levels: u32) -> T {
        if levels == UNREACHED {
            return T::infinity();
        }
        if levels as usize == source_level.abs_diff(target_level) {
            (self.times()[target_level] - self.times()[source_level]).abs()
        } else {
            T::from_u32(levels).expect("level count fits") * self.step()
        }
    }

    fn fill_row(&self, source: usize, levels: &[u32], out: &mut [T]) {
        let f = self.fiber_len();
        let sl = self.level_of(source);
        for (k, chunk) in out.chunks_mut(f).enumerate() {
            for (x, v) in chunk.iter_mut().enumerate() {
                *v = self.levels_to_distance(sl, k, levels[k * f + x]);
            }
        }
    }

    /// Null distance `d_f(source, .)` with respect to `tau = t`.
    pub fn null_distance_row(&self, source: usize) -> Vec<T> {
        let mut search = LevelSearch::default();
        search.run(self.covers(), &[source], false);
        let mut out = vec![T::zero(); self.len()];
        self.fill_row(source, &search.dist, &mut out);
        out
    }

    /// Rows for several sources, computed in parallel, returned in input order.
    pub fn null_distance_rows(&self, sources: &[usize]) -> Vec<Vec<T>> {
        let g = self.covers();
        let n = self.len();
        sources
            .par_chunks(BATCH)
            .map_init(BatchSearch::default, |search, chunk| {
                search.run(g, chunk);
                chunk
                    .iter()
                    .enumerate()
                    .map(|(b, &s)| {
                        let mut out = vec![T::zero(); n];
                        self.fill_row(s, &search.levels[b * n..(b + 1) * n], &mut out);
                        out
                    })
                    .collect::<Vec<_>>()
            })
            .flatten()
            .collect()
    }

    /// Streams rows to `visit` in source order without storing them.
    pub fn visit_null_distance_rows(&self, sources: &[usize], mut visit: impl FnMut(usize, &[T])) {
        let g = self.covers();
        let n = self.len();
        let mut search = BatchSearch::default();
        let mut row = vec![T::zero(); n];
        for chunk in sources.chunks(BATCH) {
            search.run(g, chunk);
            for (b, &s) in chunk.iter().enumerate() {
                self.fill_row(s, &search.levels[b * n..(b + 1) * n], &mut row);
                visit(s, &row);
            }
        }
    }

    /// Full null-distance matrix; refused above [`MATRIX_POINT_LIMIT`] nodes.
    pub fn null_distance_matrix(&self) -> Result<SquareMatrix<T>> {
        let n = self.len();
        if n > MATRIX_POINT_LIMIT {
            return Err(Error::SizeBound { size: n, limit: MATRIX_POINT_LIMIT });
        }
        let sources: Vec<usize> = (0..n).collect();
        let rows = self.null_distance_rows(&sources);
        SquareMatrix::from_flat(n, rows.concat())
    }

    /// One shortest path of cover edges from `p` to `q`, if `q` is reachable.
    pub fn null_distance_path(&self, p: usize, q: usize) -> Option<Vec<usize>> {
        let mut search = LevelSearch::default();
        search.run(self.covers(), &[p], true);
        if search.dist[q] == UNREACHED {
            return None;
        }
        let mut path = vec![q];
        let mut v = q;
        while v != p {
            v = search.pred[v] as usize;
            path.push(v);
        }
        path.reverse();
        Some(path)
    }

    /// For every node, the null distance to the nearest of `sources`.
    pub fn null_distance_to_set(&self, sources: &[usize]) -> Vec<T> {
        let mut search = LevelSearch::default();
        search.run(self.covers(), sources, false);
        search
            .dist
            .iter()
            .map(|&l| if l == UNREACHED { T::infinity() } else { T::from_u32(l).expect("fits") * self.step() })
            .collect()
    }

    /// Null distance for the time function `tau(t_i, x) = tau_levels[i]`,
    /// which must be strictly increasing in `i`.
    pub fn weighted_null_distance_row(&self, source: usize, tau_levels: &[T]) -> Vec<T> {
        let g = self.covers();
        let f = self.fiber_len();
        let n = self.len();
        let mut dist = vec![T::infinity(); n];
        let mut heap = BinaryHeap::new();
        dist[source] = T::zero();
        heap.push(Reverse(HeapItem { key: T::zero(), node: source }));
        while let Some(Reverse(HeapItem { key, node })) = heap.pop() {
            if key > dist[node] {
                continue;
            }
            let lu = node / f;
            for e in g.edges(node) {
                let v = g.targets[e] as usize;
                let nd = key + (tau_levels[v / f] - tau_levels[lu]).abs();
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Reverse(HeapItem { key: nd, node: v }));
                }
            }
        }
        // Monotone paths telescope: causal pairs get the exact difference.
        let sl = self.level_of(source);
        for (v, d) in dist.iter_mut().enumerate() {
            let k = v / f;
            let direct = (tau_levels[k] - tau_levels[sl]).abs();
            if (*d - direct).abs() <= T::tol_at(1e-12, direct) && self.related(source, v) {
                *d = direct;
            }
        }
        dist
    }
}
