//! Weighted undirected graphs and single-source shortest paths.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::{cmp_scalar, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedEdge<T> {
    pub u: usize,
    pub v: usize,
    pub weight: T,
}

impl<T> WeightedEdge<T> {
    pub fn new(u: usize, v: usize, weight: T) -> Self {
        Self { u, v, weight }
    }
}

/// Compressed adjacency lists.
#[derive(Clone, Debug)]
pub(crate) struct Adjacency<T> {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<T>,
}

impl<T: Scalar> Adjacency<T> {
    pub(crate) fn undirected(n: usize, edges: &[WeightedEdge<T>]) -> Self {
        let mut degree = vec![0usize; n];
        for e in edges {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0usize; offsets[n]];
        let mut weights = vec![T::zero(); offsets[n]];
        for e in edges {
            for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                targets[fill[a]] = b;
                weights[fill[a]] = e.weight;
                fill[a] += 1;
            }
        }
        Self { offsets, targets, weights }
    }

    pub(crate) fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub(crate) fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.offsets[u]..self.offsets[u + 1];
        self.targets[r.clone()].iter().copied().zip(self.weights[r].iter().copied())
    }

    /// Dijkstra from `source`; unreachable vertices get `+inf`.
    pub(crate) fn shortest_paths(&self, source: usize) -> Vec<T> {
        let n = self.len();
        let mut dist = vec![T::infinity(); n];
        let mut heap = BinaryHeap::new();
        dist[source] = T::zero();
        heap.push(Reverse(HeapItem { key: T::zero(), node: source }));
        while let Some(Reverse(HeapItem { key, node })) = heap.pop() {
            if key > dist[node] {
                continue;
            }
            for (v, w) in self.neighbors(node) {
                let nd = key + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Reverse(HeapItem { key: nd, node: v }));
                }
            }
        }
        dist
    }

    pub(crate) fn components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut label = vec![usize::MAX; n];
        let mut out = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut comp = vec![s];
            label[s] = id;
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                for (v, _) in self.neighbors(u) {
                    if label[v] == usize::MAX {
                        label[v] = id;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

pub(crate) fn validate_edges<T: Scalar>(n: usize, edges: &[WeightedEdge<T>]) -> Result<()> {
    for (k, e) in edges.iter().enumerate() {
        if e.u >= n || e.v >= n {
            return Err(Error::InvalidInput(format!(
                "edge {k} ({}, {}) references a vertex outside 0..{n}",
                e.u, e.v
            )));
        }
        if e.u == e.v {
            return Err(Error::InvalidInput(format!("edge {k} is a self-loop at {}", e.u)));
        }
        if !(e.weight > T::zero()) || !e.weight.is_finite() {
            return Err(Error::InvalidInput(format!(
                "edge {k} ({}, {}) has non-positive or non-finite weight {}",
                e.u, e.v, e.weight
            )));
        }
    }
    Ok(())
}

/// Heap entry ordered by key, then by node index so pops are deterministic.
#[derive(Clone, Copy, Debug)]
pub(crate) struct HeapItem<T> {
    pub key: T,
    pub node: usize,
}

impl<T: Scalar> PartialEq for HeapItem<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Scalar> Eq for HeapItem<T> {}
impl<T: Scalar> PartialOrd for HeapItem<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for HeapItem<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_scalar(self.key, other.key).then(self.node.cmp(&other.node))
    }
}
