use std::sync::OnceLock;

use super::warping::{Interval, WarpingFunction};
use crate::error::{param, Error, Result};
use crate::metric::FiniteLengthSpace;
use crate::scalar::{cmp_scalar, Scalar};

/// Point of a cone: a time in the interval and a fiber point index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConePoint<T> {
    pub t: T,
    pub x: usize,
}

impl<T> ConePoint<T> {
    pub fn new(t: T, x: usize) -> Self {
        Self { t, x }
    }
}

/// Causal classification of an ordered pair `(p, q)`, looking from `p` to the future.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CausalClass {
    Chronological,
    /// Causal but not chronological (includes `p == q`).
    Causal,
    None,
}

impl CausalClass {
    pub fn is_causal(self) -> bool {
        self != CausalClass::None
    }
}

/// Discretised generalized cone `I x_f X`: the nodes `(t_i, x_j)` with
/// `t_i = a + i (b - a) / n_t`. Node `(i, j)` has flat index `i * |X| + j`.
#[derive(Debug)]
pub struct ConeGrid<T> {
    interval: Interval<T>,
    fiber: FiniteLengthSpace<T>,
    warping: WarpingFunction<T>,
    n_t: usize,
    times: Vec<T>,
    g: Vec<T>,
    step: T,
    /// Fiber points sorted by distance from each fiber point, ties by index.
    by_distance: Vec<u32>,
    covers: OnceLock<CoverGraph>,
}

impl<T: Scalar> Clone for ConeGrid<T> {
    fn clone(&self) -> Self {
        Self {
            interval: self.interval,
            fiber: self.fiber.clone(),
            warping: self.warping.clone(),
            n_t: self.n_t,
            times: self.times.clone(),
            g: self.g.clone(),
            step: self.step,
            by_distance: self.by_distance.clone(),
            covers: OnceLock::new(),
        }
    }
}

impl<T: Scalar> ConeGrid<T> {
    pub fn new(fiber: FiniteLengthSpace<T>, warping: WarpingFunction<T>, n_t: usize) -> Result<Self> {
        if n_t == 0 {
            return Err(param("n_t", "must be positive"));
        }
        let f = fiber.len();
        if (n_t + 1).saturating_mul(f) > u32::MAX as usize / 2 {
            return Err(Error::SizeBound { size: (n_t + 1) * f, limit: u32::MAX as usize / 2 });
        }
        let interval = warping.domain();
        let times = interval.uniform_grid(n_t);
        let g = times.iter().map(|&t| warping.reciprocal_antiderivative(t)).collect();
        let mut by_distance = Vec::with_capacity(f * f);
        for x in 0..f {
            let mut order: Vec<u32> = (0..f as u32).collect();
            order.sort_by(|&u, &v| cmp_scalar(fiber.dist(x, u as usize), fiber.dist(x, v as usize)).then(u.cmp(&v)));
            by_distance.extend(order);
        }
        Ok(Self {
            interval,
            fiber,
            warping,
            n_t,
            times,
            g,
            step: interval.length() / T::from_usize_lossy(n_t),
            by_distance,
            covers: OnceLock::new(),
        })
    }

    pub fn interval(&self) -> Interval<T> {
        self.interval
    }

    pub fn fiber(&self) -> &FiniteLengthSpace<T> {
        &self.fiber
    }

    pub fn warping(&self) -> &WarpingFunction<T> {
        &self.warping
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_levels(&self) -> usize {
        self.n_t + 1
    }

    pub fn fiber_len(&self) -> usize {
        self.fiber.len()
    }

    /// Number of grid nodes.
    pub fn len(&self) -> usize {
        self.n_levels() * self.fiber_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Time step `(b - a) / n_t`.
    pub fn step(&self) -> T {
        self.step
    }

    /// Tolerance for grid-induced overestimates: two time steps.
    pub fn grid_tolerance(&self) -> T {
        T::lit(2.0) * self.step
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    /// `G` at the grid levels.
    pub fn g_levels(&self) -> &[T] {
        &self.g
    }

    #[inline]
    pub fn index(&self, level: usize, x: usize) -> usize {
        level * self.fiber_len() + x
    }

    #[inline]
    pub fn level_of(&self, idx: usize) -> usize {
        idx / self.fiber_len()
    }

    #[inline]
    pub fn fiber_of(&self, idx: usize) -> usize {
        idx % self.fiber_len()
    }

    pub fn point(&self, idx: usize) -> ConePoint<T> {
        ConePoint { t: self.times[self.level_of(idx)], x: self.fiber_of(idx) }
    }

    /// Grid level whose time is nearest to `t`.
    pub fn nearest_level(&self, t: T) -> Result<usize> {
        if !self.interval.contains(t) {
            return Err(Error::InvalidInput(format!("t = {t} lies outside [{}, {}]", self.interval.a(), self.interval.b())));
        }
        let k = ((t - self.interval.a()) / self.step).round().to_usize().unwrap_or(0);
        Ok(k.min(self.n_t))
    }

    /// Flat index of a point that lies on the grid.
    pub fn locate(&self, p: ConePoint<T>) -> Result<usize> {
        let level = self.nearest_level(p.t)?;
        if (self.times[level] - p.t).abs() > T::tol_at(1e-9, p.t) * self.step.max(T::one()) {
            return Err(Error::InvalidInput(format!("t = {} is not a grid time", p.t)));
        }
        if p.x >= self.fiber_len() {
            return Err(Error::InvalidInput(format!("fiber index {} out of range", p.x)));
        }
        Ok(self.index(level, p.x))
    }

    /// Slack absorbing rounding in `d <= G(t_q) - G(t_p)`.
    #[inline]
    pub(crate) fn slack(&self, d: T, gp: T, gq: T) -> T {
        T::rel_eps() * (T::one() + d + gp.abs() + gq.abs())
    }

    #[inline]
    fn classify(&self, dt: T, d: T, gp: T, gq: T) -> CausalClass {
        if dt < T::zero() {
            return CausalClass::None;
        }
        if dt == T::zero() {
            return if d == T::zero() { CausalClass::Causal } else { CausalClass::None };
        }
        let room = gq - gp;
        let slack = self.slack(d, gp, gq);
        if d < room - slack {
            CausalClass::Chronological
        } else if d <= room + slack {
            CausalClass::Causal
        } else {
            CausalClass::None
        }
    }

    /// Exact causal predicate: `q` is in the causal future of `p` iff
    /// `t_p <= t_q` and `d(x_p, x_q) <= G(t_q) - G(t_p)`; chronological iff
    /// both inequalities are strict.
    pub fn causal_relation(&self, p: ConePoint<T>, q: ConePoint<T>) -> Result<CausalClass> {
        for pt in [p, q] {
            if !self.interval.contains(pt.t) {
                return Err(Error::InvalidInput(format!(
                    "t = {} lies outside [{}, {}]",
                    pt.t,
                    self.interval.a(),
                    self.interval.b()
                )));
            }
            if pt.x >= self.fiber_len() {
                return Err(Error::InvalidInput(format!("fiber index {} out of range", pt.x)));
            }
        }
        let g = |t: T| self.warping.reciprocal_antiderivative(t);
        Ok(self.classify(q.t - p.t, self.fiber.dist(p.x, q.x), g(p.t), g(q.t)))
    }

    /// Causal class of grid nodes `(u -> v)` by flat index.
    #[inline]
    pub fn node_relation(&self, u: usize, v: usize) -> CausalClass {
        let (i, k) = (self.level_of(u), self.level_of(v));
        if k < i {
            return CausalClass::None;
        }
        let d = self.fiber.dist(self.fiber_of(u), self.fiber_of(v));
        self.classify(self.times[k] - self.times[i], d, self.g[i], self.g[k])
    }

    /// Causal in either direction.
    #[inline]
    pub fn related(&self, u: usize, v: usize) -> bool {
        self.node_relation(u, v).is_causal() || self.node_relation(v, u).is_causal()
    }

    /// Product metric `|t - t'| + d(x, x')`.
    pub fn product_distance(&self, u: usize, v: usize) -> T {
        (self.times[self.level_of(u)] - self.times[self.level_of(v)]).abs()
            + self.fiber.dist(self.fiber_of(u), self.fiber_of(v))
    }

    #[inline]
    pub(crate) fn sorted_neighbours(&self, x: usize) -> &[u32] {
        let f = self.fiber_len();
        &self.by_distance[x * f..(x + 1) * f]
    }

    /// Smallest level `k > i` with `d <= G_k - G_i` (up to slack), if any.
    fn entry_level(&self, i: usize, d: T) -> Option<usize> {
        let gi = self.g[i];
        let ok = |k: usize| d <= self.g[k] - gi + self.slack(d, gi, self.g[k]);
        let (mut lo, mut hi) = (i + 1, self.n_t + 1);
        if lo > self.n_t || !ok(self.n_t) {
            return None;
        }
        while lo < hi {
            let mid = (lo + hi) / 2;
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    }

    /// Hasse diagram of the causal order restricted to the grid, as an
    /// undirected graph weighted by level differences. Any causal pair is
    /// joined by a level-monotone chain of cover edges whose weights telescope,
    /// so shortest paths over covers equal shortest paths over all causal pairs.
    pub(crate) fn covers(&self) -> &CoverGraph {
        self.covers.get_or_init(|| self.build_covers())
    }

    /// Number of undirected edges in the cover graph (built on first use).
    pub fn cover_edge_count(&self) -> usize {
        self.covers().edge_count()
    }

    fn build_covers(&self) -> CoverGraph {
        let f = self.fiber_len();
        let n = self.len();
        let mut up: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
        let mut found: Vec<(usize, usize)> = Vec::new();
        for i in 0..self.n_t {
            for x in 0..f {
                found.clear();
                for &y in self.sorted_neighbours(x) {
                    let y = y as usize;
                    let Some(k) = self.entry_level(i, self.fiber.dist(x, y)) else { continue };
                    let blocked = found.iter().any(|&(m, z)| {
                        m <= k && {
                            let d = self.fiber.dist(z, y);
                            d <= self.g[k] - self.g[m] + self.slack(d, self.g[m], self.g[k])
                        }
                    });
                    if !blocked {
                        found.push((k, y));
                    }
                }
                let u = self.index(i, x);
                for &(k, y) in &found {
                    up[u].push((self.index(k, y) as u32, (k - i) as u32));
                }
            }
        }
        CoverGraph::from_up_edges(&up)
    }
}

/// Undirected cover graph in compressed form; weights are level differences.
#[derive(Clone, Debug)]
pub(crate) struct CoverGraph {
    pub offsets: Vec<u32>,
    pub targets: Vec<u32>,
    pub weights: Vec<u32>,
    pub max_weight: u32,
}

impl CoverGraph {
    fn from_up_edges(up: &[Vec<(u32, u32)>]) -> Self {
        let n = up.len();
        let mut degree = vec![0u32; n];
        for (u, edges) in up.iter().enumerate() {
            degree[u] += edges.len() as u32;
            for &(v, _) in edges {
                degree[v as usize] += 1;
            }
        }
        let mut offsets = vec![0u32; n + 1];
        for u in 0..n {
            offsets[u + 1] = offsets[u] + degree[u];
        }
        let total = offsets[n] as usize;
        let mut fill: Vec<u32> = offsets[..n].to_vec();
        let mut targets = vec![0u32; total];
        let mut weights = vec![0u32; total];
        let mut max_weight = 1;
        for (u, edges) in up.iter().enumerate() {
            for &(v, w) in edges {
                max_weight = max_weight.max(w);
                for (a, b) in [(u, v as usize), (v as usize, u)] {
                    let slot = fill[a] as usize;
                    targets[slot] = b as u32;
                    weights[slot] = w;
                    fill[a] += 1;
                }
            }
        }
        Self { offsets, targets, weights, max_weight }
    }

    #[inline]
    pub fn edges(&self, u: usize) -> std::ops::Range<usize> {
        self.offsets[u] as usize..self.offsets[u + 1] as usize
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }
}
