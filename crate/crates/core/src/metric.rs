//! Finite metric spaces, nets, correspondences and Gromov–Hausdorff distance.

use crate::error::{param, Error, Result};
use crate::graph::{validate_edges, Adjacency, WeightedEdge};
use crate::matrix::SquareMatrix;
use crate::model::comparison_angle;
use crate::scalar::Scalar;

/// Where a space's distances came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    MatrixInput,
    GraphInduced,
}

/// A finite metric space, stored as an explicit distance matrix. Graph-induced
/// spaces also keep their generating edges so they can be refined.
#[derive(Clone, Debug)]
pub struct FiniteLengthSpace<T> {
    ids: Vec<String>,
    dist: SquareMatrix<T>,
    provenance: Provenance,
    edges: Vec<WeightedEdge<T>>,
}

fn default_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

impl<T: Scalar> FiniteLengthSpace<T> {
    /// Wraps a distance matrix. Only shape and finiteness are checked; use
    /// [`validate_metric`] for the metric axioms.
    pub fn from_matrix(ids: Vec<String>, dist: SquareMatrix<T>) -> Result<Self> {
        if ids.len() != dist.n() {
            return Err(Error::InvalidInput(format!(
                "{} ids for a {}x{} matrix",
                ids.len(),
                dist.n(),
                dist.n()
            )));
        }
        if dist.n() == 0 {
            return Err(Error::InvalidInput("space has no points".into()));
        }
        if let Some(k) = dist.as_slice().iter().position(|v| !v.is_finite()) {
            let n = dist.n();
            return Err(Error::InvalidInput(format!("non-finite distance at ({}, {})", k / n, k % n)));
        }
        Ok(Self { ids, dist, provenance: Provenance::MatrixInput, edges: Vec::new() })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dist = SquareMatrix::from_rows(rows)?;
        Self::from_matrix(default_ids(dist.n()), dist)
    }

    /// Points of the real line at the given coordinates, with `|x - y|`.
    pub fn line(coords: &[T]) -> Result<Self> {
        let dist = SquareMatrix::from_fn(coords.len(), |i, j| (coords[i] - coords[j]).abs());
        Self::from_matrix(default_ids(coords.len()), dist)
    }

    /// Path graph with `n` equally spaced vertices spanning `length`.
    /// Distances are computed from coordinates, so they are exact multiples of the spacing.
    pub fn uniform_path(n: usize, length: T) -> Result<Self> {
        if n < 2 {
            return Err(param("n", "path needs at least two vertices"));
        }
        if !(length > T::zero()) {
            return Err(param("length", "must be positive"));
        }
        let step = length / T::from_usize_lossy(n - 1);
        let coords: Vec<T> = (0..n).map(|i| T::from_usize_lossy(i) * step).collect();
        let dist = SquareMatrix::from_fn(n, |i, j| (coords[i] - coords[j]).abs());
        let edges = (0..n - 1).map(|i| WeightedEdge::new(i, i + 1, coords[i + 1] - coords[i])).collect();
        Ok(Self { ids: default_ids(n), dist, provenance: Provenance::GraphInduced, edges })
    }

    /// Three legs of `leg_points` vertices each, glued at a centre vertex 0.
    /// Leg `l` (0-based) holds vertices `1 + l*leg_points ..`, ordered outward.
    pub fn tripod(leg_points: usize, leg_length: T) -> Result<Self> {
        if leg_points == 0 {
            return Err(param("leg_points", "must be positive"));
        }
        let step = leg_length / T::from_usize_lossy(leg_points);
        let mut edges = Vec::new();
        for leg in 0..3 {
            let first = 1 + leg * leg_points;
            edges.push(WeightedEdge::new(0, first, step));
            for k in 1..leg_points {
                edges.push(WeightedEdge::new(first + k - 1, first + k, step));
            }
        }
        intrinsic_metric(1 + 3 * leg_points, &edges)
    }

    /// Cycle graph with `n` equally spaced vertices and the given circumference.
    pub fn cycle(n: usize, circumference: T) -> Result<Self> {
        if n < 3 {
            return Err(param("n", "cycle needs at least three vertices"));
        }
        let step = circumference / T::from_usize_lossy(n);
        let edges: Vec<_> = (0..n).map(|i| WeightedEdge::new(i, (i + 1) % n, step)).collect();
        intrinsic_metric(n, &edges)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> T {
        self.dist.get(i, j)
    }

    pub fn matrix(&self) -> &SquareMatrix<T> {
        &self.dist
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn edges(&self) -> &[WeightedEdge<T>] {
        &self.edges
    }

    pub fn diameter(&self) -> T {
        self.dist.as_slice().iter().fold(T::zero(), |m, &v| m.max(v))
    }

    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.len() {
            return Err(Error::InvalidInput(format!("{} ids for {} points", ids.len(), self.len())));
        }
        self.ids = ids;
        Ok(self)
    }

    /// Subspace on the given indices with the restricted metric.
    pub fn subspace(&self, idx: &[usize]) -> Result<Self> {
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.len()) {
            return Err(Error::InvalidInput(format!("index {bad} out of range")));
        }
        let ids = idx.iter().map(|&i| self.ids[i].clone()).collect();
        Self::from_matrix(ids, self.dist.submatrix(idx))
    }

    /// Splits every generating edge into `k` equal pieces. The original vertices
    /// keep their indices; new vertices are appended edge by edge.
    pub fn subdivide(&self, k: usize) -> Result<Self> {
        if self.provenance != Provenance::GraphInduced {
            return Err(Error::Unsupported("only graph-induced spaces can be subdivided".into()));
        }
        if k == 0 {
            return Err(param("k", "must be positive"));
        }
        let mut n = self.len();
        let mut ids = self.ids.clone();
        let mut edges = Vec::new();
        for e in &self.edges {
            let piece = e.weight / T::from_usize_lossy(k);
            let mut prev = e.u;
            for s in 1..k {
                ids.push(format!("{}~{}#{s}", self.ids[e.u], self.ids[e.v]));
                edges.push(WeightedEdge::new(prev, n, piece));
                prev = n;
                n += 1;
            }
            edges.push(WeightedEdge::new(prev, e.v, piece));
        }
        intrinsic_metric(n, &edges)?.with_ids(ids)
    }
}

/// A single failure of the metric axioms.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricViolation<T> {
    NonZeroDiagonal { i: usize, value: T },
    NonPositive { i: usize, j: usize, value: T },
    Asymmetric { i: usize, j: usize, forward: T, backward: T },
    Triangle { i: usize, j: usize, k: usize, excess: T },
}

/// Outcome of an axiom check: valid iff no violations were found.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport<V> {
    pub violations: Vec<V>,
}

impl<V> ValidationReport<V> {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a distance matrix against the metric axioms. Comparisons use an
/// absolute tolerance of `1e-12`, widened to the scalar's precision at the
/// matrix's scale.
pub fn validate_metric<T: Scalar>(d: &SquareMatrix<T>) -> ValidationReport<MetricViolation<T>> {
    let n = d.n();
    let scale = d.as_slice().iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    let tol = T::tol_at(1e-12, scale);
    let mut violations = Vec::new();
    for i in 0..n {
        let v = d.get(i, i);
        if v.abs() > tol || !v.is_finite() {
            violations.push(MetricViolation::NonZeroDiagonal { i, value: v });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (d.get(i, j), d.get(j, i));
            if !(a > tol) || !(b > tol) {
                let value = if a > tol { b } else { a };
                violations.push(MetricViolation::NonPositive { i, j, value });
            }
            if !((a - b).abs() <= tol) {
                violations.push(MetricViolation::Asymmetric { i, j, forward: a, backward: b });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            let dij = d.get(i, j);
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let excess = dij - d.get(i, k) - d.get(k, j);
                if excess > tol {
                    violations.push(MetricViolation::Triangle { i, j, k, excess });
                }
            }
        }
    }
    ValidationReport { violations }
}

/// Shortest-path metric of a connected, positively weighted graph on `n` vertices.
pub fn intrinsic_metric<T: Scalar>(n: usize, edges: &[WeightedEdge<T>]) -> Result<FiniteLengthSpace<T>> {
    if n == 0 {
        return Err(Error::InvalidInput("graph has no vertices".into()));
    }
    validate_edges(n, edges)?;
    let adj = Adjacency::undirected(n, edges);
    let components = adj.components();
    if components.len() > 1 {
        return Err(Error::Disconnected { components });
    }
    let mut data = Vec::with_capacity(n * n);
    for s in 0..n {
        data.extend(adj.shortest_paths(s));
    }
    let mut dist = SquareMatrix::from_flat(n, data)?;
    // Dijkstra sums edges in traversal order; symmetrise so d(i,j) == d(j,i) bitwise.
    for i in 0..n {
        for j in i + 1..n {
            let m = dist.get(i, j).min(dist.get(j, i));
            dist.set(i, j, m);
            dist.set(j, i, m);
        }
    }
    Ok(FiniteLengthSpace { ids: default_ids(n), dist, provenance: Provenance::GraphInduced, edges: edges.to_vec() })
}

/// Greedy farthest-point net.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonNet<T> {
    pub center_indices: Vec<usize>,
    pub radius: T,
    pub covering_radius_achieved: T,
}

/// Greedy farthest-point `eps`-net starting from point 0; ties go to the lower index.
/// Every point ends within `eps` of a centre and centres are pairwise more than `eps` apart.
pub fn epsilon_net<T: Scalar>(space: &FiniteLengthSpace<T>, eps: T) -> Result<EpsilonNet<T>> {
    if !(eps > T::zero()) {
        return Err(param("eps", "must be positive"));
    }
    epsilon_net_from_matrix(space.matrix(), eps)
}

pub(crate) fn epsilon_net_from_matrix<T: Scalar>(d: &SquareMatrix<T>, eps: T) -> Result<EpsilonNet<T>> {
    let n = d.n();
    if n == 0 {
        return Err(Error::InvalidInput("space has no points".into()));
    }
    let mut centers = vec![0usize];
    let mut nearest: Vec<T> = d.row(0).to_vec();
    loop {
        let (far, &r) = nearest
            .iter()
            .enumerate()
            .fold((0, &T::neg_infinity()), |best, cur| if *cur.1 > *best.1 { cur } else { best });
        if r <= eps {
            return Ok(EpsilonNet { center_indices: centers, radius: eps, covering_radius_achieved: r });
        }
        centers.push(far);
        for (k, v) in nearest.iter_mut().enumerate() {
            *v = v.min(d.get(far, k));
        }
    }
}

/// A relation between two finite sets whose projections are both surjective.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correspondence {
    pairs: Vec<(usize, usize)>,
    n_a: usize,
    n_b: usize,
}

impl Correspondence {
    pub fn new(mut pairs: Vec<(usize, usize)>, n_a: usize, n_b: usize) -> Result<Self> {
        let mut seen_a = vec![false; n_a];
        let mut seen_b = vec![false; n_b];
        for &(a, b) in &pairs {
            if a >= n_a || b >= n_b {
                return Err(Error::InvalidInput(format!("pair ({a}, {b}) outside {n_a} x {n_b}")));
            }
            seen_a[a] = true;
            seen_b[b] = true;
        }
        if let Some(a) = seen_a.iter().position(|s| !s) {
            return Err(Error::InvalidInput(format!("point {a} of the first space is unmatched")));
        }
        if let Some(b) = seen_b.iter().position(|s| !s) {
            return Err(Error::InvalidInput(format!("point {b} of the second space is unmatched")));
        }
        pairs.sort_unstable();
        pairs.dedup();
        Ok(Self { pairs, n_a, n_b })
    }

    pub fn identity(n: usize) -> Self {
        Self { pairs: (0..n).map(|i| (i, i)).collect(), n_a: n, n_b: n }
    }

    pub fn full(n_a: usize, n_b: usize) -> Self {
        let pairs = (0..n_a).flat_map(|a| (0..n_b).map(move |b| (a, b))).collect();
        Self { pairs, n_a, n_b }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn sizes(&self) -> (usize, usize) {
        (self.n_a, self.n_b)
    }
}

/// `sup |d_A(a,a') - d_B(b,b')|` over pairs of related points.
pub fn distortion<T: Scalar>(
    r: &Correspondence,
    a: &FiniteLengthSpace<T>,
    b: &FiniteLengthSpace<T>,
) -> Result<T> {
    if r.n_a != a.len() || r.n_b != b.len() {
        return Err(Error::InvalidInput(format!(
            "correspondence is {} x {}, spaces have {} and {} points",
            r.n_a,
            r.n_b,
            a.len(),
            b.len()
        )));
    }
    Ok(distortion_unchecked(&r.pairs, a.matrix(), b.matrix()))
}

fn distortion_unchecked<T: Scalar>(pairs: &[(usize, usize)], a: &SquareMatrix<T>, b: &SquareMatrix<T>) -> T {
    let mut m = T::zero();
    for (k, &(x, y)) in pairs.iter().enumerate() {
        for &(x2, y2) in &pairs[k + 1..] {
            m = m.max((a.get(x, x2) - b.get(y, y2)).abs());
        }
    }
    m
}

/// Largest `|A| * |B|` accepted by [`gh_distance_exact`].
pub const GH_EXACT_LIMIT: usize = 25;

#[derive(Clone, Debug, PartialEq)]
pub struct GhResult<T> {
    pub distance: T,
    pub witness: Correspondence,
}

/// Exact Gromov–Hausdorff distance `inf_R dis(R) / 2` by branch and bound over
/// correspondences. Only inclusion-minimal correspondences are explored, which
/// loses nothing since dropping a redundant pair never raises the distortion.
pub fn gh_distance_exact<T: Scalar>(a: &FiniteLengthSpace<T>, b: &FiniteLengthSpace<T>) -> Result<GhResult<T>> {
    let (na, nb) = (a.len(), b.len());
    if na * nb > GH_EXACT_LIMIT {
        return Err(Error::SizeBound { size: na * nb, limit: GH_EXACT_LIMIT });
    }
    let full = Correspondence::full(na, nb);
    let mut search = GhSearch {
        da: a.matrix(),
        db: b.matrix(),
        na,
        nb,
        chosen: Vec::with_capacity(na + nb),
        cover_a: vec![0; na],
        cover_b: vec![0; nb],
        best: distortion_unchecked(&full.pairs, a.matrix(), b.matrix()),
        best_pairs: full.pairs.clone(),
    };
    search.descend(0, T::zero());
    let two = T::lit(2.0);
    Ok(GhResult { distance: search.best / two, witness: Correspondence::new(search.best_pairs, na, nb)? })
}

struct GhSearch<'a, T> {
    da: &'a SquareMatrix<T>,
    db: &'a SquareMatrix<T>,
    na: usize,
    nb: usize,
    chosen: Vec<(usize, usize)>,
    cover_a: Vec<u32>,
    cover_b: Vec<u32>,
    best: T,
    best_pairs: Vec<(usize, usize)>,
}

impl<T: Scalar> GhSearch<'_, T> {
    // Pairs are visited row-major: pair `idx` is (idx / nb, idx % nb).
    fn descend(&mut self, idx: usize, current: T) {
        if current >= self.best {
            return;
        }
        let total = self.na * self.nb;
        if idx == total {
            if self.cover_a.iter().all(|&c| c > 0) && self.cover_b.iter().all(|&c| c > 0) {
                self.best = current;
                self.best_pairs = self.chosen.clone();
            }
            return;
        }
        let (x, y) = (idx / self.nb, idx % self.nb);
        // Rows before x are finished; columns need a later row to still be available.
        if x > 0 && y == 0 && self.cover_a[x - 1] == 0 {
            return;
        }
        if x == self.na - 1 && y > 0 && self.cover_b[y - 1] == 0 {
            return;
        }
        if self.cover_a[x] == 0 || self.cover_b[y] == 0 {
            let mut grown = current;
            for &(x2, y2) in &self.chosen {
                grown = grown.max((self.da.get(x, x2) - self.db.get(y, y2)).abs());
            }
            if grown < self.best {
                self.chosen.push((x, y));
                self.cover_a[x] += 1;
                self.cover_b[y] += 1;
                self.descend(idx + 1, grown);
                self.chosen.pop();
                self.cover_a[x] -= 1;
                self.cover_b[y] -= 1;
            }
        }
        self.descend(idx + 1, current);
    }
}

/// One quadruple `(p; a, b, c)` with its comparison-angle sum at `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadrupleWitness<T> {
    pub p: usize,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub angle_sum: T,
    pub excess: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadrupleVerdict<T> {
    pub curvature: T,
    pub pass: bool,
    pub quadruples_checked: usize,
    /// Quadruple with the largest angle-sum excess over `2*pi`.
    pub worst: Option<QuadrupleWitness<T>>,
    /// First triple whose comparison triangle does not exist in the model plane.
    pub constraint_failure: Option<(usize, usize, usize, String)>,
}

/// Point limit for [`quadruple_curvature_check`]; the check caches `n^3` angles.
pub const QUADRUPLE_POINT_LIMIT: usize = 200;

/// Four-point condition for curvature bounded below by `k`: at every point
/// `p` the comparison angles towards any three other points sum to at most
/// `2*pi + tol`.
pub fn quadruple_curvature_check<T: Scalar>(
    space: &FiniteLengthSpace<T>,
    k: T,
    tol: T,
) -> Result<QuadrupleVerdict<T>> {
    let n = space.len();
    if n > QUADRUPLE_POINT_LIMIT {
        return Err(Error::SizeBound { size: n, limit: QUADRUPLE_POINT_LIMIT });
    }
    let d = space.matrix();
    let two_pi = T::PI() * T::lit(2.0);
    let mut verdict =
        QuadrupleVerdict { curvature: k, pass: true, quadruples_checked: 0, worst: None, constraint_failure: None };
    let mut angles = vec![T::nan(); n * n];
    for p in 0..n {
        for a in 0..n {
            if a == p {
                continue;
            }
            for b in a + 1..n {
                if b == p {
                    continue;
                }
                match comparison_angle(k, d.get(a, b), d.get(p, a), d.get(p, b)) {
                    Ok(g) => {
                        angles[a * n + b] = g;
                        angles[b * n + a] = g;
                    }
                    Err(e) => {
                        verdict.pass = false;
                        if verdict.constraint_failure.is_none() {
                            verdict.constraint_failure = Some((p, a, b, e.to_string()));
                        }
                    }
                }
            }
        }
        for a in 0..n {
            if a == p {
                continue;
            }
            for b in a + 1..n {
                if b == p {
                    continue;
                }
                let ab = angles[a * n + b];
                for c in b + 1..n {
                    if c == p {
                        continue;
                    }
                    verdict.quadruples_checked += 1;
                    let sum = ab + angles[b * n + c] + angles[a * n + c];
                    if sum.is_nan() {
                        continue;
                    }
                    let excess = sum - two_pi;
                    if excess > tol {
                        verdict.pass = false;
                    }
                    if verdict.worst.as_ref().is_none_or(|w| excess > w.excess) {
                        verdict.worst = Some(QuadrupleWitness { p, a, b, c, angle_sum: sum, excess });
                    }
                }
            }
        }
    }
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bad_triangle() -> SquareMatrix<f64> {
        SquareMatrix::from_rows(&[vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]]).unwrap()
    }

    #[test]
    fn unit_segment_is_valid() {
        let d = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(validate_metric(&d).is_valid());
    }

    #[test]
    fn triangle_violation_names_the_triple() {
        let r = validate_metric(&bad_triangle());
        assert!(r.violations.iter().any(|v| matches!(
            v,
            MetricViolation::Triangle { i: 0, j: 2, k: 1, excess } if (*excess - 1.0).abs() < 1e-15
        )));
    }

    #[test]
    fn asymmetry_is_reported() {
        let d = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        let r = validate_metric(&d);
        assert!(r.violations.iter().any(|v| matches!(v, MetricViolation::Asymmetric { i: 0, j: 1, .. })));
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0]]).is_err());
    }

    #[test]
    fn path_graph_metric() {
        let e = [WeightedEdge::new(0, 1, 1.0), WeightedEdge::new(1, 2, 2.0)];
        let s = intrinsic_metric(3, &e).unwrap();
        assert_eq!(s.dist(0, 2), 3.0);
        assert_eq!(s.provenance(), &Provenance::GraphInduced);
    }

    #[test]
    fn disconnected_graph_lists_components() {
        let e = [WeightedEdge::new(0, 1, 1.0), WeightedEdge::new(2, 3, 1.0)];
        match intrinsic_metric(4, &e) {
            Err(Error::Disconnected { components }) => assert_eq!(components, vec![vec![0, 1], vec![2, 3]]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_edges_are_rejected() {
        assert!(intrinsic_metric(2, &[WeightedEdge::new(0, 1, 0.0)]).is_err());
        assert!(intrinsic_metric(2, &[WeightedEdge::new(0, 2, 1.0)]).is_err());
    }

    #[test]
    fn unit_interval_net() {
        let pts: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let s = FiniteLengthSpace::line(&pts).unwrap();
        let net = epsilon_net(&s, 0.25).unwrap();
        assert!(net.covering_radius_achieved <= 0.25);
        assert!(net.center_indices.len() <= 3, "{:?}", net.center_indices);
        assert!(epsilon_net(&s, 0.0).is_err());
    }

    #[test]
    fn gh_of_space_with_itself_is_zero() {
        let s = FiniteLengthSpace::line(&[0.0, 1.0, 3.0]).unwrap();
        let r = gh_distance_exact(&s, &s).unwrap();
        assert_eq!(r.distance, 0.0);
        assert_eq!(distortion(&r.witness, &s, &s).unwrap(), 0.0);
    }

    #[test]
    fn gh_between_point_and_segment() {
        let p = FiniteLengthSpace::line(&[0.0]).unwrap();
        let seg = FiniteLengthSpace::line(&[0.0, 2.0]).unwrap();
        assert_eq!(gh_distance_exact(&p, &seg).unwrap().distance, 1.0);
    }

    #[test]
    fn gh_refuses_large_instances() {
        let s = FiniteLengthSpace::line(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert!(matches!(gh_distance_exact(&s, &s), Err(Error::SizeBound { size: 36, limit: 25 })));
    }

    #[test]
    fn correspondence_must_cover_both_sides() {
        assert!(Correspondence::new(vec![(0, 0)], 2, 1).is_err());
        assert!(Correspondence::new(vec![(0, 0), (1, 0)], 2, 1).is_ok());
    }

    #[test]
    fn subdivision_preserves_original_distances() {
        let s = FiniteLengthSpace::<f64>::tripod(2, 1.0).unwrap();
        let fine = s.subdivide(3).unwrap();
        assert_eq!(fine.len(), s.len() + 6 * 2);
        for i in 0..s.len() {
            for j in 0..s.len() {
                assert!((fine.dist(i, j) - s.dist(i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn tripod_fails_four_point_condition() {
        let s = FiniteLengthSpace::<f64>::tripod(1, 1.0).unwrap();
        let v = quadruple_curvature_check(&s, 0.0, 1e-9).unwrap();
        assert!(!v.pass);
        let w = v.worst.unwrap();
        assert_eq!(w.p, 0);
        assert!((w.angle_sum - 3.0 * std::f64::consts::PI).abs() < 1e-12);
    }
}
