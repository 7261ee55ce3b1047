//! Finite Lorentzian pre-length spaces, time functions and null distance.

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::metric::{validate_metric, FiniteLengthSpace, ValidationReport};
use crate::scalar::Scalar;

/// A finite Lorentzian pre-length space `(X, d, <<, <=, rho)`.
///
/// `causal[i][j]` encodes `i <= j`, `chrono[i][j]` encodes `i << j`, and
/// `rho` holds the time separation, possibly `+inf`.
#[derive(Clone, Debug)]
pub struct DiscretePreLengthSpace<T> {
    base: FiniteLengthSpace<T>,
    causal: SquareMatrix<bool>,
    chrono: SquareMatrix<bool>,
    rho: SquareMatrix<T>,
}

impl<T: Scalar> DiscretePreLengthSpace<T> {
    /// Checks shapes only; the axioms are checked by [`validate_pls`].
    pub fn new(
        base: FiniteLengthSpace<T>,
        causal: SquareMatrix<bool>,
        chrono: SquareMatrix<bool>,
        rho: SquareMatrix<T>,
    ) -> Result<Self> {
        let n = base.len();
        for (name, m) in [("causal", causal.n()), ("chrono", chrono.n()), ("rho", rho.n())] {
            if m != n {
                return Err(Error::InvalidInput(format!("{name} is {m}x{m}, base space has {n} points")));
            }
        }
        if let Some(k) = rho.as_slice().iter().position(|v| v.is_nan()) {
            return Err(Error::InvalidInput(format!("rho is NaN at ({}, {})", k / n, k % n)));
        }
        Ok(Self { base, causal, chrono, rho })
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn base(&self) -> &FiniteLengthSpace<T> {
        &self.base
    }

    #[inline]
    pub fn causal(&self, i: usize, j: usize) -> bool {
        self.causal.get(i, j)
    }

    #[inline]
    pub fn chrono(&self, i: usize, j: usize) -> bool {
        self.chrono.get(i, j)
    }

    #[inline]
    pub fn rho(&self, i: usize, j: usize) -> T {
        self.rho.get(i, j)
    }

    pub fn causal_matrix(&self) -> &SquareMatrix<bool> {
        &self.causal
    }

    pub fn chrono_matrix(&self) -> &SquareMatrix<bool> {
        &self.chrono
    }

    pub fn rho_matrix(&self) -> &SquareMatrix<T> {
        &self.rho
    }
}

/// A single failure of the pre-length space axioms.
#[derive(Clone, Debug, PartialEq)]
pub enum PlsViolation<T> {
    CausalNotReflexive { i: usize },
    CausalNotTransitive { i: usize, j: usize, k: usize },
    ChronoNotCausal { i: usize, j: usize },
    ChronoNotTransitive { i: usize, j: usize, k: usize },
    NegativeRho { i: usize, j: usize, value: T },
    /// `rho(i,j) > 0` disagrees with `i << j`.
    RhoChronoMismatch { i: usize, j: usize, rho: T, chrono: bool },
    /// `i <= j <= k` but `rho(i,k) < rho(i,j) + rho(j,k)`.
    ReverseTriangle { i: usize, j: usize, k: usize, deficit: T },
}

/// Exhaustive axiom check. The reverse triangle inequality is tested with
/// absolute tolerance `1e-12` widened to the scalar's precision.
pub fn validate_pls<T: Scalar>(s: &DiscretePreLengthSpace<T>) -> ValidationReport<PlsViolation<T>> {
    let n = s.len();
    let mut v = Vec::new();
    for i in 0..n {
        if !s.causal(i, i) {
            v.push(PlsViolation::CausalNotReflexive { i });
        }
    }
    for i in 0..n {
        for j in 0..n {
            let r = s.rho(i, j);
            if r < T::zero() {
                v.push(PlsViolation::NegativeRho { i, j, value: r });
            }
            if (r > T::zero()) != s.chrono(i, j) {
                v.push(PlsViolation::RhoChronoMismatch { i, j, rho: r, chrono: s.chrono(i, j) });
            }
            if s.chrono(i, j) && !s.causal(i, j) {
                v.push(PlsViolation::ChronoNotCausal { i, j });
            }
        }
    }
    let scale = s.rho.as_slice().iter().filter(|r| r.is_finite()).fold(T::zero(), |m, &r| m.max(r.abs()));
    let tol = T::tol_at(1e-12, scale);
    for i in 0..n {
        for j in 0..n {
            let (cij, hij) = (s.causal(i, j), s.chrono(i, j));
            if !cij {
                continue;
            }
            for k in 0..n {
                if s.causal(j, k) {
                    if !s.causal(i, k) {
                        v.push(PlsViolation::CausalNotTransitive { i, j, k });
                    }
                    let sum = s.rho(i, j) + s.rho(j, k);
                    let lhs = s.rho(i, k);
                    if lhs < sum - tol && !(lhs.is_infinite() && sum.is_infinite()) {
                        v.push(PlsViolation::ReverseTriangle { i, j, k, deficit: sum - lhs });
                    }
                }
                if hij && s.chrono(j, k) && !s.chrono(i, k) {
                    v.push(PlsViolation::ChronoNotTransitive { i, j, k });
                }
            }
        }
    }
    ValidationReport { violations: v }
}

/// Denominator of the lattice used by [`random_minkowski_instance`].
pub const RANDOM_LATTICE: u32 = 64;

/// `n` distinct seeded points `(t, x)` of `[0,1] x [0,1/2]` in 2-dimensional
/// Minkowski space with its causal structure, time separation and Euclidean
/// base metric, plus `tau = t`. Coordinates lie on a dyadic lattice so
/// coordinate differences, hence the causal relation, are exact.
pub fn random_minkowski_instance<T: Scalar>(
    n: usize,
    seed: u64,
) -> Result<(DiscretePreLengthSpace<T>, GeneralizedTimeFunction<T>)> {
    use rand::{Rng, SeedableRng};
    let cells = (RANDOM_LATTICE + 1) * (RANDOM_LATTICE / 2 + 1);
    if n == 0 || n > cells as usize {
        return Err(Error::InvalidInput(format!("point count {n} outside 1..={cells}")));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<(u32, u32)> = Vec::with_capacity(n);
    while pts.len() < n {
        let p = (rng.gen_range(0..=RANDOM_LATTICE), rng.gen_range(0..=RANDOM_LATTICE / 2));
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    let scale = T::from_usize_lossy(RANDOM_LATTICE as usize);
    let coord = |v: u32| T::from_usize_lossy(v as usize) / scale;
    let (t, x): (Vec<T>, Vec<T>) = pts.iter().map(|&(a, b)| (coord(a), coord(b))).unzip();
    let dist = SquareMatrix::from_fn(n, |i, j| {
        let (dt, dx) = (t[j] - t[i], x[j] - x[i]);
        (dt * dt + dx * dx).sqrt()
    });
    let gap = |i: usize, j: usize| (pts[j].0 as i64 - pts[i].0 as i64, (pts[j].1 as i64 - pts[i].1 as i64).abs());
    let causal = SquareMatrix::from_fn(n, |i, j| {
        let (dt, dx) = gap(i, j);
        dt >= dx
    });
    let chrono = SquareMatrix::from_fn(n, |i, j| {
        let (dt, dx) = gap(i, j);
        dt > dx
    });
    let rho = SquareMatrix::from_fn(n, |i, j| {
        let (dt, dx) = gap(i, j);
        if dt > dx {
            T::from_usize_lossy(((dt - dx) * (dt + dx)) as usize).sqrt() / scale
        } else {
            T::zero()
        }
    });
    let base = FiniteLengthSpace::from_matrix((0..n).map(|i| format!("p{i}")).collect(), dist)?;
    Ok((DiscretePreLengthSpace::new(base, causal, chrono, rho)?, GeneralizedTimeFunction::new(t)))
}

/// Per-point values of a (generalized) time function.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizedTimeFunction<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> GeneralizedTimeFunction<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self { values }
    }

    #[inline]
    pub fn at(&self, i: usize) -> T {
        self.values[i]
    }

    /// `lambda * tau + c`.
    pub fn affine(&self, lambda: T, c: T) -> Self {
        Self { values: self.values.iter().map(|&v| lambda * v + c).collect() }
    }
}

fn check_tau_len<T: Scalar>(s: &DiscretePreLengthSpace<T>, tau: &GeneralizedTimeFunction<T>) -> Result<()> {
    if tau.values.len() != s.len() {
        return Err(Error::InvalidInput(format!(
            "time function has {} values for {} points",
            tau.values.len(),
            s.len()
        )));
    }
    if tau.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("time function has non-finite values".into()));
    }
    Ok(())
}

/// Direction of one segment of a piecewise causal path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentTag {
    Future,
    Past,
    Trivial,
}

/// A vertex chain whose consecutive pairs are causally related in the tagged direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseCausalPath {
    pub vertices: Vec<usize>,
    pub tags: Vec<SegmentTag>,
}

impl PiecewiseCausalPath {
    pub fn validate<T: Scalar>(&self, s: &DiscretePreLengthSpace<T>) -> Result<()> {
        if self.vertices.is_empty() {
            return Err(Error::InvalidInput("path has no vertices".into()));
        }
        if self.tags.len() + 1 != self.vertices.len() {
            return Err(Error::InvalidInput(format!(
                "{} tags for {} vertices",
                self.tags.len(),
                self.vertices.len()
            )));
        }
        if let Some(&v) = self.vertices.iter().find(|&&v| v >= s.len()) {
            return Err(Error::InvalidInput(format!("vertex {v} out of range")));
        }
        for (k, (w, tag)) in self.vertices.windows(2).zip(&self.tags).enumerate() {
            let ok = match tag {
                SegmentTag::Future => s.causal(w[0], w[1]),
                SegmentTag::Past => s.causal(w[1], w[0]),
                SegmentTag::Trivial => w[0] == w[1],
            };
            if !ok {
                return Err(Error::InvalidInput(format!(
                    "segment {k} ({} -> {}) is not {tag:?}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }
}

/// Null length: the sum of `|tau(end) - tau(start)|` over the maximal runs of
/// equally oriented segments (trivial segments join any run).
pub fn path_null_length<T: Scalar>(
    s: &DiscretePreLengthSpace<T>,
    tau: &GeneralizedTimeFunction<T>,
    path: &PiecewiseCausalPath,
) -> Result<T> {
    check_tau_len(s, tau)?;
    path.validate(s)?;
    let mut total = T::zero();
    let mut run_start = path.vertices[0];
    let mut run_dir = SegmentTag::Trivial;
    for (w, &tag) in path.vertices.windows(2).zip(&path.tags) {
        if tag == SegmentTag::Trivial {
            continue;
        }
        if run_dir != SegmentTag::Trivial && tag != run_dir {
            total = total + (tau.at(w[0]) - tau.at(run_start)).abs();
            run_start = w[0];
        }
        run_dir = tag;
    }
    let last = *path.vertices.last().expect("non-empty path");
    Ok(total + (tau.at(last) - tau.at(run_start)).abs())
}

/// All-pairs null distance with shortest-path witnesses.
#[derive(Clone, Debug)]
pub struct NullDistance<T> {
    pub matrix: SquareMatrix<T>,
    /// `pred[s][v]`: predecessor of `v` on the chosen shortest path from `s`.
    pred: SquareMatrix<usize>,
    /// Set when some pair is unreachable; such entries are `+inf`.
    pub warning: Option<String>,
}

impl<T: Scalar> NullDistance<T> {
    /// Vertex sequence of the recorded minimiser from `p` to `q`.
    pub fn path(&self, p: usize, q: usize) -> Option<Vec<usize>> {
        if !self.matrix.get(p, q).is_finite() {
            return None;
        }
        let mut out = vec![q];
        let mut v = q;
        while v != p {
            v = self.pred.get(p, v);
            out.push(v);
        }
        out.reverse();
        Some(out)
    }
}

/// Null distance `d_tau`: shortest paths in the graph of causally related
/// pairs weighted by `|tau(u) - tau(v)|`. Ties prefer the lexicographically
/// smaller predecessor.
pub fn null_distance_matrix<T: Scalar>(
    s: &DiscretePreLengthSpace<T>,
    tau: &GeneralizedTimeFunction<T>,
) -> Result<NullDistance<T>> {
    check_tau_len(s, tau)?;
    let n = s.len();
    let mut matrix = SquareMatrix::filled(n, T::infinity());
    let mut pred = SquareMatrix::filled(n, usize::MAX);
    let linked = |u: usize, v: usize| u != v && (s.causal(u, v) || s.causal(v, u));
    for src in 0..n {
        let mut dist = vec![T::infinity(); n];
        let mut done = vec![false; n];
        let mut from = vec![usize::MAX; n];
        dist[src] = T::zero();
        from[src] = src;
        loop {
            let mut u = usize::MAX;
            for v in 0..n {
                if !done[v] && dist[v].is_finite() && (u == usize::MAX || dist[v] < dist[u]) {
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            for v in 0..n {
                if done[v] || !linked(u, v) {
                    continue;
                }
                let nd = dist[u] + (tau.at(u) - tau.at(v)).abs();
                if nd < dist[v] || (nd == dist[v] && u < from[v]) {
                    dist[v] = nd;
                    from[v] = u;
                }
            }
        }
        matrix.row_mut(src).copy_from_slice(&dist);
        pred.row_mut(src).copy_from_slice(&from);
    }
    let unreachable = matrix.as_slice().iter().filter(|v| v.is_infinite()).count();
    let warning = (unreachable > 0).then(|| {
        format!(
            "{unreachable} ordered pairs are not joined by any piecewise causal path; \
             every point should lie on a timelike curve for the null distance to be finite"
        )
    });
    Ok(NullDistance { matrix, pred, warning })
}

/// Pass/fail with an optional witness.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict<W> {
    pub pass: bool,
    pub witness: Option<W>,
}

impl<W> Verdict<W> {
    pub fn pass() -> Self {
        Self { pass: true, witness: None }
    }

    pub fn fail(witness: W) -> Self {
        Self { pass: false, witness: Some(witness) }
    }
}

/// `tau(x) < tau(y)` for every causal pair of distinct points.
pub fn check_time_function<T: Scalar>(
    s: &DiscretePreLengthSpace<T>,
    tau: &GeneralizedTimeFunction<T>,
) -> Result<Verdict<(usize, usize)>> {
    check_tau_len(s, tau)?;
    for i in 0..s.len() {
        for j in 0..s.len() {
            if i != j && s.causal(i, j) && !(tau.at(i) < tau.at(j)) {
                return Ok(Verdict::fail((i, j)));
            }
        }
    }
    Ok(Verdict::pass())
}

/// `tau(y) - tau(x) >= d_U(x,y)` for causal pairs inside `U`. `d_u` is indexed
/// by position in `u`. Rounding slack of `1e-12` (relative) is allowed.
pub fn check_anti_lipschitz<T: Scalar>(
    s: &DiscretePreLengthSpace<T>,
    tau: &GeneralizedTimeFunction<T>,
    u: &[usize],
    d_u: &SquareMatrix<T>,
) -> Result<Verdict<(usize, usize)>> {
    check_tau_len(s, tau)?;
    if d_u.n() != u.len() {
        return Err(Error::InvalidInput(format!("d_U is {}x{} for {} points", d_u.n(), d_u.n(), u.len())));
    }
    if let Some(&bad) = u.iter().find(|&&i| i >= s.len()) {
        return Err(Error::InvalidInput(format!("subset index {bad} out of range")));
    }
    let report = validate_metric(d_u);
    if !report.is_valid() {
        return Err(Error::InvalidInput(format!("d_U is not a metric: {:?}", report.violations[0])));
    }
    for (a, &x) in u.iter().enumerate() {
        for (b, &y) in u.iter().enumerate() {
            if a == b || !s.causal(x, y) {
                continue;
            }
            let gap = tau.at(y) - tau.at(x);
            let d = d_u.get(a, b);
            if gap < d - T::tol_at(1e-12, d) {
                return Ok(Verdict::fail((x, y)));
            }
        }
    }
    Ok(Verdict::pass())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyReport {
    /// `d(p,q) >= |tau(q) - tau(p)|`; witness `(p, q)`.
    pub lower_bound: Verdict<(usize, usize)>,
    /// `p <= q` implies `d(p,q) = tau(q) - tau(p)`; witness `(p, q)`.
    pub causal_equality: Verdict<(usize, usize)>,
    /// `p <= x <= q` implies `tau(p) <= tau(x) <= tau(q)`; witness `(p, x, q)`.
    pub diamond_time: Verdict<(usize, usize, usize)>,
    /// `p <= x, y <= q` implies `d(x,y) <= 2 (tau(q) - tau(p))`; witness `(p, x, y, q)`.
    pub diamond_bound: Verdict<(usize, usize, usize, usize)>,
    /// `d_{2 tau + 5} = 2 d_tau`; witness `(p, q)`.
    pub scaling: Verdict<(usize, usize)>,
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        self.lower_bound.pass
            && self.causal_equality.pass
            && self.diamond_time.pass
            && self.diamond_bound.pass
            && self.scaling.pass
    }
}

/// Exhaustive check of the basic null-distance properties. Equalities are
/// tested to `1e-12` relative.
pub fn properties_report<T: Scalar>(
    s: &DiscretePreLengthSpace<T>,
    tau: &GeneralizedTimeFunction<T>,
) -> Result<PropertyReport> {
    let n = s.len();
    let d = null_distance_matrix(s, tau)?.matrix;
    let tol = |v: T| T::tol_at(1e-12, v);

    let mut lower_bound = Verdict::pass();
    let mut causal_equality = Verdict::pass();
    let mut diamond_time = Verdict::pass();
    'outer: for p in 0..n {
        for q in 0..n {
            let dt = tau.at(q) - tau.at(p);
            if lower_bound.pass && d.get(p, q) < dt.abs() - tol(dt) {
                lower_bound = Verdict::fail((p, q));
            }
            if s.causal(p, q) {
                if causal_equality.pass && (d.get(p, q) - dt).abs() > tol(dt) {
                    causal_equality = Verdict::fail((p, q));
                }
                // With reflexivity, the triple condition reduces to monotonicity on pairs.
                if diamond_time.pass && dt < T::zero() {
                    diamond_time = Verdict::fail((p, q, q));
                }
            }
            if !lower_bound.pass && !causal_equality.pass && !diamond_time.pass {
                break 'outer;
            }
        }
    }

    // For each (x, y): latest common past point and earliest common future point.
    let mut diamond_bound = Verdict::pass();
    'diamond: for x in 0..n {
        for y in 0..n {
            let mut best_p: Option<usize> = None;
            let mut best_q: Option<usize> = None;
            for z in 0..n {
                if s.causal(z, x) && s.causal(z, y) && best_p.is_none_or(|p| tau.at(z) > tau.at(p)) {
                    best_p = Some(z);
                }
                if s.causal(x, z) && s.causal(y, z) && best_q.is_none_or(|q| tau.at(z) < tau.at(q)) {
                    best_q = Some(z);
                }
            }
            if let (Some(p), Some(q)) = (best_p, best_q) {
                let bound = T::lit(2.0) * (tau.at(q) - tau.at(p));
                if d.get(x, y) > bound + tol(bound) {
                    diamond_bound = Verdict::fail((p, x, y, q));
                    break 'diamond;
                }
            }
        }
    }

    let scaled = null_distance_matrix(s, &tau.affine(T::lit(2.0), T::lit(5.0)))?.matrix;
    let mut scaling = Verdict::pass();
    for p in 0..n {
        for q in 0..n {
            let want = T::lit(2.0) * d.get(p, q);
            let got = scaled.get(p, q);
            let same = if want.is_infinite() { got == want } else { (got - want).abs() <= tol(want) };
            if !same {
                scaling = Verdict::fail((p, q));
            }
        }
    }
    Ok(PropertyReport { lower_bound, causal_equality, diamond_time, diamond_bound, scaling })
}

/// Outcome of the causally convex neighbourhood construction.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexNeighborhood<T> {
    pub center: usize,
    pub members: Vec<usize>,
    /// Bump `max(0, eps - d_U(p,q)/2)`, zero outside `U`.
    pub phi: Vec<T>,
    pub tau_plus: Vec<T>,
    pub tau_minus: Vec<T>,
    /// Causal pair on which `tau + phi` or `tau - phi` fails to increase.
    pub time_function_failure: Option<(usize, usize)>,
    /// `(x, z, y)` with `x <= z <= y`, `x, y` members and `z` not.
    pub counterexample: Option<(usize, usize, usize)>,
    pub certified: bool,
}

/// Builds `U_eps(p) = { q : tau(q) - phi(q) < tau(p) < tau(q) + phi(q) }` and
/// certifies causal convexity by exhausting all causal triples (the relation is
/// transitive, so longer chains add nothing).
///
/// Preconditions: `tau` is a time function, it is anti-Lipschitz on `U` with
/// respect to `d_U`, and the support of `phi` stays closer to `p` (in the base
/// metric) than half the distance from `p` to the complement of `U`.
pub fn causally_convex_neighborhood<T: Scalar>(
    s: &DiscretePreLengthSpace<T>,
    tau: &GeneralizedTimeFunction<T>,
    p: usize,
    u: &[usize],
    d_u: &SquareMatrix<T>,
    eps: T,
) -> Result<ConvexNeighborhood<T>> {
    let n = s.len();
    if p >= n {
        return Err(Error::InvalidInput(format!("point {p} out of range")));
    }
    if !(eps > T::zero()) {
        return Err(crate::error::param("eps", "must be positive"));
    }
    let Some(pu) = u.iter().position(|&x| x == p) else {
        return Err(Error::Precondition(format!("U does not contain the centre {p}")));
    };
    if let Verdict { pass: false, witness: Some((x, y)) } = check_time_function(s, tau)? {
        return Err(Error::Precondition(format!("tau is not a time function: fails on ({x}, {y})")));
    }
    if let Verdict { pass: false, witness: Some((x, y)) } = check_anti_lipschitz(s, tau, u, d_u)? {
        return Err(Error::Precondition(format!("tau is not anti-Lipschitz on U: fails on ({x}, {y})")));
    }
    let base = s.base();
    let mut in_u = vec![false; n];
    for &x in u {
        in_u[x] = true;
    }
    let outside = (0..n).filter(|&q| !in_u[q]).map(|q| base.dist(p, q)).fold(T::infinity(), T::min);
    let half_gap = outside / T::lit(2.0);
    let two_eps = T::lit(2.0) * eps;
    let reach = u
        .iter()
        .enumerate()
        .filter(|&(a, _)| d_u.get(pu, a) < two_eps)
        .map(|(_, &q)| base.dist(p, q))
        .fold(T::zero(), T::max);
    if reach >= half_gap {
        return Err(Error::Precondition(format!(
            "eps = {eps} is too large: the 2 eps ball of d_U reaches distance {reach} from p, \
             but U only extends to {half_gap} (half the distance to its complement)"
        )));
    }

    let mut phi = vec![T::zero(); n];
    for (a, &q) in u.iter().enumerate() {
        phi[q] = (eps - d_u.get(pu, a) / T::lit(2.0)).max(T::zero());
    }
    let tau_plus: Vec<T> = (0..n).map(|q| tau.at(q) + phi[q]).collect();
    let tau_minus: Vec<T> = (0..n).map(|q| tau.at(q) - phi[q]).collect();
    let tp = tau.at(p);
    let member: Vec<bool> = (0..n).map(|q| tau_minus[q] < tp && tp < tau_plus[q]).collect();

    let mut time_function_failure = None;
    'tf: for x in 0..n {
        for y in 0..n {
            if x != y && s.causal(x, y) && !(tau_plus[x] < tau_plus[y] && tau_minus[x] < tau_minus[y]) {
                time_function_failure = Some((x, y));
                break 'tf;
            }
        }
    }
    let mut counterexample = None;
    'cx: for x in (0..n).filter(|&x| member[x]) {
        for y in (0..n).filter(|&y| member[y] && s.causal(x, y)) {
            for z in 0..n {
                if !member[z] && s.causal(x, z) && s.causal(z, y) {
                    counterexample = Some((x, z, y));
                    break 'cx;
                }
            }
        }
    }
    let members: Vec<usize> = (0..n).filter(|&q| member[q]).collect();
    let certified = time_function_failure.is_none() && counterexample.is_none();
    Ok(ConvexNeighborhood {
        center: p,
        members,
        phi,
        tau_plus,
        tau_minus,
        time_function_failure,
        counterexample,
        certified,
    })
}

/// Lorentzian length `L_rho` of a causal chain: the sum of `rho` over consecutive pairs.
pub fn chain_length<T: Scalar>(s: &DiscretePreLengthSpace<T>, chain: &[usize]) -> Result<T> {
    if let Some(&bad) = chain.iter().find(|&&v| v >= s.len()) {
        return Err(Error::InvalidInput(format!("vertex {bad} out of range")));
    }
    let mut total = T::zero();
    for w in chain.windows(2) {
        if !s.causal(w[0], w[1]) {
            return Err(Error::InvalidInput(format!("{} is not causally before {}", w[0], w[1])));
        }
        total = total + s.rho(w[0], w[1]);
    }
    Ok(total)
}

#[derive(Clone, Debug)]
pub struct RhoLengthReport<T> {
    /// `T(x,y)`: longest `L_rho` over causal chains from `x` to `y`, zero if none.
    pub t_matrix: SquareMatrix<T>,
    /// Pairs where `rho` and `T` differ (beyond `1e-12` relative).
    pub mismatches: Vec<(usize, usize)>,
}

impl<T> RhoLengthReport<T> {
    pub fn rho_equals_t(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Longest-chain time separation by dynamic programming over the causal order.
pub fn rho_length_and_t<T: Scalar>(s: &DiscretePreLengthSpace<T>) -> Result<RhoLengthReport<T>> {
    let n = s.len();
    for i in 0..n {
        for j in i + 1..n {
            if s.causal(i, j) && s.causal(j, i) {
                return Err(Error::CausalCycle(i, j));
            }
        }
    }
    // Strict predecessor counts grow along the order, giving a topological sort.
    let mut order: Vec<usize> = (0..n).collect();
    let preds: Vec<usize> = (0..n).map(|j| (0..n).filter(|&i| i != j && s.causal(i, j)).count()).collect();
    order.sort_by_key(|&j| (preds[j], j));
    let mut t = SquareMatrix::filled(n, T::zero());
    let mut reach = SquareMatrix::filled(n, false);
    for x in 0..n {
        reach.set(x, x, true);
        for &y in &order {
            if y == x || !s.causal(x, y) {
                continue;
            }
            let mut best = s.rho(x, y);
            for &z in &order {
                if z == y {
                    break;
                }
                if z != x && reach.get(x, z) && s.causal(z, y) {
                    best = best.max(t.get(x, z) + s.rho(z, y));
                }
            }
            t.set(x, y, best);
            reach.set(x, y, true);
        }
    }
    let mut mismatches = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let (r, v) = (s.rho(x, y), t.get(x, y));
            let same = if r.is_infinite() || v.is_infinite() { r == v } else { (r - v).abs() <= T::tol_at(1e-12, r) };
            if !same {
                mismatches.push((x, y));
            }
        }
    }
    Ok(RhoLengthReport { t_matrix: t, mismatches })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(rho_xz: f64) -> DiscretePreLengthSpace<f64> {
        let base = FiniteLengthSpace::line(&[0.0, 1.0, 2.0]).unwrap();
        let causal = SquareMatrix::from_fn(3, |i, j| i <= j);
        let chrono = SquareMatrix::from_fn(3, |i, j| i < j);
        let rho = SquareMatrix::from_rows(&[
            vec![0.0, 1.0, rho_xz],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        DiscretePreLengthSpace::new(base, causal, chrono, rho).unwrap()
    }

    fn two_chain(chrono: bool, rho: f64) -> DiscretePreLengthSpace<f64> {
        let base = FiniteLengthSpace::line(&[0.0, 1.0]).unwrap();
        DiscretePreLengthSpace::new(
            base,
            SquareMatrix::from_fn(2, |i, j| i <= j),
            SquareMatrix::from_fn(2, |i, j| chrono && i < j),
            SquareMatrix::from_rows(&[vec![0.0, rho], vec![0.0, 0.0]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn valid_two_chain() {
        assert!(validate_pls(&two_chain(true, 1.0)).is_valid());
    }

    #[test]
    fn rho_without_chronology_is_caught() {
        let r = validate_pls(&two_chain(false, 1.0));
        assert!(r.violations.iter().any(|v| matches!(v, PlsViolation::RhoChronoMismatch { i: 0, j: 1, .. })));
    }

    #[test]
    fn reverse_triangle_violation() {
        let r = validate_pls(&chain(1.0));
        assert!(r.violations.iter().any(|v| matches!(v, PlsViolation::ReverseTriangle { i: 0, j: 1, k: 2, .. })));
        assert!(validate_pls(&chain(2.0)).is_valid());
    }

    #[test]
    fn null_lengths() {
        let s = chain(2.0);
        let tau = GeneralizedTimeFunction::new(vec![0.0, 1.0, 3.0]);
        let constant = PiecewiseCausalPath { vertices: vec![1, 1], tags: vec![SegmentTag::Trivial] };
        assert_eq!(path_null_length(&s, &tau, &constant).unwrap(), 0.0);
        let future = PiecewiseCausalPath { vertices: vec![0, 1, 2], tags: vec![SegmentTag::Future; 2] };
        assert_eq!(path_null_length(&s, &tau, &future).unwrap(), 3.0);
        let bad = PiecewiseCausalPath { vertices: vec![2, 1], tags: vec![SegmentTag::Future] };
        assert!(path_null_length(&s, &tau, &bad).is_err());
    }

    #[test]
    fn zigzag_null_length() {
        let s = chain(2.0);
        // p = 0, w = 2, q = 1 with tau = (0, 1, 2).
        let tau = GeneralizedTimeFunction::new(vec![0.0, 1.0, 2.0]);
        let zig = PiecewiseCausalPath { vertices: vec![0, 2, 1], tags: vec![SegmentTag::Future, SegmentTag::Past] };
        assert_eq!(path_null_length(&s, &tau, &zig).unwrap(), 3.0);
    }

    #[test]
    fn t_matrix_examples() {
        let r = rho_length_and_t(&chain(2.0)).unwrap();
        assert_eq!(r.t_matrix.get(0, 2), 2.0);
        assert!(r.rho_equals_t());
        let r = rho_length_and_t(&chain(3.0)).unwrap();
        assert_eq!(r.t_matrix.get(0, 2), 3.0);
        assert!(r.rho_equals_t());
        assert_eq!(r.t_matrix.get(2, 0), 0.0);
        assert_eq!(chain_length(&chain(3.0), &[0, 1, 2]).unwrap(), 2.0);
    }

    #[test]
    fn causal_cycles_are_rejected() {
        let base = FiniteLengthSpace::line(&[0.0, 1.0]).unwrap();
        let s = DiscretePreLengthSpace::new(
            base,
            SquareMatrix::filled(2, true),
            SquareMatrix::filled(2, false),
            SquareMatrix::filled(2, 0.0),
        )
        .unwrap();
        assert!(matches!(rho_length_and_t(&s), Err(Error::CausalCycle(0, 1))));
    }

    #[test]
    fn time_function_and_anti_lipschitz() {
        let s = two_chain(true, 1.0);
        let up = GeneralizedTimeFunction::new(vec![0.0, 1.0]);
        assert!(check_time_function(&s, &up).unwrap().pass);
        let down = GeneralizedTimeFunction::new(vec![1.0, 0.0]);
        assert_eq!(check_time_function(&s, &down).unwrap().witness, Some((0, 1)));
        let d_u = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let steep = GeneralizedTimeFunction::new(vec![0.0, 2.0]);
        assert!(check_anti_lipschitz(&s, &steep, &[0, 1], &d_u).unwrap().pass);
        let flat = GeneralizedTimeFunction::new(vec![0.0, 0.5]);
        assert!(!check_anti_lipschitz(&s, &flat, &[0, 1], &d_u).unwrap().pass);
        let single = SquareMatrix::filled(1, 0.0);
        assert!(check_anti_lipschitz(&s, &flat, &[1], &single).unwrap().pass);
        let broken = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        assert!(check_anti_lipschitz(&s, &flat, &[0, 1], &broken).is_err());
    }

    #[test]
    fn null_distance_detours_through_common_future() {
        // p, q incomparable, both before w.
        let base = FiniteLengthSpace::from_rows(&[
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        let causal = SquareMatrix::from_fn(3, |i, j| i == j || j == 2);
        let chrono = SquareMatrix::from_fn(3, |i, j| i != j && j == 2);
        let rho = SquareMatrix::from_fn(3, |i, j| if i != j && j == 2 { 1.0 } else { 0.0 });
        let s = DiscretePreLengthSpace::new(base, causal, chrono, rho).unwrap();
        let tau = GeneralizedTimeFunction::new(vec![0.0, 0.0, 1.0]);
        let nd = null_distance_matrix(&s, &tau).unwrap();
        assert_eq!(nd.matrix.get(0, 1), 2.0);
        assert_eq!(nd.path(0, 1).unwrap(), vec![0, 2, 1]);
        assert_eq!(nd.matrix.get(0, 2), 1.0);
        assert_eq!(nd.matrix.get(1, 1), 0.0);
        assert!(nd.warning.is_none());
        assert!(properties_report(&s, &tau).unwrap().all_pass());
    }

    #[test]
    fn unreachable_pairs_are_infinite_with_warning() {
        let base = FiniteLengthSpace::line(&[0.0, 1.0]).unwrap();
        let s = DiscretePreLengthSpace::new(
            base,
            SquareMatrix::from_fn(2, |i, j| i == j),
            SquareMatrix::filled(2, false),
            SquareMatrix::filled(2, 0.0f64),
        )
        .unwrap();
        let nd = null_distance_matrix(&s, &GeneralizedTimeFunction::new(vec![0.0, 1.0])).unwrap();
        assert!(nd.matrix.get(0, 1).is_infinite());
        assert!(nd.warning.is_some());
    }

    #[test]
    fn antichain_neighbourhood() {
        let base = FiniteLengthSpace::line(&[0.0, 1.0, 2.0]).unwrap();
        let s = DiscretePreLengthSpace::new(
            base.clone(),
            SquareMatrix::from_fn(3, |i, j| i == j),
            SquareMatrix::filled(3, false),
            SquareMatrix::filled(3, 0.0),
        )
        .unwrap();
        let tau = GeneralizedTimeFunction::new(vec![0.0, 0.1, 5.0]);
        let nb = causally_convex_neighborhood(&s, &tau, 0, &[0, 1, 2], base.matrix(), 0.2).unwrap();
        assert!(nb.certified);
        assert_eq!(nb.members, vec![0]);
    }

    #[test]
    fn oversized_eps_is_a_precondition_error() {
        let base = FiniteLengthSpace::line(&[0.0, 1.0, 2.0]).unwrap();
        let s = DiscretePreLengthSpace::new(
            base.clone(),
            SquareMatrix::from_fn(3, |i, j| i == j),
            SquareMatrix::filled(3, false),
            SquareMatrix::filled(3, 0.0),
        )
        .unwrap();
        let tau = GeneralizedTimeFunction::new(vec![0.0, 0.1, 5.0]);
        let d_u = base.matrix().submatrix(&[0, 1]);
        assert!(causally_convex_neighborhood(&s, &tau, 0, &[0, 1], &d_u, 0.2).is_ok());
        assert!(matches!(
            causally_convex_neighborhood(&s, &tau, 0, &[0, 1], &d_u, 5.0),
            Err(Error::Precondition(_))
        ));
    }
}
