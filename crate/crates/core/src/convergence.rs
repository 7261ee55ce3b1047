//! Uniform convergence of warping functions and null distances, lifted
//! correspondences, `3 eps`-isometries and uniformly totally bounded families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cone::{ConeGrid, Interval, WarpingFunction, WarpingKind};
use crate::error::{param, Error, Result};
use crate::matrix::SquareMatrix;
use crate::metric::{epsilon_net, Correspondence, FiniteLengthSpace};
use crate::scalar::Scalar;

/// Points per unit of `oversample` in [`sup_norm`].
pub const SUP_NORM_BASE_POINTS: usize = 100;

fn below<T: Scalar>(a: T, b: T) -> bool {
    a < b - T::rel_eps() * (T::one() + b.abs())
}

fn knots<T: Scalar>(f: &WarpingFunction<T>) -> &[T] {
    match f.kind() {
        WarpingKind::Tabulated { knots, .. } => knots,
        _ => &[],
    }
}

/// `max |f - g|` on `100 * oversample + 1` uniform points plus every tabulation knot.
pub fn sup_norm<T: Scalar>(f: &WarpingFunction<T>, g: &WarpingFunction<T>, oversample: usize) -> Result<T> {
    if oversample == 0 {
        return Err(param("oversample", "must be positive"));
    }
    if f.domain() != g.domain() {
        return Err(Error::InvalidInput("warping functions live on different intervals".into()));
    }
    let grid = f.domain().uniform_grid(SUP_NORM_BASE_POINTS * oversample);
    Ok(grid
        .iter()
        .chain(knots(f))
        .chain(knots(g))
        .map(|&t| (f.value(t) - g.value(t)).abs())
        .fold(T::zero(), T::max))
}

/// Indexed warping functions converging to `limit`, all bounded below by `lower_bound`.
#[derive(Clone, Debug)]
pub struct WarpingSequence<T> {
    members: Vec<(usize, WarpingFunction<T>)>,
    limit: WarpingFunction<T>,
    lower_bound: T,
}

impl<T: Scalar> WarpingSequence<T> {
    pub fn new(members: Vec<(usize, WarpingFunction<T>)>, limit: WarpingFunction<T>, lower_bound: T) -> Result<Self> {
        if !(lower_bound > T::zero()) {
            return Err(param("lower_bound", "must be positive"));
        }
        let domain = limit.domain();
        if limit.f_min() < lower_bound {
            return Err(Error::InvalidInput(format!("limit has minimum {} below {lower_bound}", limit.f_min())));
        }
        for (j, f) in &members {
            if f.domain() != domain {
                return Err(Error::InvalidInput(format!("member {j} lives on a different interval")));
            }
            if f.f_min() < lower_bound {
                return Err(Error::InvalidInput(format!("member {j} has minimum {} below {lower_bound}", f.f_min())));
            }
        }
        Ok(Self { members, limit, lower_bound })
    }

    pub fn members(&self) -> &[(usize, WarpingFunction<T>)] {
        &self.members
    }

    pub fn limit(&self) -> &WarpingFunction<T> {
        &self.limit
    }

    pub fn lower_bound(&self) -> T {
        self.lower_bound
    }

    pub fn interval(&self) -> Interval<T> {
        self.limit.domain()
    }

    /// `(j, ||f_j - f||)` for every member, on the default oversampled grid.
    pub fn sup_norms(&self) -> Result<Vec<(usize, T)>> {
        self.members.iter().map(|(j, f)| Ok((*j, sup_norm(&self.limit, f, 10)?))).collect()
    }
}

/// Largest number of pair entries evaluated before sampling kicks in.
pub const FULL_PAIR_LIMIT: usize = 1_000_000;

/// Which grid pairs a check visits: whole rows from the listed sources.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SamplePairs {
    All,
    Sources(Vec<usize>),
}

impl SamplePairs {
    /// All pairs up to [`FULL_PAIR_LIMIT`] entries; otherwise one seeded
    /// random source from each of `FULL_PAIR_LIMIT / n` equal strata.
    pub fn default_for(n: usize, seed: u64) -> Self {
        if n.saturating_mul(n) <= FULL_PAIR_LIMIT {
            return SamplePairs::All;
        }
        let strata = (FULL_PAIR_LIMIT / n).max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sources = (0..strata)
            .map(|k| {
                let (lo, hi) = (k * n / strata, ((k + 1) * n / strata).max(k * n / strata + 1));
                rng.gen_range(lo..hi)
            })
            .collect();
        SamplePairs::Sources(sources)
    }

    pub fn sources(&self, n: usize) -> Vec<usize> {
        match self {
            SamplePairs::All => (0..n).collect(),
            SamplePairs::Sources(s) => s.clone(),
        }
    }
}

/// Sandwich results for one member of a sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexReport<T> {
    pub j: usize,
    pub eps: T,
    pub pairs: usize,
    /// `max |d_{f_j} - d_f|` over the sampled pairs.
    pub sup_deviation: T,
    pub lower_violations: usize,
    pub upper_violations: usize,
    /// Smallest slack of the lower and upper inequalities, with its pair.
    pub worst_lower: (usize, usize, T),
    pub worst_upper: (usize, usize, T),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport<T> {
    pub f_min: T,
    pub checked: Vec<IndexReport<T>>,
    /// `(j, eps_j, reason)` for members left out.
    pub excluded: Vec<(usize, T, String)>,
    /// Sup deviations do not increase with `j` by more than the grid tolerance.
    pub deviations_nonincreasing: bool,
    pub grid_tolerance: T,
}

impl<T: Scalar> ConvergenceReport<T> {
    pub fn sandwich_holds(&self) -> bool {
        self.checked.iter().all(|r| r.lower_violations == 0 && r.upper_violations == 0)
    }
}

/// Lower and upper sandwich bounds for `d_{f_j}` given `d_f`, `eps` and `f_min`:
/// `d - eps (1 + 3 d / f_min)` and `d + eps (1 + 8 eps / f_min + 8 d / f_min)`.
pub fn sandwich_bounds<T: Scalar>(d: T, eps: T, f_min: T) -> (T, T) {
    let eight = T::lit(8.0);
    (
        d - eps * (T::one() + T::lit(3.0) / f_min * d),
        d + eps * (T::one() + eight * eps / f_min + eight / f_min * d),
    )
}

/// Checks the two-sided sandwich for every member on identical grids over `fiber`.
/// Members with `eps_j > f_min / 4` are excluded.
pub fn null_convergence_check<T: Scalar>(
    seq: &WarpingSequence<T>,
    fiber: &FiniteLengthSpace<T>,
    n_t: usize,
    pairs: &SamplePairs,
) -> Result<ConvergenceReport<T>> {
    let limit_grid = ConeGrid::new(fiber.clone(), seq.limit().clone(), n_t)?;
    let sources = pairs.sources(limit_grid.len());
    if let Some(&s) = sources.iter().find(|&&s| s >= limit_grid.len()) {
        return Err(Error::InvalidInput(format!("sample source {s} out of range")));
    }
    let f_min = seq.limit().f_min();
    let base = limit_grid.null_distance_rows(&sources);
    let mut report = ConvergenceReport {
        f_min,
        checked: Vec::new(),
        excluded: Vec::new(),
        deviations_nonincreasing: true,
        grid_tolerance: limit_grid.grid_tolerance(),
    };
    let mut ordered: Vec<&(usize, WarpingFunction<T>)> = seq.members().iter().collect();
    ordered.sort_by_key(|(j, _)| *j);
    for (j, f) in ordered {
        let eps = sup_norm(seq.limit(), f, 10)?;
        if eps > f_min / T::lit(4.0) {
            report.excluded.push((*j, eps, format!("eps_j = {eps} exceeds f_min / 4 = {}", f_min / T::lit(4.0))));
            continue;
        }
        let grid = ConeGrid::new(fiber.clone(), f.clone(), n_t)?;
        let mut r = IndexReport {
            j: *j,
            eps,
            pairs: 0,
            sup_deviation: T::zero(),
            lower_violations: 0,
            upper_violations: 0,
            worst_lower: (0, 0, T::infinity()),
            worst_upper: (0, 0, T::infinity()),
        };
        let mut k = 0;
        grid.visit_null_distance_rows(&sources, |s, row| {
            for (v, (&dj, &d)) in row.iter().zip(&base[k]).enumerate() {
                r.pairs += 1;
                r.sup_deviation = r.sup_deviation.max((dj - d).abs());
                let (lo, hi) = sandwich_bounds(d, eps, f_min);
                if below(dj, lo) {
                    r.lower_violations += 1;
                }
                if below(hi, dj) {
                    r.upper_violations += 1;
                }
                if dj - lo < r.worst_lower.2 {
                    r.worst_lower = (s, v, dj - lo);
                }
                if hi - dj < r.worst_upper.2 {
                    r.worst_upper = (s, v, hi - dj);
                }
            }
            k += 1;
        });
        report.checked.push(r);
    }
    report.deviations_nonincreasing = report
        .checked
        .windows(2)
        .all(|w| w[1].sup_deviation <= w[0].sup_deviation + report.grid_tolerance);
    Ok(report)
}

/// The product cone `T x_1 X` on grid times `times`, with the exact null distance `max(d, |dt|)`.
pub fn product_cone_space<T: Scalar>(fiber: &FiniteLengthSpace<T>, times: &[T]) -> Result<FiniteLengthSpace<T>> {
    let f = fiber.len();
    let n = f * times.len();
    let dist = SquareMatrix::from_fn(n, |u, v| fiber.dist(u % f, v % f).max((times[u / f] - times[v / f]).abs()));
    let ids = (0..n).map(|u| format!("t{}_{}", u / f, fiber.ids()[u % f])).collect();
    FiniteLengthSpace::from_matrix(ids, dist)
}

/// A fiber correspondence lifted level by level to product cones.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedCorrespondence<T> {
    /// Pairs of flat grid indices `level * |X| + x`.
    pub lifted: Correspondence,
    pub base_distortion: T,
    pub lifted_distortion: T,
}

/// `R_hat = {((t, x_n), (t, x)) : (x_n, x) in R}` on the shared grid times, with
/// both distortions measured through `max(d, |dt|)`.
pub fn lift_correspondence<T: Scalar>(
    r: &Correspondence,
    cone_n: &ConeGrid<T>,
    cone: &ConeGrid<T>,
) -> Result<LiftedCorrespondence<T>> {
    for (name, g) in [("first", cone_n), ("second", cone)] {
        if g.warping().is_constant() != Some(T::one()) {
            return Err(Error::Unsupported(format!("the {name} cone is not a product: its warping is not identically 1")));
        }
    }
    if cone_n.interval() != cone.interval() || cone_n.n_t() != cone.n_t() {
        return Err(Error::InvalidInput("the cones do not share the time grid".into()));
    }
    let (xa, xb) = (cone_n.fiber(), cone.fiber());
    if r.sizes() != (xa.len(), xb.len()) {
        return Err(Error::InvalidInput("correspondence does not match the fibers".into()));
    }
    let times = cone.times();
    let pairs = r.pairs();
    let mut base = T::zero();
    let mut lifted = T::zero();
    for &(a, b) in pairs {
        for &(a2, b2) in pairs {
            let (da, db) = (xa.dist(a, a2), xb.dist(b, b2));
            base = base.max((da - db).abs());
            for &ti in times {
                for &tk in times {
                    let dt = (ti - tk).abs();
                    lifted = lifted.max((da.max(dt) - db.max(dt)).abs());
                }
            }
        }
    }
    let lifted_pairs = (0..times.len())
        .flat_map(|i| pairs.iter().map(move |&(a, b)| (cone_n.index(i, a), cone.index(i, b))))
        .collect();
    Ok(LiftedCorrespondence {
        lifted: Correspondence::new(lifted_pairs, cone_n.len(), cone.len())?,
        base_distortion: base,
        lifted_distortion: lifted,
    })
}

/// The map `F` between balls around `p0` and its verification.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonIsometry<T> {
    /// `(p, F(p))` for every `p` in the source ball.
    pub map: Vec<(usize, usize)>,
    pub source_ball: Vec<usize>,
    pub target_ball: Vec<usize>,
    /// `max |d_f(p,q) - d_{f_n}(F p, F q)|` over the source ball.
    pub distortion: T,
    /// Largest distance from a target-ball point to the image.
    pub net_radius: T,
    pub eps: T,
    pub gh_bound: T,
}

impl<T: Scalar> EpsilonIsometry<T> {
    pub fn pass(&self) -> bool {
        !below(T::lit(3.0) * self.eps, self.distortion) && !below(self.eps, self.net_radius)
    }
}

/// Builds `F` from the `d_f`-ball of radius `r` about `p0` to the
/// `d_{f_n}`-ball: points already in the target ball stay, the rest move to
/// their `d_{f_n}`-nearest target point. The ball inclusions
/// `B_{f_n}((1-eps) r) in B_f(r)` and `B_f((1-eps) r) in B_{f_n}(r)` are checked first.
pub fn epsilon_isometry<T: Scalar>(
    c_f: &ConeGrid<T>,
    c_fn: &ConeGrid<T>,
    r: T,
    p0: usize,
    eps: T,
) -> Result<EpsilonIsometry<T>> {
    if c_f.fiber().matrix() != c_fn.fiber().matrix() || c_f.interval() != c_fn.interval() || c_f.n_t() != c_fn.n_t() {
        return Err(Error::InvalidInput("the cones do not share a grid".into()));
    }
    if !(r > T::zero()) || !(eps >= T::zero() && eps < T::one()) {
        return Err(param("r/eps", "need r > 0 and 0 <= eps < 1"));
    }
    if p0 >= c_f.len() {
        return Err(Error::InvalidInput(format!("base point {p0} out of range")));
    }
    let from_f = c_f.null_distance_row(p0);
    let from_fn = c_fn.null_distance_row(p0);
    let inner = (T::one() - eps) * r;
    let within = |d: T, rad: T| !below(rad, d);
    for (q, (&df, &dn)) in from_f.iter().zip(&from_fn).enumerate() {
        if within(dn, inner) && !within(df, r) {
            return Err(Error::Precondition(format!(
                "inclusion B_fn((1-eps) r) in B_f(r) fails at node {q}: d_fn = {dn}, d_f = {df}"
            )));
        }
        if within(df, inner) && !within(dn, r) {
            return Err(Error::Precondition(format!(
                "inclusion B_f((1-eps) r) in B_fn(r) fails at node {q}: d_f = {df}, d_fn = {dn}"
            )));
        }
    }
    let source_ball: Vec<usize> = (0..c_f.len()).filter(|&q| within(from_f[q], r)).collect();
    let target_ball: Vec<usize> = (0..c_fn.len()).filter(|&q| within(from_fn[q], r)).collect();
    let in_target: Vec<bool> = from_fn.iter().map(|&d| within(d, r)).collect();
    let rows_f = c_f.null_distance_rows(&source_ball);
    let rows_fn = c_fn.null_distance_rows(&source_ball);
    let map: Vec<(usize, usize)> = source_ball
        .iter()
        .zip(&rows_fn)
        .map(|(&p, row)| {
            if in_target[p] {
                (p, p)
            } else {
                let q = target_ball
                    .iter()
                    .copied()
                    .min_by(|&a, &b| row[a].partial_cmp(&row[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)))
                    .unwrap_or(p0);
                (p, q)
            }
        })
        .collect();
    let images: Vec<usize> = map.iter().map(|&(_, q)| q).collect();
    let image_rows = c_fn.null_distance_rows(&images);
    let mut distortion = T::zero();
    for (row_f, row_image) in rows_f.iter().zip(&image_rows) {
        for (&(q, _), &fq) in map.iter().zip(&images) {
            distortion = distortion.max((row_f[q] - row_image[fq]).abs());
        }
    }
    let mut net_radius = T::zero();
    for &t in &target_ball {
        let nearest = image_rows.iter().map(|row| row[t]).fold(T::infinity(), T::min);
        net_radius = net_radius.max(nearest);
    }
    Ok(EpsilonIsometry {
        map,
        source_ball,
        target_ball,
        distortion,
        net_radius,
        eps,
        gh_bound: T::lit(6.0) * eps,
    })
}

/// Certificate for one family member.
#[derive(Clone, Debug, PartialEq)]
pub struct MemberCertificate<T> {
    pub index: usize,
    /// Largest null distance from a grid node to the product net, with the node.
    pub worst: (usize, T),
    /// Every node within the mesh.
    pub certified: bool,
    /// Every node within the mesh plus the grid tolerance; the discrete cone
    /// can exceed its continuum distances by a time step.
    pub certified_within_grid_tolerance: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetCertificate<T> {
    /// Grid levels forming an `eps`-net of the time grid.
    pub time_levels: Vec<usize>,
    /// Fiber indices forming an `eps`-net of the fiber.
    pub fiber_points: Vec<usize>,
    /// Flat grid indices of the product net.
    pub net: Vec<usize>,
    pub mesh: T,
    pub members: Vec<MemberCertificate<T>>,
    pub excluded: Vec<(usize, String)>,
}

impl<T: Scalar> NetCertificate<T> {
    pub fn cardinality(&self) -> usize {
        self.net.len()
    }

    pub fn all_certified(&self) -> bool {
        self.members.iter().all(|m| m.certified)
    }
}

/// Certifies that products of `eps`-nets of the time grid and of the fiber
/// form an `eps * max(1, bound)`-net of every member cone, by computing the
/// null distance from every grid node to the net. Members exceeding `bound` are excluded.
pub fn uniform_total_boundedness<T: Scalar>(
    family: &[WarpingFunction<T>],
    bound: T,
    fiber: &FiniteLengthSpace<T>,
    n_t: usize,
    eps: T,
) -> Result<NetCertificate<T>> {
    if !(eps > T::zero()) {
        return Err(param("eps", "must be positive"));
    }
    let first = family.first().ok_or_else(|| Error::InvalidInput("empty family".into()))?;
    let interval = first.domain();
    let times = interval.uniform_grid(n_t);
    let time_space = FiniteLengthSpace::line(&times)?;
    let time_levels = epsilon_net(&time_space, eps)?.center_indices;
    let fiber_points = epsilon_net(fiber, eps)?.center_indices;
    let f = fiber.len();
    let net: Vec<usize> = time_levels.iter().flat_map(|&i| fiber_points.iter().map(move |&x| i * f + x)).collect();
    let mesh = eps * bound.max(T::one());
    let mut cert = NetCertificate { time_levels, fiber_points, net, mesh, members: Vec::new(), excluded: Vec::new() };
    for (index, w) in family.iter().enumerate() {
        if w.domain() != interval {
            cert.excluded.push((index, "member lives on a different interval".into()));
            continue;
        }
        if below(bound, w.f_max()) {
            cert.excluded.push((index, format!("maximum {} exceeds the bound {bound}", w.f_max())));
            continue;
        }
        let grid = ConeGrid::new(fiber.clone(), w.clone(), n_t)?;
        let to_net = grid.null_distance_to_set(&cert.net);
        let worst = to_net
            .iter()
            .copied()
            .enumerate()
            .fold((0, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        cert.members.push(MemberCertificate {
            index,
            worst,
            certified: !below(mesh, worst.1),
            certified_within_grid_tolerance: !below(mesh + grid.grid_tolerance(), worst.1),
        });
    }
    Ok(cert)
}
