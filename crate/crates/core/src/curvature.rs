//! Timelike curvature bounds on cones: triangle comparison against the
//! Lorentzian model planes, warping concavity and the persistence experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cone::{ConeGrid, Interval, TimeSeparationRow, WarpingFunction, WarpingKind};
use crate::convergence::SUP_NORM_BASE_POINTS;
use crate::error::{param, Error, Result};
use crate::metric::{gh_distance_exact, quadruple_curvature_check, FiniteLengthSpace, GH_EXACT_LIMIT};
use crate::model::{realize_timelike_triangle, LorentzianModelPlane, ModelPoint, Side};
use crate::scalar::Scalar;

/// Timelike triangle `x << y << z` of grid nodes with DP sides and their realising chains.
#[derive(Clone, Debug, PartialEq)]
pub struct TimelikeTriangle<T> {
    pub vertices: [usize; 3],
    /// `a = rho(x,y)`, `b = rho(y,z)`, `c = rho(x,z)`.
    pub sides: [T; 3],
    /// Chains for `xy`, `yz`, `xz`, past vertex first.
    pub paths: [Vec<usize>; 3],
}

fn side_path<T: Scalar>(row: &TimeSeparationRow<T>, target: usize) -> Result<Vec<usize>> {
    row.path_to(target)
        .ok_or_else(|| Error::InvalidInput(format!("node {target} is not reachable from {}", row.source)))
}

impl<T: Scalar> TimelikeTriangle<T> {
    /// Builds the triangle on `[x, y, z]`. Each consecutive pair must be
    /// chronological or equal; equal vertices give a degenerate zero side.
    pub fn from_vertices(grid: &ConeGrid<T>, vertices: [usize; 3]) -> Result<Self> {
        let [x, y, z] = vertices;
        if vertices.iter().any(|&v| v >= grid.len()) {
            return Err(Error::InvalidInput("triangle vertex out of range".into()));
        }
        if x == z {
            return Err(Error::InvalidInput("triangle has coinciding endpoints x = z".into()));
        }
        let rx = grid.time_separation_row(x);
        let ry = grid.time_separation_row(y);
        let sides = [rx.values[y], ry.values[z], rx.values[z]];
        for (side, (u, v)) in [(0, (x, y)), (1, (y, z)), (2, (x, z))] {
            if u != v && !(sides[side] > T::zero()) {
                return Err(Error::InvalidInput(format!("nodes {u} and {v} are not chronologically related")));
            }
        }
        let paths = [side_path(&rx, y)?, side_path(&ry, z)?, side_path(&rx, z)?];
        Ok(Self { vertices, sides, paths })
    }

    /// Accumulated step lengths along a side's chain.
    fn accumulated(&self, grid: &ConeGrid<T>, side: Side) -> Vec<T> {
        let path = &self.paths[side.index()];
        let mut acc = Vec::with_capacity(path.len());
        let mut total = T::zero();
        acc.push(total);
        for e in path.windows(2) {
            total = total + grid.step_length(e[0], e[1]);
            acc.push(total);
        }
        acc
    }
}

/// Outcome of [`sample_timelike_triangles`].
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleSample<T> {
    pub triangles: Vec<TimelikeTriangle<T>>,
    pub attempts: usize,
    /// Triangles dropped for violating the model-plane size restriction.
    pub filtered_size: usize,
    /// Triangles dropped for a side above the cap.
    pub filtered_cap: usize,
    pub diagnostic: Option<String>,
}

/// Restrictions on sampled triangles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangleBounds<T> {
    /// Upper bound on every side.
    pub side_cap: Option<T>,
    /// Lower bound on `rho / dt` for `xy` and `yz` (hence for `xz`). Sides
    /// close to null make the comparison triangle ill-conditioned: a small DP
    /// deficit there moves the model vertices far.
    pub min_steepness: T,
}

impl<T: Scalar> Default for TriangleBounds<T> {
    fn default() -> Self {
        Self { side_cap: None, min_steepness: T::zero() }
    }
}

/// Seeded sample of `count` timelike triangles admissible for curvature `k`
/// and within `bounds`.
pub fn sample_timelike_triangles<T: Scalar>(
    grid: &ConeGrid<T>,
    count: usize,
    seed: u64,
    k: T,
    bounds: TriangleBounds<T>,
) -> Result<TriangleSample<T>> {
    if !(bounds.min_steepness >= T::zero() && bounds.min_steepness < T::one()) {
        return Err(param("min_steepness", "must lie in [0, 1)"));
    }
    let plane = LorentzianModelPlane::new(k)?;
    let mut out = TriangleSample { triangles: Vec::new(), attempts: 0, filtered_size: 0, filtered_cap: 0, diagnostic: None };
    if count == 0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_attempts = 200 * count;
    let bottom = grid.fiber_len() * grid.n_t().saturating_sub(1);
    if bottom == 0 {
        out.diagnostic = Some("the grid has fewer than three time levels".into());
        return Ok(out);
    }
    while out.triangles.len() < count && out.attempts < max_attempts {
        out.attempts += 1;
        let x = rng.gen_range(0..bottom);
        let rx = grid.time_separation_row(x);
        let steep = |row: &TimeSeparationRow<T>, v: usize| {
            let dt = grid.point(v).t - grid.point(row.source).t;
            row.values[v] > T::zero() && row.values[v] >= bounds.min_steepness * dt
        };
        let future: Vec<usize> = (0..grid.len()).filter(|&v| steep(&rx, v)).collect();
        if future.is_empty() {
            continue;
        }
        let y = future[rng.gen_range(0..future.len())];
        let ry = grid.time_separation_row(y);
        let beyond: Vec<usize> = (0..grid.len()).filter(|&v| steep(&ry, v)).collect();
        if beyond.is_empty() {
            continue;
        }
        let z = beyond[rng.gen_range(0..beyond.len())];
        let sides = [rx.values[y], ry.values[z], rx.values[z]];
        if let Some(bound) = plane.size_bound() {
            if sides.iter().any(|&s| s >= bound) {
                out.filtered_size += 1;
                continue;
            }
        }
        if let Some(cap) = bounds.side_cap {
            if sides.iter().any(|&s| s > cap) {
                out.filtered_cap += 1;
                continue;
            }
        }
        let paths = [side_path(&rx, y)?, side_path(&ry, z)?, side_path(&rx, z)?];
        out.triangles.push(TimelikeTriangle { vertices: [x, y, z], sides, paths });
    }
    if out.triangles.is_empty() {
        out.diagnostic = Some(format!("no admissible timelike triangle found in {} attempts", out.attempts));
    } else if out.triangles.len() < count {
        out.diagnostic = Some(format!("only {} of {count} triangles found", out.triangles.len()));
    }
    Ok(out)
}

/// Which comparison inequality is tested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundDirection {
    /// Timelike curvature bounded below by `K`: `rho(p, q) <= rho'(p', q')`.
    Lower,
    /// Timelike curvature bounded above by `K`: `rho(p, q) >= rho'(p', q')`.
    Upper,
}

/// One probe pair and its comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRecord<T> {
    pub sides: (Side, Side),
    /// Time separations of the snapped nodes from each side's past vertex;
    /// the model points sit at the same values.
    pub params: (T, T),
    pub nodes: (usize, usize),
    /// Distance of each snapped node's parameter from the prescribed one.
    pub snapping: (T, T),
    pub rho: T,
    pub rho_model: T,
    /// Slope-lattice estimate of how far the single-step DP falls short of
    /// the straight segment between the nodes.
    pub dp_bound: T,
    /// Nonnegative iff the inequality holds within tolerance.
    pub margin: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureVerdict<T> {
    pub curvature: T,
    pub direction: BoundDirection,
    pub pass: bool,
    pub tolerance: T,
    pub triangle: [usize; 3],
    pub sides: [T; 3],
    pub probes: Vec<ProbeRecord<T>>,
    /// Index into `probes` of the smallest margin.
    pub worst: Option<usize>,
    /// Whether `tolerance` exceeds every probe's `dp_bound`.
    pub tolerance_dominates_dp: bool,
}

impl<T: Scalar> CurvatureVerdict<T> {
    pub fn worst_margin(&self) -> Option<T> {
        self.worst.map(|i| self.probes[i].margin)
    }
}

const PROBE_SIDE_PAIRS: [(Side, Side); 3] = [(Side::XY, Side::XZ), (Side::YZ, Side::XZ), (Side::XY, Side::YZ)];

fn snap<T: Scalar>(acc: &[T], s: T) -> (usize, T) {
    acc.iter()
        .enumerate()
        .map(|(i, &v)| (i, (v - s).abs()))
        .fold((0, T::infinity()), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// Deficit of the single-step DP against a straight segment: steps move by
/// multiples of the fiber mesh, so slopes between two lattice slopes are only
/// reached by mixing them, and slopes past the last causal one not at all.
fn slope_lattice_bound<T: Scalar>(grid: &ConeGrid<T>, mesh: T, early: usize, late: usize) -> T {
    let (t0, t1) = (grid.point(early).t, grid.point(late).t);
    let dt = t1 - t0;
    if dt <= T::zero() {
        return T::zero();
    }
    let f = grid.warping().value(T::lit(0.5) * (t0 + t1));
    let s = f * grid.fiber().dist(grid.fiber_of(early), grid.fiber_of(late)) / dt;
    let g = |s: T| (T::one() - s * s).max(T::zero()).sqrt();
    let sigma = f * mesh / grid.step();
    if !(sigma > T::zero()) {
        return T::zero();
    }
    let lo = (s / sigma).floor() * sigma;
    let hi = lo + sigma;
    let gap = if hi > T::one() { g(s) } else { g(s) - (g(lo) + (g(hi) - g(lo)) * (s - lo) / sigma) };
    dt * gap.max(T::zero())
}

fn two_way<T: Scalar>(plane: &LorentzianModelPlane<T>, p: ModelPoint<T>, q: ModelPoint<T>) -> Result<T> {
    Ok(plane.time_separation(p, q)?.max(plane.time_separation(q, p)?))
}

/// Compares `n_probe` pairs of points on the sides of `tri` with the
/// corresponding points of its comparison triangle in the model plane of curvature `k`.
pub fn triangle_comparison<T: Scalar>(
    grid: &ConeGrid<T>,
    tri: &TimelikeTriangle<T>,
    k: T,
    direction: BoundDirection,
    n_probe: usize,
    tol: T,
) -> Result<CurvatureVerdict<T>> {
    if !(tol >= T::zero()) {
        return Err(param("tol", "must be nonnegative"));
    }
    let [a, b, c] = tri.sides;
    let model = realize_timelike_triangle(k, a, b, c)?;
    let acc = Side::ALL.map(|s| tri.accumulated(grid, s));
    let mesh = grid.fiber_mesh();
    let mut verdict = CurvatureVerdict {
        curvature: k,
        direction,
        pass: true,
        tolerance: tol,
        triangle: tri.vertices,
        sides: tri.sides,
        probes: Vec::with_capacity(n_probe),
        worst: None,
        tolerance_dominates_dp: true,
    };
    let denom = T::from_usize_lossy(n_probe + 1);
    for i in 0..n_probe {
        let (sp, sq) = PROBE_SIDE_PAIRS[i % PROBE_SIDE_PAIRS.len()];
        let u = T::from_usize_lossy(i + 1) / denom;
        let v = T::from_usize_lossy(n_probe - i) / denom;
        let (s_p, s_q) = (u * tri.sides[sp.index()], v * tri.sides[sq.index()]);
        let (ip, err_p) = snap(&acc[sp.index()], s_p);
        let (iq, err_q) = snap(&acc[sq.index()], s_q);
        let (s_p, s_q) = (acc[sp.index()][ip], acc[sq.index()][iq]);
        let (p, q) = (tri.paths[sp.index()][ip], tri.paths[sq.index()][iq]);
        let (early, late) = if grid.level_of(p) <= grid.level_of(q) { (p, q) } else { (q, p) };
        let rho = grid.time_separation_row(early).values[late];
        let rho_model = two_way(&model.plane, model.point_on_side(sp, s_p)?, model.point_on_side(sq, s_q)?)?;
        let margin = match direction {
            BoundDirection::Lower => rho_model + tol - rho,
            BoundDirection::Upper => rho - rho_model + tol,
        };
        let dp_bound = slope_lattice_bound(grid, mesh, early, late);
        if dp_bound > tol {
            verdict.tolerance_dominates_dp = false;
        }
        if margin < T::zero() {
            verdict.pass = false;
        }
        if verdict.worst.is_none_or(|w| margin < verdict.probes[w].margin) {
            verdict.worst = Some(verdict.probes.len());
        }
        verdict.probes.push(ProbeRecord {
            sides: (sp, sq),
            params: (s_p, s_q),
            nodes: (p, q),
            snapping: (err_p, err_q),
            rho,
            rho_model,
            dp_bound,
            margin,
        });
    }
    Ok(verdict)
}

/// Sign convention of [`concavity_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Concavity {
    /// `f'' - K' f <= 0`.
    Concave,
    /// `f'' - K' f >= 0`.
    Convex,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConcavityVerdict<T> {
    pub pass: bool,
    /// Largest violation side value of `f'' - K' f` and where it occurs.
    pub worst: (T, T),
    pub points: usize,
}

/// Threshold of [`concavity_check`].
pub const CONCAVITY_TOL: f64 = 1e-9;

fn oversampled<T: Scalar>(i: Interval<T>) -> Vec<T> {
    i.uniform_grid(SUP_NORM_BASE_POINTS * 10)
}

/// `f'' - K' f` against zero on the oversampled grid, or on the knots of a
/// tabulated warping via second divided differences.
pub fn concavity_check<T: Scalar>(f: &WarpingFunction<T>, k_prime: T, mode: Concavity) -> Result<ConcavityVerdict<T>> {
    let samples: Vec<(T, T)> = match f.kind() {
        WarpingKind::Tabulated { knots, values } => {
            if knots.len() < 3 {
                return Err(Error::Precondition("second differences need at least three knots".into()));
            }
            let h_min = knots.windows(2).map(|w| w[1] - w[0]).fold(T::infinity(), T::min);
            let noise = T::lit(4.0) * T::epsilon() * f.f_max() / (h_min * h_min);
            if noise > T::lit(CONCAVITY_TOL) {
                return Err(Error::Precondition(format!(
                    "knot spacing {h_min} makes second differences unstable (rounding noise {noise})"
                )));
            }
            (1..knots.len() - 1)
                .map(|i| {
                    let (h0, h1) = (knots[i] - knots[i - 1], knots[i + 1] - knots[i]);
                    let d2 = T::lit(2.0) * ((values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0) / (h0 + h1);
                    (knots[i], d2 - k_prime * values[i])
                })
                .collect()
        }
        _ => oversampled(f.domain())
            .into_iter()
            .map(|t| (t, f.second_derivative(t).expect("closed forms are twice differentiable") - k_prime * f.value(t)))
            .collect(),
    };
    let signed = |v: T| if mode == Concavity::Concave { v } else { -v };
    let worst = samples.iter().copied().reduce(|best, (t, v)| if signed(v) > signed(best.1) { (t, v) } else { best });
    let worst = worst.expect("at least one sample");
    Ok(ConcavityVerdict { pass: signed(worst.1) <= T::lit(CONCAVITY_TOL), worst, points: samples.len() })
}

/// `sup (K' f^2 - f'^2)` over the oversampled grid.
pub fn compute_k<T: Scalar>(f: &WarpingFunction<T>, k_prime: T) -> T {
    oversampled(f.domain())
        .into_iter()
        .map(|t| {
            let (v, d) = (f.value(t), f.derivative(t));
            k_prime * v * v - d * d
        })
        .fold(T::neg_infinity(), T::max)
}

/// Experiment variants.
#[derive(Clone, Debug)]
pub enum PersistenceMode<T> {
    /// `f = 1`, `K' = 0` on `interval`.
    Product { interval: Interval<T> },
    /// `f(t) = t` on a compact `interval` with `a > 0`.
    MinkowskiCone { interval: Interval<T> },
    /// One warping and `K'` per fiber plus the limit pair.
    Warped {
        members: Vec<(WarpingFunction<T>, T)>,
        limit: (WarpingFunction<T>, T),
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PersistenceConfig<T> {
    pub n_t: usize,
    /// Graph-induced fibers are subdivided until no edge exceeds this length
    /// before the cone is built, so single time steps resolve fiber slopes.
    pub fiber_mesh: Option<T>,
    pub seed: u64,
    pub n_triangles: usize,
    pub n_probe: usize,
    pub tol: T,
    pub quadruple_tol: T,
    pub bounds: TriangleBounds<T>,
}

/// Verdicts for one fiber (or the limit).
#[derive(Clone, Debug, PartialEq)]
pub struct PersistenceRow<T> {
    pub label: String,
    pub quadruple_k: T,
    pub quadruple_pass: bool,
    pub triangle_k: T,
    /// `None` when no triangle comparison was run for this row.
    pub triangle_pass: Option<bool>,
    pub triangles: usize,
    pub worst_margin: Option<T>,
    pub concavity_pass: Option<bool>,
    pub computed_k: Option<T>,
    pub gh_to_limit: Option<T>,
    pub diagnostics: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PersistenceReport<T> {
    pub mode: &'static str,
    pub rows: Vec<PersistenceRow<T>>,
}

impl<T: Scalar> PersistenceReport<T> {
    /// Rows whose fiber and cone verdicts disagree.
    pub fn disagreements(&self) -> Vec<&str> {
        self.rows
            .iter()
            .filter(|r| r.triangle_pass.is_some_and(|t| t != r.quadruple_pass))
            .map(|r| r.label.as_str())
            .collect()
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| {
            r.quadruple_pass && r.triangle_pass.unwrap_or(true) && r.concavity_pass.unwrap_or(true)
        })
    }
}

fn cone_over<T: Scalar>(fiber: &FiniteLengthSpace<T>, w: WarpingFunction<T>, cfg: &PersistenceConfig<T>) -> Result<ConeGrid<T>> {
    let longest = fiber.edges().iter().map(|e| e.weight).fold(T::zero(), T::max);
    let pieces = match cfg.fiber_mesh {
        Some(mesh) if mesh > T::zero() && longest > mesh => (longest / mesh).ceil().to_usize().unwrap_or(1),
        _ => 1,
    };
    let fine = if pieces > 1 { fiber.subdivide(pieces)? } else { fiber.clone() };
    ConeGrid::new(fine, w, cfg.n_t)
}

/// Runs the triangle comparisons on `grid`; returns (pass, triangle count, worst margin).
fn cone_verdict<T: Scalar>(
    grid: &ConeGrid<T>,
    k: T,
    cfg: &PersistenceConfig<T>,
    diagnostics: &mut Vec<String>,
) -> Result<(bool, usize, Option<T>)> {
    let sample = sample_timelike_triangles(grid, cfg.n_triangles, cfg.seed, k, cfg.bounds)?;
    if let Some(d) = &sample.diagnostic {
        diagnostics.push(d.clone());
    }
    let mut pass = true;
    let mut worst: Option<T> = None;
    for tri in &sample.triangles {
        let v = triangle_comparison(grid, tri, k, BoundDirection::Lower, cfg.n_probe, cfg.tol)?;
        pass &= v.pass;
        if !v.tolerance_dominates_dp {
            diagnostics.push(format!("tolerance below the slope-lattice DP bound on triangle {:?}", tri.vertices));
        }
        if let Some(m) = v.worst_margin() {
            worst = Some(worst.map_or(m, |w| w.min(m)));
        }
    }
    Ok((pass, sample.triangles.len(), worst))
}

fn gh_if_small<T: Scalar>(a: &FiniteLengthSpace<T>, b: &FiniteLengthSpace<T>) -> Result<Option<T>> {
    if a.len() * b.len() <= GH_EXACT_LIMIT {
        Ok(Some(gh_distance_exact(a, b)?.distance))
    } else {
        Ok(None)
    }
}

/// Cross-tabulates fiber quadruple verdicts with cone triangle verdicts for
/// each fiber and the limit.
pub fn persistence_experiment<T: Scalar>(
    fibers: &[FiniteLengthSpace<T>],
    limit: &FiniteLengthSpace<T>,
    mode: &PersistenceMode<T>,
    cfg: &PersistenceConfig<T>,
) -> Result<PersistenceReport<T>> {
    let labelled: Vec<(String, &FiniteLengthSpace<T>)> = fibers
        .iter()
        .enumerate()
        .map(|(i, f)| (format!("fiber{i}"), f))
        .chain(std::iter::once(("limit".to_string(), limit)))
        .collect();
    let mut rows = Vec::new();
    let name = match mode {
        PersistenceMode::Product { .. } => "product",
        PersistenceMode::MinkowskiCone { .. } => "minkowski_cone",
        PersistenceMode::Warped { .. } => "warped",
    };
    if let PersistenceMode::Warped { members, .. } = mode {
        if members.len() != fibers.len() {
            return Err(Error::InvalidInput(format!("{} warpings for {} fibers", members.len(), fibers.len())));
        }
    }
    for (idx, (label, fiber)) in labelled.iter().enumerate() {
        let is_limit = idx == fibers.len();
        let mut diagnostics = Vec::new();
        let gh_to_limit = if is_limit { None } else { gh_if_small(fiber, limit)? };
        let (quadruple_k, triangle_k, warping, concavity_pass, computed_k) = match mode {
            PersistenceMode::Product { interval } => {
                (T::zero(), T::zero(), WarpingFunction::constant(T::one(), *interval)?, None, None)
            }
            PersistenceMode::MinkowskiCone { interval } => {
                if !(interval.a() > T::zero()) {
                    return Err(Error::Precondition("the Minkowski cone needs a > 0".into()));
                }
                (-T::one(), T::zero(), WarpingFunction::affine(T::zero(), T::one(), *interval)?, None, None)
            }
            PersistenceMode::Warped { members, limit } => {
                let (w, kp) = if is_limit { limit.clone() } else { members[idx].clone() };
                let conc = concavity_check(&w, kp, Concavity::Concave)?;
                let kn = compute_k(&w, kp);
                (kn, kp, w, Some(conc.pass), Some(kn))
            }
        };
        let quad = quadruple_curvature_check(fiber, quadruple_k, cfg.quadruple_tol)?;
        // Warped mode compares only the limit cone.
        let run_cone = !matches!(mode, PersistenceMode::Warped { .. }) || is_limit;
        let (triangle_pass, triangles, worst_margin) = if run_cone {
            let grid = cone_over(fiber, warping, cfg)?;
            let (p, n, w) = cone_verdict(&grid, triangle_k, cfg, &mut diagnostics)?;
            (Some(p), n, w)
        } else {
            (None, 0, None)
        };
        rows.push(PersistenceRow {
            label: label.clone(),
            quadruple_k,
            quadruple_pass: quad.pass,
            triangle_k,
            triangle_pass,
            triangles,
            worst_margin,
            concavity_pass,
            computed_k,
            gh_to_limit,
            diagnostics,
        });
    }
    Ok(PersistenceReport { mode: name, rows })
}
