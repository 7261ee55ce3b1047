use super::grid::ConeGrid;
use super::nulldist::MATRIX_POINT_LIMIT;
use super::warping::WarpingFunction;
use crate::error::{Error, Result};
use crate::lpls::DiscretePreLengthSpace;
use crate::matrix::SquareMatrix;
use crate::metric::FiniteLengthSpace;
use crate::scalar::Scalar;

/// Pairwise checks of the null distance against `f_min d` and `f_max d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeBoundsReport<T> {
    pub pairs_checked: usize,
    /// Pairs with `d_f < f_min d` (must be zero).
    pub lower_violations: usize,
    /// Causal pairs whose value differs from `|t_q - t_p|` (must be zero).
    pub causal_mismatches: usize,
    /// Off-diagonal zeros (must be zero).
    pub definiteness_violations: usize,
    /// Causal pairs with `|t_q - t_p| < f_min d` (must be zero).
    pub anti_lipschitz_violations: usize,
    /// Largest `d_f - f_max d` over non-causal pairs, with the pair.
    pub worst_upper_excess: Option<(usize, usize, T)>,
    pub upper_tolerance: T,
    pub refinement_hint: Option<String>,
}

impl<T: Scalar> ConeBoundsReport<T> {
    /// Exact checks only; the upper side is reported, not enforced.
    pub fn exact_checks_pass(&self) -> bool {
        self.lower_violations == 0
            && self.causal_mismatches == 0
            && self.definiteness_violations == 0
            && self.anti_lipschitz_violations == 0
    }

    pub fn upper_within_tolerance(&self) -> bool {
        self.worst_upper_excess.is_none_or(|(_, _, e)| !below(self.upper_tolerance, e))
    }
}

/// Two-sided comparison `min(1, f_min) d_1 <= d_f <= max(1, f_max) d_1` on identical grids.
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichReport<T> {
    pub pairs_checked: usize,
    pub lower_violations: usize,
    pub worst_lower: Option<(usize, usize, T)>,
    /// Largest `d_f - max(1, f_max) d_1`, with the pair.
    pub worst_upper_excess: Option<(usize, usize, T)>,
    pub upper_tolerance: T,
}

impl<T: Scalar> SandwichReport<T> {
    pub fn pass(&self) -> bool {
        self.lower_violations == 0 && self.worst_upper_excess.is_none_or(|(_, _, e)| !below(self.upper_tolerance, e))
    }
}

/// `d_f((t0, x), (t0, y))` against `d(x, y)` on one time slice.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberComparison<T> {
    /// Time of the grid level used.
    pub t0: T,
    pub pairs: usize,
    pub min_ratio: T,
    pub max_ratio: T,
    pub lower_violations: usize,
    /// Largest `d_f - f_max d`.
    pub max_upper_excess: T,
    /// Pairs with `d_f = d` exactly; meaningful when `f = 1`.
    pub exact_pairs: usize,
    /// Largest `|d_f - d|` when `f = 1`.
    pub unit_max_error: Option<T>,
    /// Grid tolerance plus `f_max` times the fiber mesh: a fiber without
    /// midpoints forces a detour of that order.
    pub tolerance: T,
}

impl<T: Scalar> FiberComparison<T> {
    pub fn pass(&self) -> bool {
        self.lower_violations == 0 && !below(self.tolerance, self.max_upper_excess)
    }
}

/// Defect `(G(t_end) - G(t_start)) - d(x_start, x_end)` of one monotone run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunDefect<T> {
    pub start: usize,
    pub end: usize,
    pub up: bool,
    pub defect: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizerAnalysis<T> {
    pub path: Vec<usize>,
    pub runs: Vec<RunDefect<T>>,
    pub step: T,
    /// Set when the pair is causally related and the analysis says nothing.
    pub vacuous: Option<String>,
}

impl<T: Scalar> MinimizerAnalysis<T> {
    pub fn max_defect(&self) -> T {
        self.runs.iter().map(|r| r.defect.abs()).fold(T::zero(), T::max)
    }
}

/// `a < b` beyond floating-point rounding at the scale of `b`.
fn below<T: Scalar>(a: T, b: T) -> bool {
    a < b - T::rel_eps() * (T::one() + b.abs())
}

impl<T: Scalar> ConeGrid<T> {
    /// Largest nearest-neighbour distance in the fiber.
    pub fn fiber_mesh(&self) -> T {
        let f = self.fiber_len();
        (0..f)
            .map(|x| self.sorted_neighbours(x).get(1).map_or(T::zero(), |&y| self.fiber().dist(x, y as usize)))
            .fold(T::zero(), T::max)
    }

    /// Checks the null distance rows from `sources` against the fiber bounds.
    pub fn bounds_report(&self, sources: &[usize]) -> ConeBoundsReport<T> {
        let (fmin, fmax) = (self.warping().f_min(), self.warping().f_max());
        let mut r = ConeBoundsReport {
            pairs_checked: 0,
            lower_violations: 0,
            causal_mismatches: 0,
            definiteness_violations: 0,
            anti_lipschitz_violations: 0,
            worst_upper_excess: None,
            upper_tolerance: self.grid_tolerance(),
            refinement_hint: None,
        };
        self.visit_null_distance_rows(sources, |s, row| {
            for (v, &dv) in row.iter().enumerate() {
                r.pairs_checked += 1;
                let d = self.fiber().dist(self.fiber_of(s), self.fiber_of(v));
                let dt = (self.point(s).t - self.point(v).t).abs();
                if below(dv, fmin * d) {
                    r.lower_violations += 1;
                }
                if s != v && !(dv > T::zero()) {
                    r.definiteness_violations += 1;
                }
                if self.related(s, v) {
                    if dv != dt {
                        r.causal_mismatches += 1;
                    }
                    if below(dt, fmin * d) {
                        r.anti_lipschitz_violations += 1;
                    }
                } else {
                    let excess = dv - fmax * d;
                    if r.worst_upper_excess.is_none_or(|(_, _, e)| excess > e) {
                        r.worst_upper_excess = Some((s, v, excess));
                    }
                }
            }
        });
        if !r.upper_within_tolerance() {
            r.refinement_hint = Some(format!(
                "upper excess exceeds {}; refine n_t (now {}) and the fiber (mesh {})",
                r.upper_tolerance,
                self.n_t(),
                self.fiber_mesh()
            ));
        }
        r
    }

    /// The same grid with `f = 1`.
    pub fn unit_counterpart(&self) -> Result<ConeGrid<T>> {
        ConeGrid::new(self.fiber().clone(), WarpingFunction::constant(T::one(), self.interval())?, self.n_t())
    }

    /// Sandwich against the unit-warping grid, over rows from `sources`.
    pub fn sandwich_report(&self, sources: &[usize]) -> Result<SandwichReport<T>> {
        let unit = self.unit_counterpart()?;
        let lo = self.warping().f_min().min(T::one());
        let hi = self.warping().f_max().max(T::one());
        let unit_rows = unit.null_distance_rows(sources);
        let mut r = SandwichReport {
            pairs_checked: 0,
            lower_violations: 0,
            worst_lower: None,
            worst_upper_excess: None,
            upper_tolerance: self.grid_tolerance(),
        };
        let mut idx = 0;
        self.visit_null_distance_rows(sources, |s, row| {
            let one = &unit_rows[idx];
            idx += 1;
            for (v, (&df, &d1)) in row.iter().zip(one).enumerate() {
                r.pairs_checked += 1;
                let margin = df - lo * d1;
                if below(df, lo * d1) {
                    r.lower_violations += 1;
                }
                if r.worst_lower.is_none_or(|(_, _, m)| margin < m) {
                    r.worst_lower = Some((s, v, margin));
                }
                let excess = df - hi * d1;
                if r.worst_upper_excess.is_none_or(|(_, _, e)| excess > e) {
                    r.worst_upper_excess = Some((s, v, excess));
                }
            }
        });
        Ok(r)
    }

    /// Compares the null distance on the slice at the grid level nearest `t0` with the fiber metric.
    pub fn fiber_metric_comparison(&self, t0: T) -> Result<FiberComparison<T>> {
        let level = self.nearest_level(t0)?;
        let f = self.fiber_len();
        let (fmin, fmax) = (self.warping().f_min(), self.warping().f_max());
        let unit = self.warping().is_constant() == Some(T::one());
        let sources: Vec<usize> = (0..f).map(|x| self.index(level, x)).collect();
        let mut out = FiberComparison {
            t0: self.times()[level],
            pairs: 0,
            min_ratio: T::infinity(),
            max_ratio: T::zero(),
            lower_violations: 0,
            max_upper_excess: T::neg_infinity(),
            exact_pairs: 0,
            unit_max_error: unit.then(T::zero),
            tolerance: self.grid_tolerance() + fmax * self.fiber_mesh(),
        };
        self.visit_null_distance_rows(&sources, |s, row| {
            let x = self.fiber_of(s);
            for y in 0..f {
                if y == x {
                    continue;
                }
                out.pairs += 1;
                let d = self.fiber().dist(x, y);
                let dv = row[self.index(level, y)];
                out.min_ratio = out.min_ratio.min(dv / d);
                out.max_ratio = out.max_ratio.max(dv / d);
                if below(dv, fmin * d) {
                    out.lower_violations += 1;
                }
                out.max_upper_excess = out.max_upper_excess.max(dv - fmax * d);
                if dv == d {
                    out.exact_pairs += 1;
                }
                if let Some(e) = out.unit_max_error.as_mut() {
                    *e = e.max((dv - d).abs());
                }
            }
        });
        Ok(out)
    }

    /// Splits one minimising cover path from `p` to `q` into monotone runs and
    /// reports how far each run is from being null.
    pub fn minimizer_analysis(&self, p: usize, q: usize) -> Result<MinimizerAnalysis<T>> {
        if p >= self.len() || q >= self.len() {
            return Err(Error::InvalidInput("node index out of range".into()));
        }
        let empty = |path, vacuous| MinimizerAnalysis { path, runs: Vec::new(), step: self.step(), vacuous };
        if p == q {
            return Ok(empty(vec![p], None));
        }
        if self.related(p, q) {
            return Ok(empty(
                vec![p, q],
                Some("causally related pair: the minimiser is a single causal edge".into()),
            ));
        }
        let path = self
            .null_distance_path(p, q)
            .ok_or_else(|| Error::InvalidInput(format!("node {q} is not reachable from {p}")))?;
        let g = self.g_levels();
        let mut runs = Vec::new();
        let mut start = 0;
        while start + 1 < path.len() {
            let up = self.level_of(path[start + 1]) > self.level_of(path[start]);
            let mut end = start + 1;
            while end + 1 < path.len() && (self.level_of(path[end + 1]) > self.level_of(path[end])) == up {
                end += 1;
            }
            let (a, b) = (path[start], path[end]);
            let rise = (g[self.level_of(b)] - g[self.level_of(a)]).abs();
            runs.push(RunDefect {
                start: a,
                end: b,
                up,
                defect: rise - self.fiber().dist(self.fiber_of(a), self.fiber_of(b)),
            });
            start = end;
        }
        Ok(MinimizerAnalysis { path, runs, step: self.step(), vacuous: None })
    }

    /// The grid as a discrete pre-length space: product metric, causality by
    /// single-step reachability, chronology where the time separation is positive.
    pub fn to_pre_length_space(&self) -> Result<DiscretePreLengthSpace<T>> {
        let n = self.len();
        if n > MATRIX_POINT_LIMIT {
            return Err(Error::SizeBound { size: n, limit: MATRIX_POINT_LIMIT });
        }
        let ids = (0..n).map(|u| format!("t{}_x{}", self.level_of(u), self.fiber_of(u))).collect();
        let base = FiniteLengthSpace::from_matrix(ids, SquareMatrix::from_fn(n, |u, v| self.product_distance(u, v)))?;
        let rows = self.time_separation_rows(&(0..n).collect::<Vec<_>>());
        let causal = SquareMatrix::from_fn(n, |u, v| rows[u].reachable[v]);
        let rho = SquareMatrix::from_fn(n, |u, v| rows[u].values[v]);
        let chrono = SquareMatrix::from_fn(n, |u, v| rows[u].values[v] > T::zero());
        DiscretePreLengthSpace::new(base, causal, chrono, rho)
    }

}
