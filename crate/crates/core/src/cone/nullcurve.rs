use super::grid::{ConeGrid, ConePoint};
use super::warping::WarpingFunction;
use crate::error::{Error, Result};
use crate::quadrature::bisect_root;
use crate::scalar::Scalar;

/// Where a curve sits in the fiber: a vertex, or a point on the segment
/// `from -> to` at distance `offset` from `from`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FiberPosition<T> {
    Vertex(usize),
    OnSegment { from: usize, to: usize, offset: T },
}

/// Traversal of the segment `from -> to` (of length `length`) between two
/// offsets measured from `from`; `end < start` walks back towards `from`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackLeg<T> {
    pub from: usize,
    pub to: usize,
    pub length: T,
    pub start: T,
    pub end: T,
}

impl<T: Scalar> TrackLeg<T> {
    fn span(&self) -> T {
        (self.end - self.start).abs()
    }

    fn position(&self, s: T) -> FiberPosition<T> {
        let off = if self.end >= self.start { self.start + s } else { self.start - s };
        if off <= T::zero() {
            FiberPosition::Vertex(self.from)
        } else if off >= self.length {
            FiberPosition::Vertex(self.to)
        } else {
            FiberPosition::OnSegment { from: self.from, to: self.to, offset: off }
        }
    }

    fn reversed(&self) -> Self {
        Self { start: self.end, end: self.start, ..*self }
    }
}

/// Unit-speed fiber curve made of segment traversals.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberTrack<T> {
    pub legs: Vec<TrackLeg<T>>,
    pub start: usize,
}

impl<T: Scalar> FiberTrack<T> {
    pub fn length(&self) -> T {
        self.legs.iter().map(|l| l.span()).sum()
    }

    pub fn position(&self, mut s: T) -> FiberPosition<T> {
        for leg in &self.legs {
            let span = leg.span();
            if s <= span {
                return leg.position(s);
            }
            s = s - span;
        }
        match self.legs.last() {
            Some(leg) => leg.position(leg.span()),
            None => FiberPosition::Vertex(self.start),
        }
    }

    fn end_vertex(&self) -> usize {
        match self.legs.last() {
            Some(leg) => match leg.position(leg.span()) {
                FiberPosition::Vertex(v) => v,
                FiberPosition::OnSegment { .. } => usize::MAX,
            },
            None => self.start,
        }
    }
}

/// Null segment: `alpha(s) = G^{-1}(G(t_start) + s - s_start)` going up, or with
/// `-` going down, for `s` in `[s_start, s_end]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NullSegment<T> {
    pub s_start: T,
    pub s_end: T,
    pub t_start: T,
    pub t_end: T,
    pub up: bool,
    g_start: T,
}

/// Piecewise null curve `(alpha, beta)` in a cone, parametrised by fiber arc length.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseNullCurve<T> {
    pub start: ConePoint<T>,
    pub end: ConePoint<T>,
    pub segments: Vec<NullSegment<T>>,
    pub track: FiberTrack<T>,
}

/// Upper bound on zigzags before the construction gives up.
pub const MAX_NULL_SEGMENTS: usize = 1 << 16;

impl<T: Scalar> PiecewiseNullCurve<T> {
    pub fn parameter_length(&self) -> T {
        self.track.length()
    }

    fn segment_alpha(seg: &NullSegment<T>, w: &WarpingFunction<T>, s: T) -> T {
        let ds = s - seg.s_start;
        let g = if seg.up { seg.g_start + ds } else { seg.g_start - ds };
        w.inverse_reciprocal_antiderivative(g)
    }

    /// Time coordinate at parameter `s`.
    pub fn alpha(&self, w: &WarpingFunction<T>, s: T) -> T {
        if self.segments.is_empty() {
            return self.start.t;
        }
        let seg = self
            .segments
            .iter()
            .find(|seg| s <= seg.s_end)
            .unwrap_or_else(|| self.segments.last().expect("non-empty"));
        Self::segment_alpha(seg, w, s.max(seg.s_start).min(seg.s_end))
    }

    pub fn fiber_position(&self, s: T) -> FiberPosition<T> {
        self.track.position(s)
    }

    /// Null length: the sum of `|t_end - t_start|` over segments.
    pub fn null_length(&self) -> T {
        self.segments.iter().map(|s| (s.t_end - s.t_start).abs()).sum()
    }

    /// Total variation of `alpha`, sampled at `per_segment` interior points per segment.
    pub fn total_variation(&self, w: &WarpingFunction<T>, per_segment: usize) -> T {
        let mut total = T::zero();
        for seg in &self.segments {
            let mut prev = seg.t_start;
            for k in 1..=per_segment + 1 {
                let s = seg.s_start
                    + (seg.s_end - seg.s_start) * T::from_usize_lossy(k) / T::from_usize_lossy(per_segment + 1);
                let t = Self::segment_alpha(seg, w, s);
                total = total + (t - prev).abs();
                prev = t;
            }
        }
        total
    }

    /// Largest `| |alpha'| - f(alpha) |` over sampled interior points, with
    /// `alpha'` from central differences. The fiber moves at unit speed, so
    /// this measures the failure of `-alpha'^2 + f(alpha)^2 = 0`.
    pub fn max_nullity_defect(&self, w: &WarpingFunction<T>, per_segment: usize) -> T {
        let mut worst = T::zero();
        for seg in &self.segments {
            let len = seg.s_end - seg.s_start;
            if len <= T::zero() {
                continue;
            }
            let h = (len / T::lit(8.0)).min(T::lit(1e-4));
            for k in 1..=per_segment {
                let s = seg.s_start + len * T::from_usize_lossy(k) / T::from_usize_lossy(per_segment + 1);
                let (lo, hi) = ((s - h).max(seg.s_start), (s + h).min(seg.s_end));
                let rate = (Self::segment_alpha(seg, w, hi) - Self::segment_alpha(seg, w, lo)) / (hi - lo);
                let t = Self::segment_alpha(seg, w, s);
                worst = worst.max((rate.abs() - w.value(t)).abs());
            }
        }
        worst
    }

    /// `|alpha(end) - t_q|`.
    pub fn endpoint_time_error(&self, w: &WarpingFunction<T>) -> T {
        (self.alpha(w, self.parameter_length()) - self.end.t).abs()
    }

    /// Whether the fiber track ends exactly on the target fiber vertex.
    pub fn ends_on_target_fiber(&self) -> bool {
        self.track.end_vertex() == self.end.x
    }

    fn reversed(&self, w: &WarpingFunction<T>) -> Self {
        let total = self.parameter_length();
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|seg| NullSegment {
                s_start: total - seg.s_end,
                s_end: total - seg.s_start,
                t_start: seg.t_end,
                t_end: seg.t_start,
                up: !seg.up,
                g_start: w.reciprocal_antiderivative(seg.t_end),
            })
            .collect();
        let legs = self.track.legs.iter().rev().map(TrackLeg::reversed).collect();
        Self {
            start: self.end,
            end: self.start,
            segments,
            track: FiberTrack { legs, start: self.end.x },
        }
    }
}

impl<T: Scalar> ConeGrid<T> {
    /// Fiber geodesic from `x` to `y` as a vertex chain. Graph-induced fibers
    /// follow their edges; matrix fibers use the direct pair.
    fn fiber_geodesic(&self, x: usize, y: usize) -> Vec<usize> {
        let fiber = self.fiber();
        if x == y {
            return vec![x];
        }
        if fiber.edges().is_empty() {
            return vec![x, y];
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); fiber.len()];
        for e in fiber.edges() {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        let mut path = vec![x];
        let mut cur = x;
        while cur != y {
            let target = fiber.dist(cur, y);
            let tol = T::tol_at(1e-12, target);
            let next = adj[cur]
                .iter()
                .copied()
                .filter(|&v| (fiber.dist(cur, v) + fiber.dist(v, y) - target).abs() <= tol && fiber.dist(v, y) < target)
                .min_by(|&a, &b| fiber.dist(a, y).partial_cmp(&fiber.dist(b, y)).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
            match next {
                Some(v) => {
                    path.push(v);
                    cur = v;
                }
                None => {
                    path.push(y);
                    break;
                }
            }
        }
        path
    }

    /// Piecewise null curve from `p` to `q`. The fiber moves at unit speed along
    /// a geodesic (plus an out-and-back excursion when `p` and `q` are causally
    /// related); time first rises null until `t_q` is reached, then zigzags
    /// null up and down around `t_q` until the fiber track is used up.
    pub fn null_curve(&self, p: ConePoint<T>, q: ConePoint<T>) -> Result<PiecewiseNullCurve<T>> {
        self.causal_relation(p, q)?;
        let w = self.warping();
        if p.t > q.t {
            return Ok(self.null_curve(q, p)?.reversed(w));
        }
        let fiber = self.fiber();
        let d = fiber.dist(p.x, q.x);
        let g = |t: T| w.reciprocal_antiderivative(t);
        let rise = g(q.t) - g(p.t);
        if p.x == q.x && rise == T::zero() {
            return Ok(PiecewiseNullCurve { start: p, end: q, segments: Vec::new(), track: FiberTrack { legs: Vec::new(), start: p.x } });
        }

        let chain = self.fiber_geodesic(p.x, q.x);
        let mut legs: Vec<TrackLeg<T>> = chain
            .windows(2)
            .map(|e| {
                let len = fiber.dist(e[0], e[1]);
                TrackLeg { from: e[0], to: e[1], length: len, start: T::zero(), end: len }
            })
            .collect();
        if d < rise {
            // Out and back from q so the track outlasts the rise.
            let partner = if chain.len() >= 2 {
                chain[chain.len() - 2]
            } else {
                (0..fiber.len())
                    .filter(|&v| v != q.x)
                    .min_by(|&a, &b| fiber.dist(q.x, a).partial_cmp(&fiber.dist(q.x, b)).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)))
                    .ok_or_else(|| Error::Construction("single-point fiber leaves no room for a null curve".into()))?
            };
            let ell = fiber.dist(q.x, partner);
            let mut out = rise - d;
            while out > ell {
                legs.push(TrackLeg { from: q.x, to: partner, length: ell, start: T::zero(), end: ell });
                legs.push(TrackLeg { from: q.x, to: partner, length: ell, start: ell, end: T::zero() });
                out = out - ell;
            }
            legs.push(TrackLeg { from: q.x, to: partner, length: ell, start: T::zero(), end: out });
            legs.push(TrackLeg { from: q.x, to: partner, length: ell, start: out, end: T::zero() });
        }
        let track = FiberTrack { legs, start: p.x };
        let total = track.length();

        let mut segments = Vec::new();
        let mut s = T::zero();
        if rise > T::zero() {
            segments.push(NullSegment { s_start: T::zero(), s_end: rise, t_start: p.t, t_end: q.t, up: true, g_start: g(p.t) });
            s = rise;
        }
        let (ga, gb) = (g(self.interval().a()), g(self.interval().b()));
        let gq = g(q.t);
        let tiny = T::rel_eps() * (T::one() + total);
        while total - s > tiny {
            if segments.len() > MAX_NULL_SEGMENTS {
                return Err(Error::Construction(format!("more than {MAX_NULL_SEGMENTS} null segments needed")));
            }
            let (room_up, room_down) = (gb - gq, gq - ga);
            let up = room_up >= room_down;
            let room = room_up.max(room_down);
            if !(room > T::zero()) {
                return Err(Error::Construction("the interval leaves no room to zigzag".into()));
            }
            let mut s1 = total - s;
            while s1 / T::lit(2.0) > room {
                s1 = s1 / T::lit(2.0);
            }
            let sign = if up { T::one() } else { -T::one() };
            let a0 = |sig: T| w.inverse_reciprocal_antiderivative(gq + sign * sig);
            let a1 = |sig: T| w.inverse_reciprocal_antiderivative(gq + sign * (s1 - sig));
            let sbar = bisect_root(|sig| sign * (a0(sig) - a1(sig)), T::zero(), s1, T::zero())
                .ok_or_else(|| Error::Construction("zigzag crossing not bracketed".into()))?;
            let apex = a0(sbar);
            segments.push(NullSegment { s_start: s, s_end: s + sbar, t_start: q.t, t_end: apex, up, g_start: gq });
            segments.push(NullSegment {
                s_start: s + sbar,
                s_end: s + s1,
                t_start: apex,
                t_end: w.inverse_reciprocal_antiderivative(g(apex) - sign * (s1 - sbar)),
                up: !up,
                g_start: g(apex),
            });
            s = s + s1;
        }
        if let Some(last) = segments.last_mut() {
            last.s_end = total;
        }
        Ok(PiecewiseNullCurve { start: p, end: q, segments, track })
    }
}
