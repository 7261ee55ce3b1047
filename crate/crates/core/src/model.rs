//! Constant-curvature model spaces: Riemannian comparison angles and the
//! Lorentzian model planes used for timelike triangle comparison.

use crate::error::{param, Error, Result};
use crate::quadrature::bisect_root;
use crate::scalar::Scalar;

/// Angle at the vertex opposite side `a` of the triangle with sides `a, b, c`
/// in the simply connected surface of constant curvature `k`.
///
/// Evaluated through `sin^2(angle/2)`, which stays accurate for thin triangles.
pub fn comparison_angle<T: Scalar>(k: T, a: T, b: T, c: T) -> Result<T> {
    if !(k.is_finite() && a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(Error::InvalidInput("non-finite comparison data".into()));
    }
    if a < T::zero() || b < T::zero() || c < T::zero() {
        return Err(Error::ModelConstraint(format!("negative side length ({a}, {b}, {c})")));
    }
    if b == T::zero() || c == T::zero() {
        return Err(Error::UndefinedAngle(format!("side adjacent to the angle has length zero (b = {b}, c = {c})")));
    }
    let tol = T::tol_at(1e-12, a + b + c);
    if a > b + c + tol || b > a + c + tol || c > a + b + tol {
        return Err(Error::ModelConstraint(format!("sides ({a}, {b}, {c}) violate the triangle inequality")));
    }
    let half = T::lit(0.5);
    // Differences inside the tolerance are degenerate; the square roots below
    // would otherwise turn rounding into angles of order sqrt(eps).
    let snap = |x: T| if x <= tol { T::zero() } else { x };
    let (u, v, w) = (snap(a + b - c), snap(a - b + c), snap(b + c - a));
    let p = a + b + c;
    let (s2, c2) = if k == T::zero() {
        let den = T::lit(4.0) * b * c;
        (u * v / den, p * w / den)
    } else if k > T::zero() {
        let r = k.sqrt();
        if p * r >= T::PI() * T::lit(2.0) {
            return Err(Error::ModelConstraint(format!(
                "perimeter {p} reaches 2*pi/sqrt(k) = {}",
                T::PI() * T::lit(2.0) / r
            )));
        }
        let den = (r * b).sin() * (r * c).sin();
        ((half * r * u).sin() * (half * r * v).sin() / den, (half * r * p).sin() * (half * r * w).sin() / den)
    } else {
        let r = (-k).sqrt();
        let den = (r * b).sinh() * (r * c).sinh();
        ((half * r * u).sinh() * (half * r * v).sinh() / den, (half * r * p).sinh() * (half * r * w).sinh() / den)
    };
    Ok(T::lit(2.0) * s2.max(T::zero()).sqrt().atan2(c2.max(T::zero()).sqrt()))
}

/// The simply connected Riemannian surface `M^2(k)` of constant curvature `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiemannianModelPlane<T> {
    curvature: T,
}

impl<T: Scalar> RiemannianModelPlane<T> {
    pub fn new(curvature: T) -> Result<Self> {
        if !curvature.is_finite() {
            return Err(param("curvature", "must be finite"));
        }
        Ok(Self { curvature })
    }

    pub fn curvature(&self) -> T {
        self.curvature
    }

    /// `pi/sqrt(k)` for `k > 0`; unbounded otherwise.
    pub fn diameter(&self) -> Option<T> {
        (self.curvature > T::zero()).then(|| T::PI() / self.curvature.sqrt())
    }

    /// See [`comparison_angle`].
    pub fn angle(&self, a: T, b: T, c: T) -> Result<T> {
        comparison_angle(self.curvature, a, b, c)
    }

    /// Length of the side opposite an angle `gamma` enclosed by sides `b` and `c`.
    pub fn opposite_side(&self, b: T, c: T, gamma: T) -> Result<T> {
        if b < T::zero() || c < T::zero() || !(T::zero()..=T::PI()).contains(&gamma) {
            return Err(Error::ModelConstraint(format!("invalid hinge ({b}, {c}, {gamma})")));
        }
        if let Some(d) = self.diameter() {
            if b >= d || c >= d {
                return Err(Error::ModelConstraint(format!("sides ({b}, {c}) reach pi/sqrt(k) = {d}")));
            }
        }
        let half = T::lit(0.5);
        let s = (half * gamma).sin();
        let k = self.curvature;
        // Half-angle forms of the law of cosines.
        Ok(if k == T::zero() {
            ((b - c) * (b - c) + T::lit(4.0) * b * c * s * s).sqrt()
        } else if k > T::zero() {
            let r = k.sqrt();
            let h = (half * r * (b - c)).sin().powi(2) + (r * b).sin() * (r * c).sin() * s * s;
            T::lit(2.0) * h.max(T::zero()).sqrt().min(T::one()).asin() / r
        } else {
            let r = (-k).sqrt();
            let h = (half * r * (b - c)).sinh().powi(2) + (r * b).sinh() * (r * c).sinh() * s * s;
            T::lit(2.0) * h.max(T::zero()).sqrt().asinh() / r
        })
    }
}

/// Point of a Lorentzian model plane in chart coordinates.
///
/// * `K = 0`: Minkowski coordinates, metric `-dt^2 + dx^2`.
/// * `K > 0`: de Sitter, metric `-dt^2 + cosh^2(t/r) dx^2` with `r = 1/sqrt(K)`.
/// * `K < 0`: anti-de Sitter, metric `-cosh^2(x/r) dt^2 + dx^2` with `r = 1/sqrt(-K)`.
///
/// In every case the line `x = 0` is a timelike geodesic parametrised by proper time.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ModelPoint<T> {
    pub t: T,
    pub x: T,
}

impl<T> ModelPoint<T> {
    pub fn new(t: T, x: T) -> Self {
        Self { t, x }
    }
}

/// The two-dimensional Lorentzian model plane of constant curvature `K`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzianModelPlane<T> {
    curvature: T,
}

type Vec3<T> = [T; 3];

impl<T: Scalar> LorentzianModelPlane<T> {
    pub fn new(curvature: T) -> Result<Self> {
        if !curvature.is_finite() {
            return Err(param("curvature", "must be finite"));
        }
        Ok(Self { curvature })
    }

    pub fn curvature(&self) -> T {
        self.curvature
    }

    /// Curvature radius `1/sqrt(|K|)`, absent for the flat plane.
    pub fn radius(&self) -> Option<T> {
        (self.curvature != T::zero()).then(|| T::one() / self.curvature.abs().sqrt())
    }

    /// Side lengths must stay below `pi/sqrt(|K|)` for comparison triangles.
    pub fn size_bound(&self) -> Option<T> {
        self.radius().map(|r| T::PI() * r)
    }

    /// Time separation `rho(p, q)`: the proper time of the maximal geodesic from
    /// `p` to a point `q` in its chronological future, zero otherwise.
    pub fn time_separation(&self, p: ModelPoint<T>, q: ModelPoint<T>) -> Result<T> {
        let dt = q.t - p.t;
        let dx = q.x - p.x;
        let two = T::lit(2.0);
        let half = T::lit(0.5);
        if self.curvature == T::zero() {
            let ax = dx.abs();
            return Ok(if dt > ax { ((dt - ax) * (dt + ax)).sqrt() } else { T::zero() });
        }
        let r = self.radius().expect("curved plane has a radius");
        if self.curvature > T::zero() {
            if dx.abs() >= T::PI() * r {
                return Err(Error::UnsupportedRegime(format!("|dx| = {} reaches pi*r = {}", dx.abs(), T::PI() * r)));
            }
            if !(dt > T::zero()) {
                return Ok(T::zero());
            }
            let sh = (half * dt / r).sinh();
            let sn = (half * dx / r).sin();
            let m = two * sh * sh - two * (p.t / r).cosh() * (q.t / r).cosh() * sn * sn;
            Ok(if m > T::zero() { two * r * (half * m).sqrt().asinh() } else { T::zero() })
        } else {
            if !(dt > T::zero()) {
                return Ok(T::zero());
            }
            if dt >= T::PI() * r {
                return Err(Error::UnsupportedRegime(format!("dt = {dt} reaches pi*r = {}", T::PI() * r)));
            }
            let sn = (half * dt / r).sin();
            let sh = (half * dx / r).sinh();
            let m = two * (p.x / r).cosh() * (q.x / r).cosh() * sn * sn - two * sh * sh;
            if m >= two {
                return Err(Error::UnsupportedRegime("points are beyond the first conjugate point".into()));
            }
            Ok(if m > T::zero() { two * r * (half * m).sqrt().asin() } else { T::zero() })
        }
    }

    /// Ambient coordinates of a chart point. de Sitter sits in `R^3` with the
    /// form `(-,+,+)`, anti-de Sitter with `(-,-,+)`. Absent for the flat plane.
    pub fn embedding(&self, p: ModelPoint<T>) -> Option<[T; 3]> {
        self.radius().map(|r| self.embed(p, r))
    }

    fn embed(&self, p: ModelPoint<T>, r: T) -> Vec3<T> {
        let (t, x) = (p.t / r, p.x / r);
        if self.curvature > T::zero() {
            [r * t.sinh(), r * t.cosh() * x.cos(), r * t.cosh() * x.sin()]
        } else {
            [r * x.cosh() * t.sin(), r * x.cosh() * t.cos(), r * x.sinh()]
        }
    }

    /// Chart coordinates of an embedded point; the angular coordinate is
    /// unwrapped to the branch nearest `near`.
    fn chart(&self, u: Vec3<T>, r: T, near: T) -> ModelPoint<T> {
        let two_pi = T::PI() * T::lit(2.0);
        let unwrap = |angle: T| {
            let reference = near / r;
            let turns = ((reference - angle) / two_pi).round();
            (angle + turns * two_pi) * r
        };
        if self.curvature > T::zero() {
            ModelPoint { t: r * (u[0] / r).asinh(), x: unwrap(u[2].atan2(u[1])) }
        } else {
            ModelPoint { t: unwrap(u[0].atan2(u[1])), x: r * (u[2] / r).asinh() }
        }
    }

    /// Point at proper time `s` along the timelike geodesic leaving the origin
    /// with rapidity `eta` relative to the `x = 0` observer.
    fn geodesic_from_origin(&self, eta: T, s: T) -> ModelPoint<T> {
        if self.curvature == T::zero() {
            return ModelPoint { t: s * eta.cosh(), x: s * eta.sinh() };
        }
        let r = self.radius().expect("curved plane has a radius");
        let v = [eta.cosh(), T::zero(), eta.sinh()];
        let (cp, sv) = if self.curvature > T::zero() {
            ((s / r).cosh(), r * (s / r).sinh())
        } else {
            ((s / r).cos(), r * (s / r).sin())
        };
        let u = [sv * v[0], cp * r + sv * v[1], sv * v[2]];
        self.chart(u, r, T::zero())
    }

    /// Point reached from the origin along the right-moving null ray, indexed
    /// by a monotone parameter `lambda >= 0`.
    fn null_ray_from_origin(&self, lambda: T) -> ModelPoint<T> {
        let gd = |u: T| T::lit(2.0) * (u * T::lit(0.5)).tanh().atan();
        match self.radius() {
            None => ModelPoint { t: lambda, x: lambda },
            Some(r) if self.curvature > T::zero() => ModelPoint { t: lambda, x: r * gd(lambda / r) },
            Some(r) => ModelPoint { t: r * gd(lambda / r), x: lambda },
        }
    }
}

/// Sides of a timelike triangle `x << y << z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// From `x` to `y`, length `a`.
    XY,
    /// From `y` to `z`, length `b`.
    YZ,
    /// From `x` to `z`, length `c`.
    XZ,
}

impl Side {
    pub const ALL: [Side; 3] = [Side::XY, Side::YZ, Side::XZ];

    /// Indices (past, future) of the side's endpoints in vertex order `x, y, z`.
    pub fn endpoints(self) -> (usize, usize) {
        match self {
            Side::XY => (0, 1),
            Side::YZ => (1, 2),
            Side::XZ => (0, 2),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::XY => 0,
            Side::YZ => 1,
            Side::XZ => 2,
        }
    }
}

/// Comparison triangle realised in a Lorentzian model plane.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonTriangle<T> {
    pub plane: LorentzianModelPlane<T>,
    /// Vertices `x', y', z'`.
    pub vertices: [ModelPoint<T>; 3],
    /// Side lengths `a = rho(x,y)`, `b = rho(y,z)`, `c = rho(x,z)`.
    pub sides: [T; 3],
}

/// Realises a timelike triangle with sides `a, b, c` (`c >= a + b`) in the
/// model plane of curvature `k`. `x'` sits at the origin, `z'` at proper time
/// `c` along `x = 0`, and `y'` on the right (`x > 0`).
pub fn realize_timelike_triangle<T: Scalar>(k: T, a: T, b: T, c: T) -> Result<ComparisonTriangle<T>> {
    let plane = LorentzianModelPlane::new(k)?;
    for (name, v) in [("a", a), ("b", b), ("c", c)] {
        if !v.is_finite() || v < T::zero() {
            return Err(param(name, format!("side length {v} must be finite and non-negative")));
        }
    }
    let tol = T::tol_at(1e-12, c);
    if c + tol < a + b {
        return Err(Error::ReverseTriangle { c: c.to_f64_lossy(), sum: (a + b).to_f64_lossy() });
    }
    if let Some(bound) = plane.size_bound() {
        if a >= bound || b >= bound || c >= bound {
            return Err(Error::ModelConstraint(format!(
                "sides ({a}, {b}, {c}) exceed the size bound pi/sqrt(|K|) = {bound}"
            )));
        }
    }
    let origin = ModelPoint { t: T::zero(), x: T::zero() };
    let z = ModelPoint { t: c, x: T::zero() };
    if c == T::zero() {
        return Ok(ComparisonTriangle { plane, vertices: [origin; 3], sides: [a, b, c] });
    }
    let two = T::lit(2.0);
    let y = if k == T::zero() {
        let t = (c * c + a * a - b * b) / (two * c);
        ModelPoint { t, x: (t * t - a * a).max(T::zero()).sqrt() }
    } else if b + tol >= c - a {
        // y' on the segment x'z'.
        ModelPoint { t: a.min(c), x: T::zero() }
    } else {
        let r = plane.radius().expect("curved plane has a radius");
        let gap = |p: ModelPoint<T>| match plane.time_separation(p, z) {
            Ok(v) => v - b,
            Err(_) => -T::one(),
        };
        if a == T::zero() {
            let mut hi = r.min(c);
            let mut tries = 0;
            while gap(plane.null_ray_from_origin(hi)) > T::zero() {
                hi = hi * two;
                tries += 1;
                if tries > 200 {
                    return Err(Error::Construction("null ray never leaves the past of z'".into()));
                }
            }
            let lam = bisect_root(|l| gap(plane.null_ray_from_origin(l)), T::zero(), hi, T::zero())
                .ok_or_else(|| Error::Construction("no bracket on the null ray".into()))?;
            plane.null_ray_from_origin(lam)
        } else {
            let mut hi = T::one();
            let mut tries = 0;
            while gap(plane.geodesic_from_origin(hi, a)) > T::zero() {
                hi = hi * two;
                tries += 1;
                if tries > 12 {
                    return Err(Error::Construction("rapidity search did not bracket b".into()));
                }
            }
            let eta = bisect_root(|e| gap(plane.geodesic_from_origin(e, a)), T::zero(), hi, T::zero())
                .ok_or_else(|| Error::Construction("no rapidity bracket".into()))?;
            plane.geodesic_from_origin(eta, a)
        }
    };
    let tri = ComparisonTriangle { plane, vertices: [origin, y, z], sides: [a, b, c] };
    let check = T::tol_at(1e-10, c);
    for side in Side::ALL {
        let (i, j) = side.endpoints();
        let got = plane.time_separation(tri.vertices[i], tri.vertices[j])?;
        if !separation_matches(got, tri.sides[side.index()], check) {
            return Err(Error::Construction(format!(
                "realised side {side:?} has length {got}, wanted {}",
                tri.sides[side.index()]
            )));
        }
    }
    Ok(tri)
}

/// Separations near the light cone are ill-conditioned in the curved charts:
/// rounding of order `u` in the quadratic form moves `rho` by `sqrt(u)`, so
/// agreement of the squares is accepted as well.
pub(crate) fn separation_matches<T: Scalar>(got: T, want: T, tol: T) -> bool {
    (got - want).abs() <= tol || (got * got - want * want).abs() <= tol * tol.max(T::lit(1e-2))
}

impl<T: Scalar> ComparisonTriangle<T> {
    /// Point at proper time `s` from the past endpoint along the given side.
    pub fn point_on_side(&self, side: Side, s: T) -> Result<ModelPoint<T>> {
        let len = self.sides[side.index()];
        let tol = T::tol_at(1e-12, len);
        if !(s >= -tol && s <= len + tol) {
            return Err(param("s", format!("{s} outside [0, {len}]")));
        }
        let s = s.max(T::zero()).min(len);
        let (i, j) = side.endpoints();
        let (p, q) = (self.vertices[i], self.vertices[j]);
        if len == T::zero() {
            return Ok(p);
        }
        let lam = s / len;
        let Some(r) = self.plane.radius() else {
            return Ok(ModelPoint { t: p.t + lam * (q.t - p.t), x: p.x + lam * (q.x - p.x) });
        };
        let (up, uq) = (self.plane.embed(p, r), self.plane.embed(q, r));
        let (wp, wq, den) = if self.plane.curvature() > T::zero() {
            (((len - s) / r).sinh(), (s / r).sinh(), (len / r).sinh())
        } else {
            (((len - s) / r).sin(), (s / r).sin(), (len / r).sin())
        };
        let u = [0, 1, 2].map(|m| (wp * up[m] + wq * uq[m]) / den);
        let near = if self.plane.curvature() > T::zero() {
            p.x + lam * (q.x - p.x)
        } else {
            p.t + lam * (q.t - p.t)
        };
        Ok(self.plane.chart(u, r, near))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn euclidean_equilateral() {
        assert!((comparison_angle(0.0, 1.0, 1.0, 1.0).unwrap() - PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_euclidean_angles() {
        assert!((comparison_angle(0.0, 2.0, 1.0, 1.0).unwrap() - PI).abs() < 1e-7);
        assert!(comparison_angle(0.0f64, 0.0, 1.0, 1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn constraint_errors() {
        assert!(matches!(comparison_angle(0.0, 3.0, 1.0, 1.0), Err(Error::ModelConstraint(_))));
        assert!(matches!(comparison_angle(1.0, 3.0, 3.0, 3.0), Err(Error::ModelConstraint(_))));
        assert!(matches!(comparison_angle(0.0, 1.0, 0.0, 1.0), Err(Error::UndefinedAngle(_))));
    }

    #[test]
    fn flat_time_separation() {
        let m = LorentzianModelPlane::new(0.0).unwrap();
        let rho = m.time_separation(ModelPoint::new(0.0, 0.0), ModelPoint::new(2.0, 1.0)).unwrap();
        assert!((rho - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.time_separation(ModelPoint::new(0.0, 0.0), ModelPoint::new(1.0, 1.0)).unwrap(), 0.0);
        assert_eq!(m.time_separation(ModelPoint::new(1.0, 0.0), ModelPoint::new(0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn flat_triangle_is_canonical() {
        let t = realize_timelike_triangle(0.0f64, 1.0, 1.0, 3.0).unwrap();
        assert_eq!(t.vertices[0], ModelPoint::new(0.0, 0.0));
        assert_eq!(t.vertices[2], ModelPoint::new(3.0, 0.0));
        assert!((t.vertices[1].t - 1.5).abs() < 1e-15);
        assert!((t.vertices[1].x - 1.25f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn collinear_triangle() {
        let t = realize_timelike_triangle(0.0, 1.0, 1.0, 2.0).unwrap();
        assert_eq!(t.vertices[1], ModelPoint::new(1.0, 0.0));
        assert!(matches!(realize_timelike_triangle(0.0, 1.0, 1.0, 1.5), Err(Error::ReverseTriangle { .. })));
    }

    #[test]
    fn curved_triangles_realise_their_sides() {
        for k in [-1.0f64, -0.3, 0.4, 1.0] {
            for &(a, b, c) in &[(0.5, 0.7, 1.6), (0.2, 0.2, 0.5), (0.0, 0.3, 0.9), (0.4, 0.0, 0.8)] {
                let tri = realize_timelike_triangle(k, a, b, c).unwrap();
                for side in Side::ALL {
                    let (i, j) = side.endpoints();
                    let got = tri.plane.time_separation(tri.vertices[i], tri.vertices[j]).unwrap();
                    assert!(separation_matches(got, tri.sides[side.index()], 1e-10), "k={k} {side:?} {got}");
                }
            }
        }
    }

    #[test]
    fn size_bound_is_enforced() {
        assert!(matches!(realize_timelike_triangle(1.0, 1.0, 1.0, 3.5), Err(Error::ModelConstraint(_))));
    }

    #[test]
    fn side_points_split_proper_time() {
        for k in [-1.0f64, 0.0, 1.0] {
            let tri = realize_timelike_triangle(k, 0.6, 0.5, 1.4).unwrap();
            for side in Side::ALL {
                let (i, j) = side.endpoints();
                let len = tri.sides[side.index()];
                for frac in [0.0, 0.25, 0.5, 1.0] {
                    let m = tri.point_on_side(side, frac * len).unwrap();
                    let before = tri.plane.time_separation(tri.vertices[i], m).unwrap();
                    let after = tri.plane.time_separation(m, tri.vertices[j]).unwrap();
                    assert!((before - frac * len).abs() < 1e-10, "k={k} {side:?} {frac}");
                    assert!((after - (1.0 - frac) * len).abs() < 1e-10, "k={k} {side:?} {frac}");
                }
            }
            assert!(tri.point_on_side(Side::XY, 0.7).is_err());
        }
    }
}
