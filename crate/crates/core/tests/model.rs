use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use nullcone::model::{comparison_angle, realize_timelike_triangle, LorentzianModelPlane, ModelPoint, RiemannianModelPlane, Side};
use proptest::prelude::*;

/// Fourth-order Runge-Kutta for a second-order system in chart coordinates.
fn rk4(state: [f64; 4], accel: impl Fn(&[f64; 4]) -> [f64; 2], s: f64, steps: usize) -> [f64; 4] {
    let h = s / steps as f64;
    let deriv = |y: &[f64; 4]| {
        let a = accel(y);
        [y[2], y[3], a[0], a[1]]
    };
    let add = |y: &[f64; 4], k: &[f64; 4], c: f64| [y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2], y[3] + c * k[3]];
    let mut y = state;
    for _ in 0..steps {
        let k1 = deriv(&y);
        let k2 = deriv(&add(&y, &k1, h / 2.0));
        let k3 = deriv(&add(&y, &k2, h / 2.0));
        let k4 = deriv(&add(&y, &k3, h));
        for i in 0..4 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

/// Unit-speed timelike geodesic of the de Sitter chart `-dt^2 + cosh^2(t/r) dx^2`.
fn de_sitter_geodesic(r: f64, start: ModelPoint<f64>, eta: f64, s: f64) -> ModelPoint<f64> {
    let c0 = (start.t / r).cosh();
    let y = rk4(
        [start.t, start.x, eta.cosh(), eta.sinh() / c0],
        |y| {
            let (c, dc) = ((y[0] / r).cosh(), (y[0] / r).sinh() / r);
            [-c * dc * y[3] * y[3], -2.0 * dc / c * y[2] * y[3]]
        },
        s,
        4000,
    );
    ModelPoint::new(y[0], y[1])
}

/// Unit-speed timelike geodesic of the anti-de Sitter chart `-cosh^2(x/r) dt^2 + dx^2`.
fn anti_de_sitter_geodesic(r: f64, start: ModelPoint<f64>, eta: f64, s: f64) -> ModelPoint<f64> {
    let c0 = (start.x / r).cosh();
    let y = rk4(
        [start.t, start.x, eta.cosh() / c0, eta.sinh()],
        |y| {
            let (c, dc) = ((y[1] / r).cosh(), (y[1] / r).sinh() / r);
            [-2.0 * dc / c * y[2] * y[3], -c * dc * y[2] * y[2]]
        },
        s,
        4000,
    );
    ModelPoint::new(y[0], y[1])
}

#[test]
fn de_sitter_separation_matches_integrated_geodesics() {
    for (k, eta, s) in [(1.0, 0.0, 1.0), (1.0, 0.7, 1.0), (0.25, -0.4, 2.0), (4.0, 1.1, 0.6)] {
        let plane = LorentzianModelPlane::new(k).unwrap();
        let r = plane.radius().unwrap();
        let p = ModelPoint::new(0.3, -0.2);
        let q = de_sitter_geodesic(r, p, eta, s);
        assert_abs_diff_eq!(plane.time_separation(p, q).unwrap(), s, epsilon = 1e-9);
    }
}

#[test]
fn anti_de_sitter_separation_matches_integrated_geodesics() {
    for (k, eta, s) in [(-1.0, 0.0, 1.0), (-1.0, 0.5, 1.2), (-0.25, -0.8, 2.0), (-4.0, 0.3, 0.5)] {
        let plane = LorentzianModelPlane::new(k).unwrap();
        let r = plane.radius().unwrap();
        let p = ModelPoint::new(-0.1, 0.2);
        let q = anti_de_sitter_geodesic(r, p, eta, s);
        assert_abs_diff_eq!(plane.time_separation(p, q).unwrap(), s, epsilon = 1e-9);
    }
}

#[test]
fn embeddings_lie_on_their_hyperquadrics() {
    for k in [1.0, -1.0, 0.3, -2.5] {
        let plane = LorentzianModelPlane::new(k).unwrap();
        let r = plane.radius().unwrap();
        for p in [ModelPoint::new(0.0, 0.0), ModelPoint::new(0.4, -0.3), ModelPoint::new(-0.7, 0.9)] {
            let u = plane.embedding(p).unwrap();
            let q = if k > 0.0 { -u[0] * u[0] + u[1] * u[1] + u[2] * u[2] } else { -u[0] * u[0] - u[1] * u[1] + u[2] * u[2] };
            assert_abs_diff_eq!(q, if k > 0.0 { r * r } else { -r * r }, epsilon = 1e-12);
        }
    }
    assert!(LorentzianModelPlane::new(0.0).unwrap().embedding(ModelPoint::new(0.0, 0.0)).is_none());
}

#[test]
fn flat_examples() {
    let flat = LorentzianModelPlane::new(0.0).unwrap();
    assert_abs_diff_eq!(flat.time_separation(ModelPoint::new(0.0, 0.0), ModelPoint::new(2.0, 1.0)).unwrap(), 3f64.sqrt(), epsilon = 1e-15);
    assert_eq!(flat.time_separation(ModelPoint::new(0.0, 0.0), ModelPoint::new(1.0, 2.0)).unwrap(), 0.0);
    let tri = realize_timelike_triangle(0.0, 1.0, 1.0, 2.5).unwrap();
    assert_abs_diff_eq!(tri.vertices[1].t, 1.25, epsilon = 1e-15);
    assert_abs_diff_eq!(tri.vertices[1].x, 0.75, epsilon = 1e-15);
    let on_xz = tri.point_on_side(Side::XZ, 1.25).unwrap();
    assert_abs_diff_eq!(on_xz.t, 1.25, epsilon = 1e-15);
    assert_abs_diff_eq!(on_xz.x, 0.0, epsilon = 1e-15);
    let on_xy = tri.point_on_side(Side::XY, 0.5).unwrap();
    assert_abs_diff_eq!(on_xy.t, 0.625, epsilon = 1e-15);
    assert_abs_diff_eq!(on_xy.x, 0.375, epsilon = 1e-15);
    assert_eq!(tri.point_on_side(Side::XY, 0.0).unwrap(), tri.vertices[0]);
    assert!(tri.point_on_side(Side::XY, 1.5).is_err());
    let collinear = realize_timelike_triangle(0.0, 1.0, 1.0, 2.0).unwrap();
    assert_abs_diff_eq!(collinear.vertices[1].t, 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(collinear.vertices[1].x, 0.0, epsilon = 1e-15);
    assert!(realize_timelike_triangle(0.0, 1.0, 1.0, 1.5).is_err());
}

#[test]
fn comparison_angle_oracles() {
    // Independent high-precision evaluations of the laws of cosines.
    assert_abs_diff_eq!(comparison_angle(-1.0, 1.0, 1.0, 1.0).unwrap(), 0.918_797_872_178_027_4, epsilon = 1e-13);
    assert_abs_diff_eq!(comparison_angle(1.0, 1.0, 1.0, 1.0).unwrap(), 1.212_395_849_774_586, epsilon = 1e-13);
    assert_abs_diff_eq!(comparison_angle(0.0, 1.0, 1.0, 1.0).unwrap(), PI / 3.0, epsilon = 1e-15);
    assert_abs_diff_eq!(comparison_angle(0.0, 2.0, 1.0, 1.0).unwrap(), PI, epsilon = 1e-15);
}

#[test]
fn limits_as_curvature_vanishes() {
    let (a, b, c) = (0.8f64, 0.6, 0.5);
    let flat_angle = comparison_angle(0.0, a, b, c).unwrap();
    for k in [1e-6, -1e-6] {
        assert!((comparison_angle(k, a, b, c).unwrap() - flat_angle).abs() <= 1e-6);
    }
    let flat = LorentzianModelPlane::new(0.0).unwrap();
    let (p, q) = (ModelPoint::new(0.1f64, 0.2), ModelPoint::new(1.3, 0.5));
    let want = flat.time_separation(p, q).unwrap();
    for k in [1e-6, -1e-6] {
        let got = LorentzianModelPlane::new(k).unwrap().time_separation(p, q).unwrap();
        assert!((got - want).abs() <= 1e-6, "{k}: {got} vs {want}");
    }
}

#[test]
fn riemannian_hinge_round_trip() {
    for k in [0.0, 1.0, -1.0, 0.2] {
        let plane = RiemannianModelPlane::new(k).unwrap();
        for (b, c, gamma) in [(0.5, 0.7, 0.3), (1.0, 1.0, 2.0), (0.2, 1.1, 3.0)] {
            let a = plane.opposite_side(b, c, gamma).unwrap();
            assert_abs_diff_eq!(plane.angle(a, b, c).unwrap(), gamma, epsilon = 1e-9);
        }
    }
    assert!(RiemannianModelPlane::new(1.0).unwrap().opposite_side(3.2, 0.1, 1.0).is_err());
}

proptest! {
    #[test]
    fn side_points_are_additive(
        k in prop::sample::select(vec![0.0, 0.5, -0.5, 1.0, -1.0]),
        a in 0.05f64..0.8,
        b in 0.05f64..0.8,
        extra in 0.0f64..0.6,
        frac in 0.0f64..1.0,
    ) {
        let c = a + b + extra;
        let tri = realize_timelike_triangle(k, a, b, c).unwrap();
        let plane = tri.plane;
        for side in Side::ALL {
            let (i, j) = side.endpoints();
            let len = tri.sides[side.index()];
            let m = tri.point_on_side(side, frac * len).unwrap();
            let total = plane.time_separation(tri.vertices[i], tri.vertices[j]).unwrap();
            let split = plane.time_separation(tri.vertices[i], m).unwrap() + plane.time_separation(m, tri.vertices[j]).unwrap();
            prop_assert!((total - split).abs() <= 1e-8);
        }
        prop_assert!((plane.time_separation(tri.vertices[0], tri.vertices[2]).unwrap() - c).abs() <= 1e-10);
    }

    #[test]
    fn angles_decrease_with_curvature(a in 0.1f64..1.0, b in 0.1f64..1.0, c in 0.1f64..1.0) {
        prop_assume!(a < b + c && b < a + c && c < a + b);
        let lo = comparison_angle(-1.0, a, b, c).unwrap();
        let mid = comparison_angle(0.0, a, b, c).unwrap();
        let hi = comparison_angle(1.0, a, b, c).unwrap();
        prop_assert!(lo <= mid + 1e-12 && mid <= hi + 1e-12);
    }
}

#[test]
fn both_short_sides_null() {
    let tri = realize_timelike_triangle(0.0f64, 0.0, 0.0, 1.0).unwrap();
    assert_eq!(tri.vertices[2], ModelPoint::new(1.0, 0.0));
    assert!((tri.vertices[1].t - 0.5).abs() < 1e-12 && (tri.vertices[1].x.abs() - 0.5).abs() < 1e-12, "{tri:?}");
    for side in Side::ALL {
        let (i, j) = side.endpoints();
        let got = tri.plane.time_separation(tri.vertices[i], tri.vertices[j]).unwrap();
        assert!((got - tri.sides[side.index()]).abs() < 1e-10);
    }
}
