use crate::error::{param, Error, Result};
use crate::quadrature::bisect_increasing;
use crate::scalar::Scalar;

/// Compact time interval `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval<T> {
    a: T,
    b: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInput(format!("interval [{a}, {b}] must be finite with a < b")));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn length(&self) -> T {
        self.b - self.a
    }

    /// Membership with a few ulps of slack at the endpoints.
    pub fn contains(&self, t: T) -> bool {
        let slack = T::rel_eps() * (T::one() + self.a.abs().max(self.b.abs()));
        t >= self.a - slack && t <= self.b + slack
    }

    /// `n + 1` uniform nodes; the last node is exactly `b`.
    pub fn uniform_grid(&self, n: usize) -> Vec<T> {
        let n = n.max(1);
        let step = self.length() / T::from_usize_lossy(n);
        let mut out: Vec<T> = (0..=n).map(|i| self.a + T::from_usize_lossy(i) * step).collect();
        out[n] = self.b;
        out
    }
}

/// Closed-form or tabulated warping function.
#[derive(Clone, Debug, PartialEq)]
pub enum WarpingKind<T> {
    Constant { value: T },
    /// `intercept + slope * t`.
    Affine { intercept: T, slope: T },
    /// `scale * exp(rate * t)`.
    Exponential { scale: T, rate: T },
    /// `scale * cosh(rate * (t - shift))`.
    Cosh { scale: T, rate: T, shift: T },
    /// Linear interpolation through `(knots[i], values[i])`.
    Tabulated { knots: Vec<T>, values: Vec<T> },
}

/// A positive warping function `f` on a compact interval, with its reciprocal
/// antiderivative `G(t) = int_a^t ds / f(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WarpingFunction<T> {
    kind: WarpingKind<T>,
    domain: Interval<T>,
    f_min: T,
    f_max: T,
    /// Tabulated only: `int_{knots[0]}^{knots[i]} ds / f`.
    knot_integrals: Vec<T>,
    g_offset: T,
}

impl<T: Scalar> WarpingFunction<T> {
    pub fn new(kind: WarpingKind<T>, domain: Interval<T>) -> Result<Self> {
        let (a, b) = (domain.a(), domain.b());
        let mut knot_integrals = Vec::new();
        let candidates: Vec<T> = match &kind {
            WarpingKind::Constant { value } => vec![*value],
            WarpingKind::Affine { intercept, slope } => vec![*intercept + *slope * a, *intercept + *slope * b],
            WarpingKind::Exponential { scale, rate } => vec![*scale * (*rate * a).exp(), *scale * (*rate * b).exp()],
            WarpingKind::Cosh { scale, rate, shift } => {
                let f = |t: T| *scale * (*rate * (t - *shift)).cosh();
                let mut v = vec![f(a), f(b)];
                if *shift > a && *shift < b {
                    v.push(f(*shift));
                }
                v
            }
            WarpingKind::Tabulated { knots, values } => {
                if knots.len() < 2 || knots.len() != values.len() {
                    return Err(param("knots", "need at least two knots with one value each"));
                }
                if knots.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(param("knots", "must be strictly increasing"));
                }
                if knots[0] > a || knots[knots.len() - 1] < b {
                    return Err(param("knots", format!("must cover the domain [{a}, {b}]")));
                }
                knot_integrals.push(T::zero());
                for i in 0..knots.len() - 1 {
                    let last = knot_integrals[i];
                    knot_integrals.push(last + segment_integral(knots[i], values[i], knots[i + 1], values[i + 1], knots[i + 1]));
                }
                let mut v = vec![interp(knots, values, a), interp(knots, values, b)];
                v.extend(knots.iter().zip(values).filter(|(k, _)| **k > a && **k < b).map(|(_, v)| *v));
                v
            }
        };
        if candidates.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("warping function is not finite on its domain".into()));
        }
        let f_min = candidates.iter().copied().fold(T::infinity(), T::min);
        let f_max = candidates.iter().copied().fold(T::neg_infinity(), T::max);
        if !(f_min > T::zero()) {
            return Err(Error::InvalidInput(format!("warping function must be positive; minimum is {f_min}")));
        }
        if let WarpingKind::Tabulated { values, .. } = &kind {
            if values.iter().any(|v| !(*v > T::zero())) {
                return Err(Error::InvalidInput("tabulated values must be positive".into()));
            }
        }
        let mut w = Self { kind, domain, f_min, f_max, knot_integrals, g_offset: T::zero() };
        if matches!(w.kind, WarpingKind::Tabulated { .. }) {
            w.g_offset = w.tabulated_h(a);
        }
        Ok(w)
    }

    pub fn constant(value: T, domain: Interval<T>) -> Result<Self> {
        Self::new(WarpingKind::Constant { value }, domain)
    }

    pub fn affine(intercept: T, slope: T, domain: Interval<T>) -> Result<Self> {
        Self::new(WarpingKind::Affine { intercept, slope }, domain)
    }

    pub fn exponential(scale: T, rate: T, domain: Interval<T>) -> Result<Self> {
        Self::new(WarpingKind::Exponential { scale, rate }, domain)
    }

    pub fn cosh(scale: T, rate: T, shift: T, domain: Interval<T>) -> Result<Self> {
        Self::new(WarpingKind::Cosh { scale, rate, shift }, domain)
    }

    pub fn tabulated(knots: Vec<T>, values: Vec<T>, domain: Interval<T>) -> Result<Self> {
        Self::new(WarpingKind::Tabulated { knots, values }, domain)
    }

    /// Samples `f` at the given knots and interpolates linearly between them.
    pub fn sampled(f: impl Fn(T) -> T, domain: Interval<T>, n: usize) -> Result<Self> {
        let knots = domain.uniform_grid(n);
        let values = knots.iter().map(|&t| f(t)).collect();
        Self::tabulated(knots, values, domain)
    }

    pub fn kind(&self) -> &WarpingKind<T> {
        &self.kind
    }

    pub fn domain(&self) -> Interval<T> {
        self.domain
    }

    pub fn f_min(&self) -> T {
        self.f_min
    }

    pub fn f_max(&self) -> T {
        self.f_max
    }

    pub fn is_constant(&self) -> Option<T> {
        match self.kind {
            WarpingKind::Constant { value } => Some(value),
            _ => (self.f_min == self.f_max).then_some(self.f_min),
        }
    }

    pub fn value(&self, t: T) -> T {
        match &self.kind {
            WarpingKind::Constant { value } => *value,
            WarpingKind::Affine { intercept, slope } => *intercept + *slope * t,
            WarpingKind::Exponential { scale, rate } => *scale * (*rate * t).exp(),
            WarpingKind::Cosh { scale, rate, shift } => *scale * (*rate * (t - *shift)).cosh(),
            WarpingKind::Tabulated { knots, values } => interp(knots, values, t),
        }
    }

    /// `f'(t)`. Tabulated functions report the slope of the segment containing `t`.
    pub fn derivative(&self, t: T) -> T {
        match &self.kind {
            WarpingKind::Constant { .. } => T::zero(),
            WarpingKind::Affine { slope, .. } => *slope,
            WarpingKind::Exponential { scale, rate } => *scale * *rate * (*rate * t).exp(),
            WarpingKind::Cosh { scale, rate, shift } => *scale * *rate * (*rate * (t - *shift)).sinh(),
            WarpingKind::Tabulated { knots, values } => {
                let i = segment_of(knots, t);
                (values[i + 1] - values[i]) / (knots[i + 1] - knots[i])
            }
        }
    }

    /// `f''(t)` for the closed-form kinds; `None` for tabulated data.
    pub fn second_derivative(&self, t: T) -> Option<T> {
        match &self.kind {
            WarpingKind::Constant { .. } | WarpingKind::Affine { .. } => Some(T::zero()),
            WarpingKind::Exponential { scale, rate } => Some(*scale * *rate * *rate * (*rate * t).exp()),
            WarpingKind::Cosh { scale, rate, shift } => Some(*scale * *rate * *rate * (*rate * (t - *shift)).cosh()),
            WarpingKind::Tabulated { .. } => None,
        }
    }

    /// `G(t) = int_a^t ds / f(s)`, in closed form for every kind.
    pub fn reciprocal_antiderivative(&self, t: T) -> T {
        let a = self.domain.a();
        match &self.kind {
            WarpingKind::Constant { value } => (t - a) / *value,
            WarpingKind::Affine { intercept, slope } => {
                let fa = *intercept + *slope * a;
                if *slope == T::zero() {
                    (t - a) / fa
                } else {
                    (*slope * (t - a) / fa).ln_1p() / *slope
                }
            }
            WarpingKind::Exponential { scale, rate } => {
                if *rate == T::zero() {
                    (t - a) / *scale
                } else {
                    -(-*rate * a).exp() * (-*rate * (t - a)).exp_m1() / (*scale * *rate)
                }
            }
            WarpingKind::Cosh { scale, rate, shift } => {
                if *rate == T::zero() {
                    (t - a) / *scale
                } else {
                    (gudermannian(*rate * (t - *shift)) - gudermannian(*rate * (a - *shift))) / (*scale * *rate)
                }
            }
            WarpingKind::Tabulated { .. } => self.tabulated_h(t) - self.g_offset,
        }
    }

    /// Inverse of `G` on the domain, by bisection to full precision.
    /// Values beyond `G(a)` or `G(b)` clamp to the endpoint.
    pub fn inverse_reciprocal_antiderivative(&self, g: T) -> T {
        bisect_increasing(|t| self.reciprocal_antiderivative(t), g, self.domain.a(), self.domain.b(), T::zero())
    }

    fn tabulated_h(&self, t: T) -> T {
        let WarpingKind::Tabulated { knots, values } = &self.kind else {
            unreachable!("only called for tabulated warpings")
        };
        let i = segment_of(knots, t);
        self.knot_integrals[i] + segment_integral(knots[i], values[i], knots[i + 1], values[i + 1], t)
    }
}

/// `gd(x) = 2 atan(tanh(x/2))`, the antiderivative of `1/cosh`.
pub fn gudermannian<T: Scalar>(x: T) -> T {
    T::lit(2.0) * (x * T::lit(0.5)).tanh().atan()
}

fn segment_of<T: Scalar>(knots: &[T], t: T) -> usize {
    let i = knots.partition_point(|&k| k <= t);
    i.saturating_sub(1).min(knots.len() - 2)
}

fn interp<T: Scalar>(knots: &[T], values: &[T], t: T) -> T {
    let i = segment_of(knots, t);
    let w = (t - knots[i]) / (knots[i + 1] - knots[i]);
    values[i] + w * (values[i + 1] - values[i])
}

/// `int_{t0}^{t} ds / f` for `f` linear through `(t0, f0)` and `(t1, f1)`.
fn segment_integral<T: Scalar>(t0: T, f0: T, t1: T, f1: T, t: T) -> T {
    let m = (f1 - f0) / (t1 - t0);
    if m == T::zero() {
        (t - t0) / f0
    } else {
        (m * (t - t0) / f0).ln_1p() / m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn unit() -> Interval<f64> {
        Interval::new(0.0, 1.0).unwrap()
    }

    fn check_against_quadrature(w: &WarpingFunction<f64>) {
        for t in [0.0, 0.13, 0.5, 0.77, 1.0] {
            let q = integrate(|s| 1.0 / w.value(s), 0.0, t, 1e-13);
            assert!((w.reciprocal_antiderivative(t) - q).abs() < 1e-10, "{:?} at {t}", w.kind());
        }
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for w in [
            WarpingFunction::constant(2.0, unit()).unwrap(),
            WarpingFunction::affine(1.0, 1.0, unit()).unwrap(),
            WarpingFunction::affine(3.0, -2.0, unit()).unwrap(),
            WarpingFunction::exponential(0.5, 1.3, unit()).unwrap(),
            WarpingFunction::exponential(2.0, 0.0, unit()).unwrap(),
            WarpingFunction::cosh(1.0, 1.0, 0.0, unit()).unwrap(),
            WarpingFunction::cosh(0.7, 2.0, 0.4, unit()).unwrap(),
            WarpingFunction::tabulated(vec![-0.5, 0.2, 0.6, 1.5], vec![1.0, 2.0, 1.5, 0.5], unit()).unwrap(),
        ] {
            check_against_quadrature(&w);
        }
    }

    #[test]
    fn affine_g_is_log() {
        let w = WarpingFunction::affine(1.0, 1.0, unit()).unwrap();
        assert!((w.reciprocal_antiderivative(1.0) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn cosh_g_at_one() {
        let w = WarpingFunction::cosh(1.0, 1.0, 0.0, unit()).unwrap();
        assert!((w.reciprocal_antiderivative(1.0) - 0.865_769_483_239_658_6).abs() < 1e-15);
    }

    #[test]
    fn inverse_round_trips() {
        let w = WarpingFunction::exponential(0.5, 1.3, unit()).unwrap();
        for t in [0.0, 0.25, 0.9, 1.0] {
            let g = w.reciprocal_antiderivative(t);
            assert!((w.inverse_reciprocal_antiderivative(g) - t).abs() < 1e-12);
        }
    }

    #[test]
    fn extrema_are_exact() {
        let w = WarpingFunction::cosh(1.0, 1.0, 0.5, unit()).unwrap();
        assert_eq!(w.f_min(), 1.0);
        assert!((w.f_max() - 0.5f64.cosh()).abs() < 1e-15);
        let a = WarpingFunction::affine(1.0, 2.0, unit()).unwrap();
        assert_eq!((a.f_min(), a.f_max()), (1.0, 3.0));
    }

    #[test]
    fn non_positive_warpings_are_rejected() {
        assert!(WarpingFunction::affine(1.0, -2.0, unit()).is_err());
        assert!(WarpingFunction::constant(0.0, unit()).is_err());
        assert!(WarpingFunction::tabulated(vec![0.0, 0.5], vec![1.0, 1.0], unit()).is_err());
        assert!(Interval::new(1.0, 1.0).is_err());
    }
}
