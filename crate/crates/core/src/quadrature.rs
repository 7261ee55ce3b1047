//! Adaptive Simpson quadrature and bracketed inversion of monotone maps.

use crate::scalar::Scalar;

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` with adaptive Simpson.
pub fn integrate<T: Scalar>(f: impl Fn(T) -> T, a: T, b: T, tol: T) -> T {
    if a == b {
        return T::zero();
    }
    let (lo, hi, sign) = if a < b { (a, b, T::one()) } else { (b, a, -T::one()) };
    let two = T::lit(2.0);
    let m = (lo + hi) / two;
    let (flo, fm, fhi) = (f(lo), f(m), f(hi));
    let whole = simpson(lo, hi, flo, fm, fhi);
    sign * refine(&f, lo, hi, flo, fm, fhi, whole, tol, MAX_DEPTH)
}

fn simpson<T: Scalar>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<T: Scalar>(
    f: &impl Fn(T) -> T,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> T {
    let two = T::lit(2.0);
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::lit(15.0) * tol || (b - a) <= T::epsilon() * (T::one() + a.abs()) {
        return left + right + delta / T::lit(15.0);
    }
    refine(f, a, m, fa, flm, fm, left, tol / two, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, tol / two, depth - 1)
}

/// Solves `f(x) = target` for nondecreasing `f` on `[lo, hi]` by bisection,
/// stopping once the bracket is narrower than `tol`. Out-of-range targets
/// clamp to the nearer endpoint.
pub fn bisect_increasing<T: Scalar>(f: impl Fn(T) -> T, target: T, mut lo: T, mut hi: T, tol: T) -> T {
    if f(lo) >= target {
        return lo;
    }
    if f(hi) <= target {
        return hi;
    }
    let two = T::lit(2.0);
    for _ in 0..400 {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi || hi - lo <= tol {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / two
}

/// Finds a sign change of `g` in `[lo, hi]` by bisection; `g(lo)` and `g(hi)`
/// must have opposite signs (or one of them vanish).
pub fn bisect_root<T: Scalar>(g: impl Fn(T) -> T, mut lo: T, mut hi: T, tol: T) -> Option<T> {
    let mut glo = g(lo);
    let ghi = g(hi);
    if glo == T::zero() {
        return Some(lo);
    }
    if ghi == T::zero() {
        return Some(hi);
    }
    if (glo < T::zero()) == (ghi < T::zero()) {
        return None;
    }
    let two = T::lit(2.0);
    for _ in 0..400 {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi || hi - lo <= tol {
            break;
        }
        let gm = g(mid);
        if gm == T::zero() {
            return Some(mid);
        }
        if (gm < T::zero()) == (glo < T::zero()) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) / two)
}
