use rayon::prelude::*;

use super::grid::ConeGrid;
use super::nulldist::MATRIX_POINT_LIMIT;
use crate::error::{param, Error, Result};
use crate::matrix::SquareMatrix;
use crate::scalar::Scalar;

type RealFn<T> = Box<dyn Fn(T) -> T + Send + Sync>;

/// Strictly increasing bi-Lipschitz reparametrisation of time, with its derivative.
pub struct PhiMap<T> {
    value: RealFn<T>,
    derivative: RealFn<T>,
    /// Lipschitz constant of `phi`.
    pub lip: T,
    /// Lipschitz constant of `phi^{-1}`.
    pub inverse_lip: T,
}

impl<T: Scalar> std::fmt::Debug for PhiMap<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PhiMap").field("lip", &self.lip).field("inverse_lip", &self.inverse_lip).finish_non_exhaustive()
    }
}

impl<T: Scalar> PhiMap<T> {
    pub fn new(
        value: impl Fn(T) -> T + Send + Sync + 'static,
        derivative: impl Fn(T) -> T + Send + Sync + 'static,
        lip: T,
        inverse_lip: T,
    ) -> Result<Self> {
        if !(lip > T::zero() && lip.is_finite()) {
            return Err(param("lip", "must be positive and finite"));
        }
        if !(inverse_lip > T::zero() && inverse_lip.is_finite()) {
            return Err(param("inverse_lip", "must be positive and finite"));
        }
        Ok(Self { value: Box::new(value), derivative: Box::new(derivative), lip, inverse_lip })
    }

    /// `lambda * t + c` with `lambda > 0`.
    pub fn affine(lambda: T, c: T) -> Result<Self> {
        if !(lambda > T::zero()) {
            return Err(param("lambda", "must be positive"));
        }
        Self::new(move |t| lambda * t + c, move |_| lambda, lambda, T::one() / lambda)
    }

    /// Polynomial `sum coeffs[k] t^k`; Lipschitz constants are taken from the
    /// derivative sampled on `[a, b]`, which must stay positive there.
    pub fn polynomial(coeffs: Vec<T>, a: T, b: T) -> Result<Self> {
        let deriv: Vec<T> = coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * T::from_usize_lossy(k)).collect();
        let horner = |cs: &[T], t: T| cs.iter().rev().fold(T::zero(), |acc, &c| acc * t + c);
        let samples = 4096;
        let (mut lo, mut hi) = (T::infinity(), T::zero());
        for k in 0..=samples {
            let t = a + (b - a) * T::from_usize_lossy(k) / T::from_usize_lossy(samples);
            let d = horner(&deriv, t);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if !(lo > T::zero()) {
            return Err(Error::InvalidInput("polynomial is not strictly increasing on the interval".into()));
        }
        let d2 = deriv.clone();
        Self::new(move |t| horner(&coeffs, t), move |t| horner(&d2, t), hi, T::one() / lo)
    }

    pub fn value(&self, t: T) -> T {
        (self.value)(t)
    }

    pub fn derivative(&self, t: T) -> T {
        (self.derivative)(t)
    }
}

/// Outcome of checking the equivalences for `tau = phi o t` on sampled pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport<T> {
    pub pairs_checked: usize,
    pub causal_pairs: usize,
    /// Largest `|d_tau - |phi(t_q) - phi(t_p)||` over causal pairs.
    pub causal_max_error: T,
    pub noncausal_pairs: usize,
    /// Non-causal pairs whose gap bound fails beyond the tolerance.
    pub gap_violations: usize,
    /// Smallest `d_tau - bound` over non-causal pairs, with the pair.
    pub worst_gap: Option<(usize, usize, T)>,
    pub gap_tolerance: T,
}

impl<T: Scalar> EquivalenceReport<T> {
    pub fn pass(&self) -> bool {
        self.causal_max_error == T::zero() && self.gap_violations == 0
    }
}

const C_OVERSAMPLE: usize = 4;

impl<T: Scalar> ConeGrid<T> {
    fn phi_levels(&self, phi: &PhiMap<T>) -> Result<Vec<T>> {
        let tau: Vec<T> = self.times().iter().map(|&t| phi.value(t)).collect();
        if let Some(k) = tau.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(format!("phi is not strictly increasing between levels {k} and {}", k + 1)));
        }
        Ok(tau)
    }

    /// Null distance rows for `tau = phi o t` from `sources`, with the equivalence report over all targets.
    pub fn null_distance_phi_rows(&self, phi: &PhiMap<T>, sources: &[usize]) -> Result<(Vec<Vec<T>>, EquivalenceReport<T>)> {
        let tau = self.phi_levels(phi)?;
        let rows: Vec<Vec<T>> = sources.par_iter().map(|&s| self.weighted_null_distance_row(s, &tau)).collect();
        let report = self.equivalence_report(phi, &tau, sources, &rows);
        Ok((rows, report))
    }

    /// Full matrix version of [`ConeGrid::null_distance_phi_rows`].
    pub fn null_distance_phi(&self, phi: &PhiMap<T>) -> Result<(SquareMatrix<T>, EquivalenceReport<T>)> {
        let n = self.len();
        if n > MATRIX_POINT_LIMIT {
            return Err(Error::SizeBound { size: n, limit: MATRIX_POINT_LIMIT });
        }
        let sources: Vec<usize> = (0..n).collect();
        let (rows, report) = self.null_distance_phi_rows(phi, &sources)?;
        Ok((SquareMatrix::from_flat(n, rows.concat())?, report))
    }

    fn equivalence_report(&self, phi: &PhiMap<T>, tau: &[T], sources: &[usize], rows: &[Vec<T>]) -> EquivalenceReport<T> {
        // 1 / (phi' f) on an oversampled time grid, for the constant c.
        let fine = self.interval().uniform_grid(self.n_t() * C_OVERSAMPLE);
        let inv_rate: Vec<T> = fine.iter().map(|&t| T::one() / (phi.derivative(t) * self.warping().value(t))).collect();
        let (phi_a, phi_b) = (tau[0], tau[self.n_t()]);
        let fine_index = |s: T| -> usize {
            // Fine-grid cell containing phi^{-1}(s), located through the level values.
            let s = s.max(phi_a).min(phi_b);
            let level = tau.partition_point(|&v| v < s);
            level * C_OVERSAMPLE
        };
        let tol = self.grid_tolerance() * phi.lip;
        let mut report = EquivalenceReport {
            pairs_checked: 0,
            causal_pairs: 0,
            causal_max_error: T::zero(),
            noncausal_pairs: 0,
            gap_violations: 0,
            worst_gap: None,
            gap_tolerance: tol,
        };
        let g = self.g_levels();
        for (&s, row) in sources.iter().zip(rows) {
            for (v, &dt) in row.iter().enumerate() {
                report.pairs_checked += 1;
                let (lp, lq) = if self.level_of(s) <= self.level_of(v) { (s, v) } else { (v, s) };
                let (ip, iq) = (self.level_of(lp), self.level_of(lq));
                let dphi = tau[iq] - tau[ip];
                if self.related(s, v) {
                    report.causal_pairs += 1;
                    report.causal_max_error = report.causal_max_error.max((dt - dphi).abs());
                    continue;
                }
                report.noncausal_pairs += 1;
                let excess = (dt - dphi).max(T::zero());
                let lo = fine_index(tau[ip] - excess).saturating_sub(C_OVERSAMPLE);
                let hi = (fine_index(tau[iq] + excess) + C_OVERSAMPLE).min(fine.len() - 1);
                let c = inv_rate[lo..=hi].iter().copied().fold(T::zero(), T::max);
                let d = self.fiber().dist(self.fiber_of(lp), self.fiber_of(lq));
                let bound = dphi + (d - (g[iq] - g[ip])) / c;
                let margin = dt - bound;
                if margin < -tol {
                    report.gap_violations += 1;
                }
                if report.worst_gap.is_none_or(|(_, _, m)| margin < m) {
                    report.worst_gap = Some((s, v, margin));
                }
            }
        }
        report
    }
}
