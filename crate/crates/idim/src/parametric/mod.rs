//! Estimators built on distributions of neighbour distances, counts and angles.

pub mod corrint;
pub mod danco;
pub mod doubling;
pub mod ess;
pub mod gride;
pub mod idea;
pub mod mind;
pub mod mle;
pub mod packing;
pub mod pettis;
pub mod tle;
pub mod twonn;
pub mod wodcap;

use crate::error::{Error, Result};

/// Local growth-rate estimate `log(count2 / count1) / log(eps2 / eps1)`.
pub fn volume_growth_local(count1: usize, count2: usize, eps1: f64, eps2: f64) -> Result<f64> {
    if !(eps1 > 0.0 && eps2 > eps1) {
        return Err(crate::error::param("volume growth needs 0 < eps1 < eps2"));
    }
    if count1 == 0 {
        return Err(Error::Degenerate("empty inner ball".into()));
    }
    Ok((count2 as f64 / count1 as f64).ln() / (eps2 / eps1).ln())
}

/// Golden-section maximisation of a unimodal `f` on `[lo, hi]`.
///
/// Returns the argmax and the number of iterations used; stops when the bracket is
/// narrower than `tol` (relative to its midpoint) or after `max_iter` steps.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> (f64, usize, bool) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for it in 0..max_iter {
        if (hi - lo) <= tol * (1.0 + 0.5 * (hi + lo).abs()) {
            return (0.5 * (lo + hi), it, true);
        }
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        }
    }
    (0.5 * (lo + hi), max_iter, false)
}

/// Bisection root of a function with a sign change on `[lo, hi]`.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || (hi - lo) < tol {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volume_growth_examples() {
        assert_eq!(volume_growth_local(2, 8, 1.0, 2.0).unwrap(), 2.0);
        assert_eq!(volume_growth_local(5, 5, 1.0, 2.0).unwrap(), 0.0);
        assert!((volume_growth_local(3, 81, 1.0, 3.0).unwrap() - 3.0).abs() < 1e-12);
        assert!(volume_growth_local(0, 4, 1.0, 2.0).is_err());
        assert!(volume_growth_local(1, 4, 2.0, 1.0).is_err());
    }

    #[test]
    fn optimisers_find_known_points() {
        let (x, _, ok) = golden_max(|x| -(x - 2.5) * (x - 2.5), 0.0, 10.0, 1e-12, 200);
        assert!(ok && (x - 2.5).abs() < 1e-9);
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        assert!(bisect(|x| x * x + 1.0, 0.0, 2.0, 1e-14, 200).is_none());
    }
}
