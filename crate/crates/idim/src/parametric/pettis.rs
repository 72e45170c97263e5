//! Iterative regression of mean neighbour distances against rank.

use crate::api::{EstimateReport, Flag};
use crate::error::{param, Error, Result};
use crate::geometry::{knn_query, PointCloud};
use crate::special::ln_gamma;
use crate::stats::ols;

/// `ln G_{k,d} = (1/d) ln k + ln Gamma(k) - ln Gamma(k + 1/d)`.
pub fn ln_g(k: f64, d: f64) -> f64 {
    k.ln() / d + ln_gamma(k) - ln_gamma(k + 1.0 / d)
}

/// Fixed-point iteration on `ln rbar_k - ln G_{k,d} = (1/d) ln k + c`.
///
/// Returns the estimate, the iteration count and whether it converged.
pub fn pettis_from_means(ks: &[f64], means: &[f64]) -> Result<(f64, usize, bool)> {
    if ks.len() < 2 || means.iter().any(|m| !(*m > 0.0)) {
        return Err(param("Pettis needs at least two ranks with positive mean distances"));
    }
    let x: Vec<f64> = ks.iter().map(|k| k.ln()).collect();
    let mut y: Vec<f64> = means.iter().map(|m| m.ln()).collect();
    let mut d = f64::NAN;
    for it in 1..=100 {
        let slope = ols(&x, &y)?.slope;
        if !(slope > 0.0) {
            return Err(Error::Degenerate(format!("nonpositive regression slope {slope}")));
        }
        let next = 1.0 / slope;
        if (next - d).abs() < 1e-6 {
            return Ok((next, it, true));
        }
        d = next;
        y = means.iter().zip(ks).map(|(m, k)| m.ln() - ln_g(*k, d)).collect();
    }
    Ok((d, 100, false))
}

/// Pettis estimator over ranks `kmin..=kmax`.
pub fn pettis_estimate(cloud: &PointCloud, kmin: usize, kmax: usize) -> Result<EstimateReport> {
    if !(1 <= kmin && kmin < kmax) {
        return Err(param(format!("need 1 <= kmin < kmax, got ({kmin}, {kmax})")));
    }
    let idx = knn_query(cloud, kmax)?;
    let n = cloud.n() as f64;
    let ks: Vec<f64> = (kmin..=kmax).map(|k| k as f64).collect();
    let means: Vec<f64> = (kmin..=kmax).map(|k| (0..cloud.n()).map(|p| idx.r(p, k)).sum::<f64>() / n).collect();
    let (d, iters, ok) = pettis_from_means(&ks, &means)?;
    let mut report = EstimateReport::new(d);
    report.diag("iterations", iters as f64);
    if !ok {
        report.flag(Flag::Nonconvergent);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{generate, DatasetSpec};

    #[test]
    fn consistent_model_is_recovered() {
        let d = 4.0;
        let ks: Vec<f64> = (2..=10).map(|k| k as f64).collect();
        let means: Vec<f64> = ks.iter().map(|k| 0.37 * k.powf(1.0 / d) * ln_g(*k, d).exp()).collect();
        let (est, iters, ok) = pettis_from_means(&ks, &means).unwrap();
        assert!(ok && iters <= 100);
        assert!((est - d).abs() < 1e-4, "{est}");
    }

    #[test]
    fn unit_interval() {
        let c = generate(&DatasetSpec::Cube { d: 1 }, 2500, 5).unwrap();
        let r = pettis_estimate(&c, 2, 10).unwrap();
        assert!((r.estimate - 1.0).abs() < 0.1, "{}", r.estimate);
        assert!(r.diagnostics["iterations"] <= 100.0);
    }
}
