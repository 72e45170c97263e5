//! Two nearest neighbour estimator: linear fit of the Pareto CDF of `r_2 / r_1`.

use crate::api::{EstimateReport, Flag};
use crate::error::{param, Error, Result};
use crate::geometry::{knn_query, PointCloud};
use crate::stats::slope_through_origin;

/// Slope through the origin of `-ln(1 - F_i)` against `ln mu_i` for sorted ratios,
/// with `F_i = i / N` and the largest `discard` fraction dropped.
pub fn twonn_from_ratios(ratios: &[f64], discard: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&discard) {
        return Err(param("discard fraction must lie in [0, 1)"));
    }
    let n = ratios.len();
    let mut mu = ratios.to_vec();
    mu.sort_by(f64::total_cmp);
    let keep = (((n as f64) * (1.0 - discard)).floor() as usize).min(n - 1);
    if keep < 2 {
        return Err(param("too few ratios left after discarding"));
    }
    let x: Vec<f64> = mu[..keep].iter().map(|m| m.ln()).collect();
    let y: Vec<f64> = (1..=keep).map(|i| -(1.0 - i as f64 / n as f64).ln()).collect();
    if x.iter().all(|v| *v == 0.0) {
        return Err(Error::Degenerate("all neighbour ratios equal 1".into()));
    }
    slope_through_origin(&x, &y)
}

/// TwoNN on a cloud.
pub fn twonn_estimate(cloud: &PointCloud, discard: f64) -> Result<EstimateReport> {
    if cloud.n() < 10 {
        return Err(param("TwoNN needs at least 10 points"));
    }
    let idx = knn_query(cloud, 2)?;
    let mut ratios = Vec::with_capacity(cloud.n());
    let mut excluded = 0usize;
    let mut ties = 0usize;
    for p in 0..cloud.n() {
        let (r1, r2) = (idx.r(p, 1), idx.r(p, 2));
        if r1 == 0.0 {
            excluded += 1;
            continue;
        }
        if r1 == r2 {
            ties += 1;
        }
        ratios.push(r2 / r1);
    }
    let estimate = twonn_from_ratios(&ratios, discard)?;
    let mut report = EstimateReport::new(estimate);
    report.diag("excluded_points", excluded as f64).diag("ties", ties as f64);
    if excluded + ties > 0 {
        report.flag(Flag::Degenerate);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn pareto(d: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut g = rng::stream(seed);
        (0..n).map(|_| (1.0 - g.random::<f64>()).powf(-1.0 / d)).collect()
    }

    #[test]
    fn consistent_line_is_exact() {
        let n = 200;
        let d = 3.7;
        let mut ratios: Vec<f64> = (1..n).map(|i| (1.0 - i as f64 / n as f64).powf(-1.0 / d)).collect();
        ratios.push(1e6);
        for f in [0.0, 0.1, 0.5] {
            assert!((twonn_from_ratios(&ratios, f).unwrap() - d).abs() < 1e-9);
        }
    }

    #[test]
    fn pareto_oracle() {
        let r = pareto(3.0, 10_000, 9);
        let a = twonn_from_ratios(&r, 0.1).unwrap();
        assert!((a - 3.0).abs() < 0.1, "{a}");
        let b = twonn_from_ratios(&r, 0.0).unwrap();
        let c = twonn_from_ratios(&r, 0.5).unwrap();
        assert!((b - c).abs() / c < 0.05);
    }

    #[test]
    fn all_ties_fail() {
        assert!(twonn_from_ratios(&[1.0; 20], 0.1).is_err());
    }
}
