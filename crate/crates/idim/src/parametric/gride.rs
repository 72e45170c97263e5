//! Generalised ratio likelihood for `mu = r_{n2} / r_{n1}`.

use crate::api::{EstimateReport, Flag};
use crate::error::{param, Error, Result};
use crate::geometry::{knn_query, PointCloud};
use crate::parametric::golden_max;

/// Log-likelihood (up to a constant) of `d` for log-ratios `ln mu`.
pub fn gride_loglik(log_mu: &[f64], n1: usize, n2: usize, d: f64) -> f64 {
    let n = log_mu.len() as f64;
    let s: f64 = log_mu.iter().sum();
    let mut ll = n * d.ln() - (((n2 - 1) as f64) * d + 1.0) * s;
    if n2 > n1 + 1 {
        let t: f64 = log_mu.iter().map(|l| (d * l).exp_m1().ln()).sum();
        ll += (n2 - n1 - 1) as f64 * t;
    }
    ll
}

/// Maximum likelihood `d` on `[0.1, dmax]`; closed form when `n2 = n1 + 1`.
///
/// Returns the estimate and whether the search converged strictly inside the interval.
pub fn gride_from_log_ratios(log_mu: &[f64], n1: usize, n2: usize, dmax: f64) -> Result<(f64, bool)> {
    if !(1 <= n1 && n1 < n2) {
        return Err(param(format!("GRIDE needs 1 <= n1 < n2, got ({n1}, {n2})")));
    }
    let s: f64 = log_mu.iter().sum();
    if s <= 0.0 {
        return Err(Error::Degenerate("all ratios equal 1".into()));
    }
    if n2 == n1 + 1 {
        return Ok((log_mu.len() as f64 / (n1 as f64 * s), true));
    }
    let (lo, hi) = (0.1f64.ln(), dmax.ln());
    let (x, _, ok) = golden_max(|x| gride_loglik(log_mu, n1, n2, x.exp()), lo, hi, 1e-12, 500);
    let interior = ok && x > lo + 1e-6 && x < hi - 1e-6;
    Ok((x.exp(), interior))
}

/// GRIDE on a cloud.
pub fn gride_estimate(cloud: &PointCloud, n1: usize, n2: usize, dmax: f64) -> Result<EstimateReport> {
    if !(1 <= n1 && n1 < n2) {
        return Err(param(format!("GRIDE needs 1 <= n1 < n2, got ({n1}, {n2})")));
    }
    let idx = knn_query(cloud, n2)?;
    let mut log_mu = Vec::with_capacity(cloud.n());
    let mut ties = 0usize;
    let mut excluded = 0usize;
    for p in 0..cloud.n() {
        let (a, b) = (idx.r(p, n1), idx.r(p, n2));
        if a == 0.0 {
            excluded += 1;
        } else if a == b {
            ties += 1;
            // a tie has zero likelihood unless the ranks are adjacent
            if n2 == n1 + 1 {
                log_mu.push(0.0);
            }
        } else {
            log_mu.push((b / a).ln());
        }
    }
    let (estimate, interior) = gride_from_log_ratios(&log_mu, n1, n2, dmax)?;
    let mut report = EstimateReport::new(estimate);
    report
        .diag("n1", n1 as f64)
        .diag("n2", n2 as f64)
        .diag("ties", ties as f64)
        .diag("excluded_points", excluded as f64)
        .diag("loglik", gride_loglik(&log_mu, n1, n2, estimate));
    if ties + excluded > 0 {
        report.flag(Flag::Degenerate);
    }
    if !interior {
        report.flag(Flag::Nonconvergent);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{generate, DatasetSpec};
    use crate::rng;
    use rand::Rng;

    #[test]
    fn adjacent_ranks_match_two_nn_mle() {
        let c = generate(&DatasetSpec::sphere(3), 500, 3).unwrap();
        let g = gride_estimate(&c, 1, 2, 150.0).unwrap();
        let m = crate::parametric::mle::mle_estimate(
            &c,
            crate::tangential::Neighborhood::Knn(2),
            false,
            crate::stats::Aggregation::Hmean,
        )
        .unwrap();
        assert!((g.estimate - m.estimate).abs() < 1e-9);
    }

    #[test]
    fn pareto_oracle_and_local_maximum() {
        // for (n1, n2) = (1, 3) the ratio mu has density d (mu^d - 1) mu^{-2d-1} * const,
        // sampled via mu^d = (E1 + E2 + E3) / E1 with unit exponentials
        let d = 5.0;
        let mut g = rng::stream(21);
        let log_mu: Vec<f64> = (0..10_000)
            .map(|_| {
                let e1: f64 = -(1.0 - g.random::<f64>()).ln();
                let e2: f64 = -(1.0 - g.random::<f64>()).ln();
                let e3: f64 = -(1.0 - g.random::<f64>()).ln();
                ((e1 + e2 + e3) / e1).ln() / d
            })
            .collect();
        let (est, ok) = gride_from_log_ratios(&log_mu, 1, 3, 150.0).unwrap();
        assert!(ok);
        assert!((est - d).abs() < 0.15, "{est}");
        let l0 = gride_loglik(&log_mu, 1, 3, est);
        for f in [0.99, 1.01] {
            assert!(l0 >= gride_loglik(&log_mu, 1, 3, est * f));
        }
    }
}
