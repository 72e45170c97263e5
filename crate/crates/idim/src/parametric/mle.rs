//! Maximum likelihood estimator from neighbour distance ratios.

use crate::api::{EstimateReport, Flag};
use crate::error::{param, Error, Result};
use crate::geometry::{euclid, knn_query, PointCloud};
use crate::stats::{aggregate, Aggregation};
use crate::tangential::Neighborhood;

/// Local MLE from sorted neighbour distances `r_1 <= .. <= r_k`.
///
/// Uncorrected: `(k - 1) / sum_{j<k} ln(r_k / r_j)`; corrected normalises by `k - 2`.
/// Returns `+inf` when every ratio is one.
pub fn mle_local_knn(dists: &[f64], corrected: bool) -> Result<f64> {
    let k = dists.len();
    let need = if corrected { 3 } else { 2 };
    if k < need {
        return Err(param(format!("MLE needs k >= {need}, got {k}")));
    }
    if dists[0] == 0.0 {
        return Err(Error::DegenerateRatio { point: 0, rank: 1 });
    }
    let rk = dists[k - 1];
    let s: f64 = dists[..k - 1].iter().map(|r| (rk / r).ln()).sum();
    let norm = if corrected { k - 2 } else { k - 1 } as f64;
    Ok(norm / s)
}

/// Local MLE for a radius-`eps` ball: `N / sum_j ln(eps / r_j)` over the `N` points inside.
pub fn mle_local_eps(dists: &[f64], eps: f64) -> Result<f64> {
    if dists.is_empty() {
        return Err(param("empty eps neighbourhood"));
    }
    if dists.iter().any(|r| *r == 0.0) {
        return Err(Error::DegenerateRatio { point: 0, rank: 1 });
    }
    let s: f64 = dists.iter().map(|r| (eps / r).ln()).sum();
    Ok(dists.len() as f64 / s)
}

/// Aggregated MLE over all points; infinite or degenerate locals are excluded and flagged.
pub fn mle_estimate(cloud: &PointCloud, nbhd: Neighborhood, corrected: bool, agg: Aggregation) -> Result<EstimateReport> {
    let n = cloud.n();
    let mut locals = Vec::with_capacity(n);
    let mut excluded = 0usize;
    let mut push = |v: Result<f64>| match v {
        Ok(v) if v.is_finite() && v > 0.0 => locals.push(v),
        _ => excluded += 1,
    };
    match nbhd {
        Neighborhood::Knn(k) => {
            let need = if corrected { 3 } else { 2 };
            if k < need {
                return Err(param(format!("MLE needs k >= {need}, got {k}")));
            }
            let idx = knn_query(cloud, k)?;
            for p in 0..n {
                push(mle_local_knn(idx.dists(p), corrected));
            }
        }
        Neighborhood::Eps(_) | Neighborhood::EpsMedianKnn(_) => {
            let eps = match nbhd {
                Neighborhood::Eps(e) => e,
                Neighborhood::EpsMedianKnn(k) => knn_query(cloud, k)?.median_rk(k),
                Neighborhood::Knn(_) => unreachable!(),
            };
            if !(eps > 0.0) {
                return Err(param("eps must be > 0"));
            }
            for p in 0..n {
                let x = cloud.row(p);
                let d: Vec<f64> = (0..n)
                    .filter(|&j| j != p)
                    .map(|j| euclid(x, cloud.row(j)))
                    .filter(|r| *r < eps)
                    .collect();
                push(mle_local_eps(&d, eps));
            }
        }
    }
    if locals.is_empty() {
        return Err(Error::Degenerate("no point has a finite local estimate".into()));
    }
    let estimate = aggregate(&locals, agg)?;
    let mut report = EstimateReport::new(estimate).with_locals(locals);
    report.diag("excluded_points", excluded as f64);
    if excluded > 0 {
        report.flag(Flag::Degenerate);
    }
    Ok(report)
}
