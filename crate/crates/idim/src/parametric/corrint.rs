//! Correlation integral slope between two scales.

use crate::api::EstimateReport;
use crate::error::{param, Error, Result};
use crate::geometry::{knn_query, PointCloud};

/// Unordered pair counts with distance at most `r1` and `r2`, plus the diameter.
pub fn pair_counts(cloud: &PointCloud, r1: f64, r2: f64) -> (u64, u64, f64) {
    let (mut c1, mut c2, mut diam) = (0u64, 0u64, 0.0f64);
    for i in 0..cloud.n() {
        for j in i + 1..cloud.n() {
            let d = cloud.dist(i, j);
            c1 += (d <= r1) as u64;
            c2 += (d <= r2) as u64;
            diam = diam.max(d);
        }
    }
    (c1, c2, diam)
}

/// Slope of the log pair count between radii `r1 < r2`.
pub fn corrint_estimate(cloud: &PointCloud, r1: f64, r2: f64) -> Result<EstimateReport> {
    if !(r1 > 0.0 && r2 > r1) {
        return Err(param(format!("correlation integral needs 0 < r1 < r2, got ({r1}, {r2})")));
    }
    let (c1, c2, diam) = pair_counts(cloud, r1, r2);
    if c1 == 0 {
        return Err(Error::Degenerate(format!("no pairs within r1 = {r1}")));
    }
    let estimate = ((c2 as f64).ln() - (c1 as f64).ln()) / (r2.ln() - r1.ln());
    let mut report = EstimateReport::new(estimate);
    report
        .diag("r1", r1)
        .diag("r2", r2)
        .diag("count1", c1 as f64)
        .diag("count2", c2 as f64)
        .diag("max_reliable_dim", 2.0 * (cloud.n() as f64).ln() / (diam.ln() - r1.ln()));
    Ok(report)
}

/// Scales chosen as the median `r_{k1}` and `r_{k2}` distances.
pub fn corrint_ranks(cloud: &PointCloud, k1: usize, k2: usize) -> Result<EstimateReport> {
    if !(1 <= k1 && k1 < k2) {
        return Err(param(format!("need 1 <= k1 < k2, got ({k1}, {k2})")));
    }
    let idx = knn_query(cloud, k2)?;
    corrint_estimate(cloud, idx.median_rk(k1), idx.median_rk(k2))
}
