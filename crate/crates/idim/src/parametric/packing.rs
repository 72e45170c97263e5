//! Packing number scaling between two radii.

use crate::api::{EstimateReport, Flag};
use crate::error::{param, Result};
use crate::geometry::{euclid, knn_query, PointCloud};

/// Greedy `r`-packing in index order: a point joins when it is at distance `>= r` from every
/// chosen point. Returns the chosen ids.
pub fn greedy_packing(cloud: &PointCloud, r: f64) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..cloud.n() {
        let x = cloud.row(i);
        if chosen.iter().all(|&j| euclid(x, cloud.row(j)) >= r) {
            chosen.push(i);
        }
    }
    chosen
}

/// Exhaustive maximum `r`-packing size; exponential, for small clouds only.
pub fn exact_packing_number(cloud: &PointCloud, r: f64) -> usize {
    let n = cloud.n();
    assert!(n <= 20, "exhaustive packing is limited to 20 points");
    let conflict: Vec<u32> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && cloud.dist(i, j) < r).fold(0u32, |m, j| m | (1 << j)))
        .collect();
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        if (0..n).all(|i| mask & (1 << i) == 0 || conflict[i] & mask == 0) {
            best = size;
        }
    }
    best
}

/// `|ln M(r2) - ln M(r1)| / (ln r2 - ln r1)` with greedy packing numbers.
pub fn packing_dimension(cloud: &PointCloud, r1: f64, r2: f64) -> Result<EstimateReport> {
    if !(r1 > 0.0 && r2 > r1) {
        return Err(param(format!("packing needs 0 < r1 < r2, got ({r1}, {r2})")));
    }
    let m1 = greedy_packing(cloud, r1).len();
    let m2 = greedy_packing(cloud, r2).len();
    let estimate = ((m1 as f64).ln() - (m2 as f64).ln()).abs() / (r2.ln() - r1.ln());
    let mut report = EstimateReport::new(estimate);
    report.diag("r1", r1).diag("r2", r2).diag("m1", m1 as f64).diag("m2", m2 as f64);
    if m1 == m2 {
        report.flag(Flag::Degenerate);
    }
    Ok(report)
}

/// Radii chosen as the median `r_{k1}` and `r_{k2}` distances.
pub fn packing_ranks(cloud: &PointCloud, k1: usize, k2: usize) -> Result<EstimateReport> {
    if !(1 <= k1 && k1 < k2) {
        return Err(param(format!("need 1 <= k1 < k2, got ({k1}, {k2})")));
    }
    let idx = knn_query(cloud, k2)?;
    packing_dimension(cloud, idx.median_rk(k1), idx.median_rk(k2))
}
