//! Tight-locality estimator using all pairs inside a neighbourhood.

use crate::api::{EstimateReport, Flag};
use crate::error::{param, Error, Result};
use crate::geometry::{euclid, knn_query, PointCloud};
use crate::stats::{aggregate, Aggregation};

/// Skewed distance `r |v - x|^2 / (2 (q - x) . (v - x))`.
///
/// Exact for `x` on the boundary sphere `|x - q| = r`; see [`tle_measure`] for interior points.
pub fn skewed_distance(q: &[f64], r: f64, x: &[f64], v: &[f64]) -> f64 {
    let mut vv = 0.0;
    let mut qv = 0.0;
    for ((qi, xi), vi) in q.iter().zip(x).zip(v) {
        vv += (vi - xi) * (vi - xi);
        qv += (qi - xi) * (vi - xi);
    }
    r * vv / (2.0 * qv)
}

/// Skewed distance from `x` to `v` inside the ball `B(q, r)`, from squared distances.
///
/// `ux2 = |x - q|^2`, `uv2 = |v - q|^2`, `w2 = |v - x|^2`. Equals `r |v - x| / t` where `t` is the
/// distance from `x` to the sphere along the ray through `v`; reduces to [`skewed_distance`]
/// when `|x - q| = r`.
pub fn tle_measure(r: f64, ux2: f64, uv2: f64, w2: f64) -> f64 {
    let a = ux2 + w2 - uv2;
    let c = (r * r - ux2).max(0.0);
    2.0 * r * w2 / (a + (a * a + 4.0 * w2 * c).sqrt())
}

/// Local TLE at a point from its neighbours `nb` (center excluded) and their distances `u` to it.
///
/// Returns the estimate and the number of skipped (coincident) pairs.
pub fn tle_local(nb: &[&[f64]], u: &[f64], epsilon: f64) -> (f64, usize) {
    let k = nb.len();
    let r = u[k - 1];
    let mut sum = 0.0;
    let mut terms = 0usize;
    let mut skipped = 0usize;
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let w = euclid(nb[i], nb[j]);
            if w <= epsilon * r {
                skipped += 1;
                continue;
            }
            let (ui2, uj2, w2) = (u[i] * u[i], u[j] * u[j], w * w);
            // squared distance from the reflection 2q - x to v
            let z2 = 2.0 * ui2 + 2.0 * uj2 - w2;
            let s = tle_measure(r, ui2, uj2, w2);
            if z2 <= epsilon * epsilon * r * r {
                skipped += 1;
                continue;
            }
            let t = tle_measure(r, ui2, uj2, z2);
            sum += (s / r).ln() + (t / r).ln();
            terms += 2;
        }
    }
    if terms == 0 {
        return (f64::NAN, skipped);
    }
    (-(terms as f64) / sum, skipped)
}

/// Aggregated TLE with `k` nearest neighbours.
pub fn tle_estimate(cloud: &PointCloud, k: usize, epsilon: f64, agg: Aggregation) -> Result<EstimateReport> {
    if k < 2 {
        return Err(param("TLE needs k >= 2"));
    }
    let idx = knn_query(cloud, k)?;
    let mut locals = Vec::with_capacity(cloud.n());
    let mut skipped = 0usize;
    let mut excluded = 0usize;
    for p in 0..cloud.n() {
        if idx.r(p, k) == 0.0 {
            excluded += 1;
            continue;
        }
        let nb: Vec<&[f64]> = idx.ids(p).iter().map(|&j| cloud.row(j)).collect();
        let (v, s) = tle_local(&nb, idx.dists(p), epsilon);
        skipped += s;
        if v.is_finite() && v > 0.0 {
            locals.push(v);
        } else {
            excluded += 1;
        }
    }
    if locals.is_empty() {
        return Err(Error::Degenerate("every TLE neighbourhood is degenerate".into()));
    }
    let estimate = aggregate(&locals, agg)?;
    let mut report = EstimateReport::new(estimate).with_locals(locals);
    report.diag("skipped_pairs", skipped as f64).diag("excluded_points", excluded as f64);
    if excluded > 0 {
        report.flag(Flag::Degenerate);
    }
    Ok(report)
}
