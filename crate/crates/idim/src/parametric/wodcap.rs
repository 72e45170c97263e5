//! Volume fraction of the lens between two overlapping balls.

use crate::api::{EstimateReport, Flag};
use crate::error::{param, Error, Result};
use crate::geometry::{euclid, knn_query, DirectedKnnGraph, PointCloud};
use crate::special::beta_reg;
use crate::stats::{aggregate, Aggregation};

/// Lens membership rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lens {
    /// Within `r_k(p)` of both `p` and its `k`-th neighbour `q`.
    Metric,
    /// Both centres, plus neighbours of `p` that are also kNN graph neighbours of `q`.
    Graph,
}

/// Lens volume fraction `S(d) = I_{3/4}((d+1)/2, 1/2)` of two unit balls at unit distance.
pub fn lens_fraction(d: f64) -> f64 {
    beta_reg((d + 1.0) / 2.0, 0.5, 0.75)
}

/// Upper end of the inversion search.
pub const WODCAP_DMAX: f64 = 1000.0;

/// Solves `S(d) = target` by bisection on `[0, WODCAP_DMAX]`; clipped at the ends.
pub fn invert_lens_fraction(target: f64) -> f64 {
    if target >= lens_fraction(0.0) {
        return 0.0;
    }
    if target <= lens_fraction(WODCAP_DMAX) {
        return WODCAP_DMAX;
    }
    let (mut lo, mut hi) = (0.0f64, WODCAP_DMAX);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lens_fraction(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Largest possible estimate with `k` neighbours.
pub fn wodcap_bound(k: usize) -> f64 {
    invert_lens_fraction(2.0 / (k as f64 + 1.0))
}

/// Per-point lens fractions `|lens| / (k + 1)`.
pub fn lens_fractions(cloud: &PointCloud, k: usize, lens: Lens) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(param("WODCap needs k >= 2"));
    }
    let idx = knn_query(cloud, k)?;
    let graph = DirectedKnnGraph::from_index(&idx);
    let denom = (k + 1) as f64;
    let fr = (0..cloud.n())
        .map(|p| {
            let ids = idx.ids(p);
            let q = ids[k - 1];
            let count = match lens {
                Lens::Metric => {
                    let r = idx.r(p, k);
                    // p and q are both in the lens; other members must be neighbours of p
                    2 + ids[..k - 1].iter().filter(|&&j| euclid(cloud.row(j), cloud.row(q)) <= r).count()
                }
                Lens::Graph => {
                    let qn = graph.out_edges(q);
                    // both centres belong to the lens, as in the metric rule
                    2 + ids[..k - 1].iter().filter(|j| qn.contains(j)).count()
                }
            };
            count as f64 / denom
        })
        .collect();
    Ok(fr)
}

/// WODCap: aggregate the lens fractions, then invert `S`.
pub fn wodcap_estimate(cloud: &PointCloud, k: usize, agg: Aggregation, lens: Lens) -> Result<EstimateReport> {
    let fr = lens_fractions(cloud, k, lens)?;
    if fr.iter().all(|f| *f == 0.0) {
        return Err(Error::Degenerate("every lens is empty".into()));
    }
    let target = aggregate(&fr, agg)?;
    let estimate = invert_lens_fraction(target);
    let bound = wodcap_bound(k);
    let locals = fr.iter().map(|f| invert_lens_fraction(*f)).collect();
    let mut report = EstimateReport::new(estimate).with_locals(locals);
    report.diag("fraction", target).diag("bound", bound);
    if estimate >= bound {
        report.flag(Flag::Throttled);
    }
    Ok(report)
}
