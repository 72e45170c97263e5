//! Expected simplex skewness (one-dimensional simplices).

use crate::api::{EstimateReport, Flag};
use crate::error::{param, Error, Result};
use crate::geometry::{knn_query, PointCloud};
use crate::rng;
use crate::special::ln_gamma;
use crate::stats::{aggregate, Aggregation};
use rand::Rng;

/// Largest number of neighbour pairs enumerated per point; above it pairs are sampled.
pub const MAX_PAIRS: usize = 2000;

/// Expected skewness of a segment pair in dimension `d`:
/// `Gamma(d/2)^2 / (Gamma((d+1)/2) Gamma((d-1)/2))`, zero at `d = 1`.
pub fn reference_skewness(d: f64) -> f64 {
    if d <= 1.0 {
        return 0.0;
    }
    (2.0 * ln_gamma(d / 2.0) - ln_gamma((d + 1.0) / 2.0) - ln_gamma((d - 1.0) / 2.0)).exp()
}

/// Inverts `d -> s_d` by linear interpolation on the integer grid `1..=dmax`.
///
/// Returns the dimension and whether it was clipped at the grid maximum.
pub fn invert_skewness(s: f64, dmax: usize) -> (f64, bool) {
    let mut prev = (1.0, 0.0);
    if s <= 0.0 {
        return (1.0, false);
    }
    for d in 2..=dmax {
        let sd = reference_skewness(d as f64);
        if s <= sd {
            let t = (s - prev.1) / (sd - prev.1);
            return (prev.0 + t, false);
        }
        prev = (d as f64, sd);
    }
    (dmax as f64, true)
}

/// Weighted mean of `|sin|` over pairs of centred vectors, weights `|v_i| |v_j|`.
///
/// All pairs when there are at most [`MAX_PAIRS`], otherwise `MAX_PAIRS` sampled pairs.
pub fn local_skewness(vectors: &[Vec<f64>], seed: u64) -> Option<f64> {
    let m = vectors.len();
    let norms2: Vec<f64> = vectors.iter().map(|v| v.iter().map(|x| x * x).sum()).collect();
    let pair = |i: usize, j: usize| -> Option<(f64, f64)> {
        let (a, b) = (norms2[i], norms2[j]);
        if a == 0.0 || b == 0.0 {
            return None;
        }
        let dot: f64 = vectors[i].iter().zip(&vectors[j]).map(|(x, y)| x * y).sum();
        let w = (a * b).sqrt();
        Some((w, (a * b - dot * dot).max(0.0).sqrt()))
    };
    let (mut num, mut den) = (0.0, 0.0);
    let total = m * (m - 1) / 2;
    let mut add = |i, j| {
        if let Some((w, area)) = pair(i, j) {
            den += w;
            num += area;
        }
    };
    if total <= MAX_PAIRS {
        for i in 0..m {
            for j in i + 1..m {
                add(i, j);
            }
        }
    } else {
        let mut g = rng::stream(seed);
        for _ in 0..MAX_PAIRS {
            let i = g.random_range(0..m);
            let mut j = g.random_range(0..m - 1);
            if j >= i {
                j += 1;
            }
            add(i.min(j), i.max(j));
        }
    }
    (den > 0.0).then(|| num / den)
}

/// ESS with `k` neighbours, local dimensions aggregated by `agg`; grid maximum `3 D`.
pub fn ess_estimate(cloud: &PointCloud, k: usize, agg: Aggregation, seed: u64) -> Result<EstimateReport> {
    if k < 2 {
        return Err(param("ESS needs k >= 2"));
    }
    let idx = knn_query(cloud, k)?;
    let dmax = 3 * cloud.dim();
    let mut locals = Vec::with_capacity(cloud.n());
    let mut clipped = 0usize;
    let mut skipped = 0usize;
    for p in 0..cloud.n() {
        let ids = idx.ids(p);
        let dim = cloud.dim();
        let mut centre = vec![0.0; dim];
        for &j in ids {
            for (c, v) in centre.iter_mut().zip(cloud.row(j)) {
                *c += v;
            }
        }
        centre.iter_mut().for_each(|c| *c /= k as f64);
        let vecs: Vec<Vec<f64>> =
            ids.iter().map(|&j| cloud.row(j).iter().zip(&centre).map(|(a, b)| a - b).collect()).collect();
        match local_skewness(&vecs, rng::derive_seed(seed, p as u64)) {
            Some(s) => {
                let (d, clip) = invert_skewness(s, dmax);
                clipped += clip as usize;
                locals.push(d);
            }
            None => skipped += 1,
        }
    }
    if locals.is_empty() {
        return Err(Error::Degenerate("no neighbourhood has a nondegenerate pair".into()));
    }
    let estimate = aggregate(&locals, agg)?;
    let mut report = EstimateReport::new(estimate).with_locals(locals);
    report.diag("clipped_points", clipped as f64).diag("skipped_points", skipped as f64);
    if clipped > 0 {
        report.flag(Flag::Throttled);
    }
    if skipped > 0 {
        report.flag(Flag::Degenerate);
    }
    Ok(report)
}
