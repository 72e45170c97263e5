//! Likelihood of the ratio `r_1 / r_{k+1}`: continuous root (MLk) or integer argmax (MLi).

use crate::api::{EstimateReport, Flag};
use crate::error::{param, Error, Result};
use crate::geometry::{knn_query, PointCloud};
use crate::parametric::bisect;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MindVersion {
    MLk,
    MLi,
}

/// Ratios `r_1 / r_{k+1}` for every point; duplicates and ties are dropped and counted.
pub fn mind_ratios(cloud: &PointCloud, k: usize) -> Result<(Vec<f64>, usize)> {
    let idx = knn_query(cloud, k + 1)?;
    let mut rho = Vec::with_capacity(cloud.n());
    let mut dropped = 0;
    for p in 0..cloud.n() {
        let (a, b) = (idx.r(p, 1), idx.r(p, k + 1));
        if a > 0.0 && a < b {
            rho.push(a / b);
        } else {
            dropped += 1;
        }
    }
    Ok((rho, dropped))
}

/// `N ln(kd) + (d - 1) sum ln rho + (k - 1) sum ln(1 - rho^d)`.
pub fn mind_loglik(rho: &[f64], k: usize, d: f64) -> f64 {
    let n = rho.len() as f64;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for r in rho {
        let l = r.ln();
        s1 += l;
        s2 += (-(d * l).exp_m1()).ln();
    }
    n * (k as f64 * d).ln() + (d - 1.0) * s1 + (k as f64 - 1.0) * s2
}

/// Derivative of [`mind_loglik`] in `d`.
pub fn mind_score(rho: &[f64], k: usize, d: f64) -> f64 {
    let mut s = rho.len() as f64 / d;
    for r in rho {
        let l = r.ln();
        let rd = (d * l).exp();
        s += l - (k as f64 - 1.0) * rd * l / (1.0 - rd);
    }
    s
}

/// Integer argmax of the likelihood over `1..=dmax`.
pub fn mind_mli(rho: &[f64], k: usize, dmax: usize) -> usize {
    let mut best = (1, f64::NEG_INFINITY);
    for d in 1..=dmax {
        let l = mind_loglik(rho, k, d as f64);
        if l > best.1 {
            best = (d, l);
        }
    }
    best.0
}

/// Root of the score on `(0, dmax]`, widening the bracket once to `10 dmax`.
///
/// Returns the root and whether the original bracket sufficed.
pub fn mind_mlk(rho: &[f64], k: usize, dmax: f64) -> Result<(f64, bool)> {
    if rho.is_empty() {
        return Err(Error::Degenerate("no usable neighbour ratios".into()));
    }
    let f = |d: f64| mind_score(rho, k, d);
    let lo = 1e-6;
    if let Some(r) = bisect(f, lo, dmax, 1e-12, 400) {
        return Ok((r, true));
    }
    bisect(f, lo, 10.0 * dmax, 1e-12, 400)
        .map(|r| (r, false))
        .ok_or_else(|| Error::NonConvergent(format!("no sign change of the MiND score on (0, {}]", 10.0 * dmax)))
}

/// MiND_ML on a cloud.
pub fn mind_ml_estimate(cloud: &PointCloud, k: usize, version: MindVersion, dmax: usize) -> Result<EstimateReport> {
    if k < 1 || dmax < 1 {
        return Err(param("MiND_ML needs k >= 1 and dmax >= 1"));
    }
    let (rho, dropped) = mind_ratios(cloud, k)?;
    if rho.is_empty() {
        return Err(Error::Degenerate("no usable neighbour ratios".into()));
    }
    let mut report;
    match version {
        MindVersion::MLi => {
            let d = mind_mli(&rho, k, dmax);
            report = EstimateReport::new(d as f64);
            if d == dmax {
                report.flag(Flag::Throttled);
            }
        }
        MindVersion::MLk => {
            let (d, inside) = mind_mlk(&rho, k, dmax as f64)?;
            report = EstimateReport::new(d);
            if !inside {
                report.flag(Flag::Nonconvergent);
            }
        }
    }
    report.diag("dropped_points", dropped as f64);
    if dropped > 0 {
        report.flag(Flag::Degenerate);
    }
    Ok(report)
}
