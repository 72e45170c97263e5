//! Dimension from the growth of MST alpha-weights and kNN graph length under subsampling.

use crate::api::{EstimateReport, Flag};
use crate::error::{param, Result};
use crate::geometry::{knn_query, NeighborIndex, PointCloud};
use crate::rng;
use crate::stats::ols;
use crate::topology::mst::{alpha_weight, mst_of_cloud};

/// Subsample fractions and repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsampleSchedule {
    pub fractions: Vec<f64>,
    pub repeats: usize,
    pub seed: u64,
}

impl SubsampleSchedule {
    pub fn new(fractions: Vec<f64>, repeats: usize, seed: u64) -> Result<Self> {
        let ok = fractions.windows(2).all(|w| w[0] < w[1]) && fractions.iter().all(|f| *f > 0.0 && *f <= 1.0);
        if fractions.len() < 2 || !ok || repeats == 0 {
            return Err(param("schedule needs at least two increasing fractions in (0, 1] and repeats >= 1"));
        }
        Ok(Self { fractions, repeats, seed })
    }

    /// `steps` evenly spaced fractions from `min` to `max`.
    pub fn linear(min: f64, max: f64, steps: usize, repeats: usize, seed: u64) -> Result<Self> {
        if steps < 2 {
            return Err(param("schedule needs at least two steps"));
        }
        let f = (0..steps).map(|i| min + (max - min) * i as f64 / (steps - 1) as f64).collect();
        Self::new(f, repeats, seed)
    }

    /// Defaults: ten fractions from 0.75 to 1, ten repeats.
    pub fn standard(seed: u64) -> Self {
        Self::linear(0.75, 1.0, 10, 10, seed).expect("valid default schedule")
    }

    /// Subsample sizes for a cloud of `n` points.
    pub fn sizes(&self, n: usize) -> Vec<usize> {
        self.fractions.iter().map(|f| ((f * n as f64).round() as usize).clamp(1, n)).collect()
    }

    /// Sorted indices of repeat `r` at fraction index `i`.
    pub fn subsample(&self, n: usize, i: usize, r: usize) -> Vec<usize> {
        let m = self.sizes(n)[i];
        let mut g = rng::child(self.seed, (i * self.repeats + r) as u64);
        let mut idx = rand::seq::index::sample(&mut g, n, m).into_vec();
        idx.sort_unstable();
        idx
    }
}

/// Slope fit of mean log statistic against log subsample size.
fn growth_fit(
    cloud: &PointCloud,
    schedule: &SubsampleSchedule,
    stat: impl Fn(&[usize]) -> Result<f64>,
) -> Result<(f64, f64, Vec<f64>)> {
    let n = cloud.n();
    let sizes = schedule.sizes(n);
    if sizes[0] < 16 {
        return Err(param(format!("smallest subsample has {} points; at least 16 are needed", sizes[0])));
    }
    let mut x = Vec::with_capacity(sizes.len());
    let mut y = Vec::with_capacity(sizes.len());
    for (i, &m) in sizes.iter().enumerate() {
        let mut acc = 0.0;
        for r in 0..schedule.repeats {
            acc += stat(&schedule.subsample(n, i, r))?.ln();
        }
        x.push((m as f64).ln());
        y.push(acc / schedule.repeats as f64);
    }
    let fit = ols(&x, &y)?;
    Ok((fit.slope, fit.rms_residual, y))
}

fn slope_report(estimate: f64, slope: f64, residual: f64, alpha: f64) -> EstimateReport {
    let mut report = EstimateReport::new(estimate);
    report.diag("slope", slope).diag("residual", residual);
    if (1.0 - slope).abs() < alpha / 100.0 || slope >= 1.0 {
        report.flag(Flag::SlopeHazard);
    }
    report
}

/// `alpha / (1 - m)` where `m` is the slope of `log E_alpha` against `log n`.
pub fn ph0_dimension(cloud: &PointCloud, alpha: f64, schedule: &SubsampleSchedule) -> Result<EstimateReport> {
    if !(alpha > 0.0) {
        return Err(param("alpha must be > 0"));
    }
    let (m, res, _) = growth_fit(cloud, schedule, |idx| Ok(alpha_weight(&mst_of_cloud(&cloud.select(idx))?, alpha)))?;
    Ok(slope_report(alpha / (1.0 - m), m, res, alpha))
}

/// Sum of Euclidean lengths of all directed kNN edges.
pub fn knn_total_length(cloud: &PointCloud, k: usize) -> Result<f64> {
    let idx = knn_query(cloud, k)?;
    Ok((0..cloud.n()).map(|p| idx.dists(p).iter().sum::<f64>()).sum())
}

/// kNN length of the subsample `ids`, reusing a neighbour list of the full cloud.
///
/// The first `k` list entries that belong to the subsample are its exact neighbours whenever
/// there are `k` of them; otherwise the point falls back to a brute-force search.
fn subsample_knn_length(cloud: &PointCloud, full: &NeighborIndex, ids: &[usize], k: usize) -> Result<f64> {
    if k >= ids.len() {
        return Err(param(format!("k = {k} needs more than {} points", ids.len())));
    }
    let mut member = vec![false; cloud.n()];
    ids.iter().for_each(|&i| member[i] = true);
    let mut total = 0.0;
    for &p in ids {
        let mut taken = 0;
        let mut sum = 0.0;
        for (&j, &d) in full.ids(p).iter().zip(full.dists(p)) {
            if member[j] {
                sum += d;
                taken += 1;
                if taken == k {
                    break;
                }
            }
        }
        if taken < k {
            let x = cloud.row(p);
            let mut all: Vec<(f64, usize)> =
                ids.iter().filter(|&&j| j != p).map(|&j| (crate::geometry::euclid(x, cloud.row(j)), j)).collect();
            all.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            sum = all[..k].iter().map(|e| e.0).sum();
        }
        total += sum;
    }
    Ok(total)
}

/// `1 / (1 - m)` where `m` is the slope of `log L_k` against `log n`.
pub fn knn_dimension(cloud: &PointCloud, k: usize, schedule: &SubsampleSchedule) -> Result<EstimateReport> {
    let depth = (4 * k).max(64).min(cloud.n() - 1);
    let full = knn_query(cloud, depth)?;
    let (m, res, _) = growth_fit(cloud, schedule, |idx| subsample_knn_length(cloud, &full, idx, k))?;
    Ok(slope_report(1.0 / (1.0 - m), m, res, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{generate, DatasetSpec};

    #[test]
    fn line_knn_length() {
        let c = PointCloud::from_rows(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        assert_eq!(knn_total_length(&c, 1).unwrap(), 4.0);
    }

    #[test]
    fn length_is_homogeneous() {
        let c = generate(&DatasetSpec::sphere(2), 200, 3).unwrap();
        let a = knn_total_length(&c, 3).unwrap();
        let b = knn_total_length(&c.map(|v| 2.5 * v), 3).unwrap();
        assert!(a > 0.0);
        assert!((b - 2.5 * a).abs() < 1e-12 * b);
    }

    #[test]
    fn subsample_shortcut_is_exact() {
        let c = generate(&DatasetSpec::Cube { d: 3 }, 400, 1).unwrap();
        let full = knn_query(&c, 8).unwrap();
        let s = SubsampleSchedule::standard(5);
        for i in [0, 4, 9] {
            let ids = s.subsample(c.n(), i, 2);
            let fast = subsample_knn_length(&c, &full, &ids, 2).unwrap();
            let slow = knn_total_length(&c.select(&ids), 2).unwrap();
            assert!((fast - slow).abs() < 1e-12 * slow);
        }
    }

    #[test]
    fn consistent_growth_line() {
        // synthetic statistic c n^{1/2}: slope 1/2, alpha = 1 gives dimension 2
        let c = generate(&DatasetSpec::sphere(2), 200, 1).unwrap();
        let s = SubsampleSchedule::standard(0);
        let (m, res, _) = growth_fit(&c, &s, |idx| Ok(3.0 * (idx.len() as f64).sqrt())).unwrap();
        assert!((m - 0.5).abs() < 1e-12 && res < 1e-12);
        assert!((slope_report(1.0 / (1.0 - m), m, res, 1.0).estimate - 2.0).abs() < 1e-12);
    }

    #[test]
    fn schedule_validation() {
        assert!(SubsampleSchedule::new(vec![0.5], 3, 0).is_err());
        assert!(SubsampleSchedule::new(vec![0.5, 0.4], 3, 0).is_err());
        let s = SubsampleSchedule::standard(0);
        assert_eq!(s.fractions.len(), 10);
        assert!((s.fractions[1] - 0.7777777777777778).abs() < 1e-12);
        assert_eq!(s.sizes(1000), vec![750, 778, 806, 833, 861, 889, 917, 944, 972, 1000]);
    }

    #[test]
    fn ph0_on_small_square() {
        let c = generate(&DatasetSpec::Cube { d: 2 }, 600, 4).unwrap();
        let r = ph0_dimension(&c, 1.0, &SubsampleSchedule::standard(1)).unwrap();
        assert!((r.estimate - 2.0).abs() < 0.3, "{}", r.estimate);
    }
}
