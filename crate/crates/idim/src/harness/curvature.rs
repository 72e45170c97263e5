//! Curvature studies: pointwise estimates at a paraboloid vertex and the spread of
//! overestimates on a torus.

use crate::bench::{generate, torus_angle, DatasetSpec, PARABOLOID_HALF_WIDTH};
use crate::error::{param, Error, Result};
use crate::geometry::{euclid, knn_query, PointCloud};
use crate::harness::parallel_map;
use crate::parametric::mle::mle_local_knn;
use crate::rng::derive_seed;
use crate::special::{ks_pvalue, ks_statistic};
use crate::stats::{mean, median, sample_std};
use crate::tangential::{local_pca_spectrum, threshold_dimension, ThresholdMethod};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Local estimator used for pointwise estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalMethod {
    /// Local PCA with the fraction-of-first-eigenvalue threshold.
    Lpca { alpha: f64 },
    /// Uncorrected k-nearest-neighbour MLE.
    Mle,
}

impl std::str::FromStr for LocalMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lpca" => Ok(LocalMethod::Lpca { alpha: 0.05 }),
            "mle" => Ok(LocalMethod::Mle),
            other => Err(Error::UnknownEstimator(format!("{other} (pointwise supports lpca, mle)"))),
        }
    }
}

/// Estimate at `query` from its `k` nearest points of `cloud`.
pub fn pointwise_estimate(cloud: &PointCloud, query: &[f64], k: usize, method: LocalMethod) -> Result<f64> {
    if k == 0 || k > cloud.n() {
        return Err(param(format!("k must lie in 1..={}", cloud.n())));
    }
    let mut order: Vec<(f64, usize)> = (0..cloud.n()).map(|i| (euclid(query, cloud.row(i)), i)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    order.truncate(k);
    match method {
        LocalMethod::Lpca { alpha } => {
            let mut pts: Vec<&[f64]> = vec![query];
            pts.extend(order.iter().map(|&(_, i)| cloud.row(i)));
            let t = threshold_dimension(&local_pca_spectrum(&pts)?, &ThresholdMethod::Fo { alpha });
            Ok(t.dim as f64)
        }
        LocalMethod::Mle => {
            let d: Vec<f64> = order.iter().map(|p| p.0).collect();
            mle_local_knn(&d, false)
        }
    }
}

/// Surface area of `z = 2x^2 + sign y^2 / b^2` over the sampling square by the midpoint rule.
pub fn paraboloid_area(b: f64) -> f64 {
    let m = 400;
    let w = PARABOLOID_HALF_WIDTH;
    let h = 2.0 * w / m as f64;
    let mut s = 0.0;
    for i in 0..m {
        let x = -w + (i as f64 + 0.5) * h;
        for j in 0..m {
            let y = -w + (j as f64 + 0.5) * h;
            s += (1.0 + 16.0 * x * x + 4.0 * y * y / b.powi(4)).sqrt();
        }
    }
    s * h * h
}

fn default_ks() -> Vec<usize> {
    (20..=165).step_by(5).collect()
}

/// Paraboloid study. Sample sizes keep the density that gives `base_n` points at `b = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParaboloidConfig {
    pub bs: Vec<f64>,
    pub signs: Vec<f64>,
    #[serde(default = "default_ks")]
    pub ks: Vec<usize>,
    pub runs: usize,
    pub base_n: usize,
    pub method: LocalMethod,
    pub seed: u64,
}

impl Default for ParaboloidConfig {
    fn default() -> Self {
        Self {
            bs: vec![0.5, 0.7, 1.0, 1.5, 2.0],
            signs: vec![1.0, -1.0],
            ks: default_ks(),
            runs: 5,
            base_n: 10000,
            method: LocalMethod::Lpca { alpha: 0.05 },
            seed: 0,
        }
    }
}

/// Pointwise estimates at the vertex for one `(b, sign, k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParaboloidRow {
    pub b: f64,
    pub sign: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub mean: f64,
    pub median: f64,
    /// Fraction of runs whose rounded estimate is 2.
    pub frac_two: f64,
}

/// Per `(b, sign)`: over runs, how many `k` give a rounded estimate of 2 and the largest such `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParaboloidCount {
    pub b: f64,
    pub sign: f64,
    pub curvature_y: f64,
    pub mean_count: f64,
    pub std_count: f64,
    /// 0 for runs where no `k` gives 2.
    pub mean_largest_k: f64,
}

/// Estimates at the vertex `(0, 0, 0)`, added as a query point to each sampled cloud.
pub fn curvature_paraboloid(config: &ParaboloidConfig, jobs: usize) -> Result<(Vec<ParaboloidRow>, Vec<ParaboloidCount>)> {
    if config.runs == 0 || config.ks.is_empty() {
        return Err(param("runs and ks must be non-empty"));
    }
    let base = paraboloid_area(1.0);
    let shapes: Vec<(f64, f64)> =
        config.bs.iter().flat_map(|&b| config.signs.iter().map(move |&s| (b, s))).collect();
    let tasks: Vec<(usize, usize)> =
        (0..shapes.len()).flat_map(|si| (0..config.runs).map(move |r| (si, r))).collect();
    let kmax = *config.ks.iter().max().unwrap();
    let outcomes: Vec<Result<(usize, Vec<f64>)>> = parallel_map(tasks.len(), jobs, |t| {
        let (si, run) = tasks[t];
        let (b, sign) = shapes[si];
        let n = (config.base_n as f64 * paraboloid_area(b) / base).round() as usize;
        if kmax > n {
            return Err(param(format!("k = {kmax} exceeds N = {n}")));
        }
        let cloud = generate(&DatasetSpec::Paraboloid { b, sign }, n, derive_seed(derive_seed(config.seed, si as u64), run as u64))?;
        let v = config
            .ks
            .iter()
            .map(|&k| pointwise_estimate(&cloud, &[0.0, 0.0, 0.0], k, config.method).unwrap_or(f64::NAN))
            .collect();
        Ok((n, v))
    });
    let outcomes: Vec<(usize, Vec<f64>)> = outcomes.into_iter().collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut counts = Vec::new();
    for (si, &(b, sign)) in shapes.iter().enumerate() {
        let block = &outcomes[si * config.runs..(si + 1) * config.runs];
        for (ki, &k) in config.ks.iter().enumerate() {
            let vals: Vec<f64> = block.iter().map(|o| o.1[ki]).filter(|v| v.is_finite()).collect();
            let (m, med, frac) = if vals.is_empty() {
                (f64::NAN, f64::NAN, 0.0)
            } else {
                let two = vals.iter().filter(|v| v.round() == 2.0).count();
                (mean(&vals), median(&vals), two as f64 / vals.len() as f64)
            };
            rows.push(ParaboloidRow { b, sign, n: block[0].0, k, mean: m, median: med, frac_two: frac });
        }
        let per_run: Vec<(f64, f64)> = block
            .iter()
            .map(|o| {
                let twos: Vec<usize> = config.ks.iter().zip(&o.1).filter(|(_, v)| v.round() == 2.0).map(|(k, _)| *k).collect();
                (twos.len() as f64, twos.iter().max().copied().unwrap_or(0) as f64)
            })
            .collect();
        let c: Vec<f64> = per_run.iter().map(|p| p.0).collect();
        let l: Vec<f64> = per_run.iter().map(|p| p.1).collect();
        counts.push(ParaboloidCount {
            b,
            sign,
            curvature_y: sign * 2.0 / (b * b),
            mean_count: mean(&c),
            std_count: if c.len() > 1 { sample_std(&c) } else { 0.0 },
            mean_largest_k: mean(&l),
        });
    }
    Ok((rows, counts))
}

/// Torus study parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusConfig {
    pub big_r: f64,
    pub r: f64,
    pub n: usize,
    pub k: usize,
    pub method: LocalMethod,
    pub seed: u64,
}

impl Default for TorusConfig {
    fn default() -> Self {
        Self { big_r: 2.0, r: 1.0, n: 10000, k: 20, method: LocalMethod::Mle, seed: 0 }
    }
}

/// Empirical CDF of `|phi - pi|` over points whose rounded estimate is 3, next to the
/// area-uniform reference `(R x - r sin x) / (R pi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusCdf {
    pub n: usize,
    pub overestimated: usize,
    pub x: Vec<f64>,
    pub empirical: Vec<f64>,
    pub reference: Vec<f64>,
    pub ks_statistic: f64,
    pub ks_pvalue: f64,
}

impl TorusCdf {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["abs_phi_minus_pi", "empirical_cdf", "uniform_area_cdf"])?;
        for i in 0..self.x.len() {
            w.write_record([self.x[i].to_string(), self.empirical[i].to_string(), self.reference[i].to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn curvature_torus(config: &TorusConfig, jobs: usize) -> Result<TorusCdf> {
    let spec = DatasetSpec::Torus { big_r: config.big_r, r: config.r };
    let cloud = generate(&spec, config.n, config.seed)?;
    let idx = knn_query(&cloud, config.k)?;
    let locals: Vec<f64> = parallel_map(cloud.n(), jobs, |p| {
        let est = match config.method {
            LocalMethod::Mle => mle_local_knn(idx.dists(p), false),
            LocalMethod::Lpca { alpha } => {
                let mut pts: Vec<&[f64]> = vec![cloud.row(p)];
                pts.extend(idx.ids(p).iter().map(|&j| cloud.row(j)));
                local_pca_spectrum(&pts).map(|s| threshold_dimension(&s, &ThresholdMethod::Fo { alpha }).dim as f64)
            }
        };
        est.unwrap_or(f64::NAN)
    });
    let mut x: Vec<f64> = (0..cloud.n())
        .filter(|&p| locals[p].round() == 3.0)
        .map(|p| (torus_angle(cloud.row(p), config.big_r) - PI).abs())
        .collect();
    x.sort_by(f64::total_cmp);
    let (big_r, r) = (config.big_r, config.r);
    let cdf = move |t: f64| ((big_r * t - r * t.sin()) / (big_r * PI)).clamp(0.0, 1.0);
    let m = x.len();
    let empirical = (1..=m).map(|i| i as f64 / m as f64).collect();
    let reference = x.iter().map(|&t| cdf(t)).collect();
    let (ks, p) = if m == 0 { (f64::NAN, f64::NAN) } else {
        let d = ks_statistic(&x, cdf);
        (d, ks_pvalue(d, m))
    };
    Ok(TorusCdf { n: cloud.n(), overestimated: m, x, empirical, reference, ks_statistic: ks, ks_pvalue: p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    #[test]
    fn flat_sheet_gives_two_for_any_k() {
        let mut rng = stream(1);
        let rows: Vec<Vec<f64>> =
            (0..800).map(|_| vec![rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0, 0.0]).collect();
        let cloud = PointCloud::from_rows(&rows).unwrap();
        for k in [20, 60, 165] {
            assert_eq!(pointwise_estimate(&cloud, &[0.0; 3], k, LocalMethod::Lpca { alpha: 0.05 }).unwrap(), 2.0);
        }
    }

    #[test]
    fn area_of_flat_reference() {
        // b -> inf leaves 2x^2 only: int sqrt(1+16x^2) dx over [-w,w] times 2w
        let w = PARABOLOID_HALF_WIDTH;
        let a = paraboloid_area(1e6);
        let f = |x: f64| 0.5 * x * (1.0 + 16.0 * x * x).sqrt() + (4.0 * x + (1.0 + 16.0 * x * x).sqrt()).ln() / 8.0;
        assert!((a - 2.0 * w * (f(w) - f(-w))).abs() < 1e-3 * a);
    }

    #[test]
    fn paraboloid_sizes_and_counts() {
        let c = ParaboloidConfig { bs: vec![1.0], signs: vec![1.0], ks: vec![20, 40], runs: 2, base_n: 2000, ..Default::default() };
        let (rows, counts) = curvature_paraboloid(&c, 2).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].n, 2000);
        assert_eq!(counts[0].curvature_y, 2.0);
        assert!(counts[0].mean_count <= 2.0);
        assert!(counts[0].mean_largest_k <= 40.0);
    }

    #[test]
    fn torus_reference_cdf_is_normalised() {
        let c = TorusConfig { n: 1500, k: 10, ..Default::default() };
        let t = curvature_torus(&c, 1).unwrap();
        assert!(t.x.windows(2).all(|w| w[0] <= w[1]));
        assert!(t.reference.iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(t.overestimated, t.x.len());
    }
}
