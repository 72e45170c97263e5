//! Robustness study: fixed-hyperparameter estimates under Gaussian noise and outliers.

use crate::api::{run_estimator, EstimatorConfig};
use crate::bench::{add_gaussian_noise, add_outliers, generate, DatasetSpec};
use crate::error::{param, Result};
use crate::harness::parallel_map;
use crate::harness::sweep::{data_seed, EstimatorGrid, ResultRow};
use crate::rng::derive_seed;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// Corruption protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// Additive `N(0, sigma2)` on every coordinate; level is `sigma2`.
    Gaussian,
    /// Coordinate-wise `U(3, 6)` scaling of randomly chosen points; level is their count.
    Outliers,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Outliers => "outliers",
        }
    }
}

fn default_datasets() -> Vec<String> {
    vec!["sphere:6:11".into(), "sphere:10:11".into(), "so:4".into()]
}
fn default_n() -> usize {
    2500
}
fn default_runs() -> usize {
    20
}
fn default_sigma2() -> Vec<f64> {
    vec![0.0, 0.01, 0.1, 1.0]
}
fn default_outliers() -> Vec<usize> {
    vec![0, 25, 125, 250]
}
fn default_tuning() -> String {
    "sphere:10:11".into()
}

/// Noise study description. Estimator grids with more than one entry are first reduced
/// to the entry closest to the truth on the clean tuning dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    #[serde(default = "default_datasets")]
    pub datasets: Vec<String>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sigma2")]
    pub sigma2: Vec<f64>,
    #[serde(default = "default_outliers")]
    pub outliers: Vec<usize>,
    #[serde(default = "default_tuning")]
    pub tuning_dataset: String,
    #[serde(rename = "estimator")]
    pub estimators: Vec<EstimatorGrid>,
}

impl NoiseConfig {
    pub fn new(estimators: Vec<EstimatorGrid>) -> Self {
        Self {
            datasets: default_datasets(),
            n: default_n(),
            runs: default_runs(),
            seed: 0,
            sigma2: default_sigma2(),
            outliers: default_outliers(),
            tuning_dataset: default_tuning(),
            estimators,
        }
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| crate::error::Error::Parse(e.to_string()))
    }

    fn validate(&self) -> Result<()> {
        if self.runs == 0 || self.n == 0 {
            return Err(param("runs and n must be >= 1"));
        }
        if self.estimators.is_empty() {
            return Err(param("no estimators"));
        }
        if self.sigma2.iter().any(|s| !(*s >= 0.0)) {
            return Err(param("noise variances must be >= 0"));
        }
        if self.outliers.iter().any(|&m| m > self.n) {
            return Err(param("more outliers than points"));
        }
        Ok(())
    }
}

/// One `(dataset, estimator, corruption level)` cell; the table statistic is the median.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub dataset: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub estimator: String,
    pub params: String,
    pub kind: NoiseKind,
    pub level: f64,
    pub d: f64,
    pub median: f64,
    pub std: f64,
    pub mean: f64,
    pub runs: usize,
    pub failures: usize,
}

fn estimate(cloud: &crate::geometry::PointCloud, c: &EstimatorConfig) -> Option<f64> {
    run_estimator(cloud, c).ok().map(|r| r.estimate).filter(|v| v.is_finite())
}

/// Picks, per grid, the configuration whose mean on the clean tuning dataset is closest to its dimension.
pub fn tune_on_clean(config: &NoiseConfig, jobs: usize) -> Result<Vec<EstimatorConfig>> {
    let spec = DatasetSpec::from_str(&config.tuning_dataset)?;
    let d = spec.dims().0 as f64;
    let mut chosen = Vec::new();
    for g in &config.estimators {
        let grid = g.expand()?;
        for c in &grid {
            crate::api::resolve(c)?;
        }
        if grid.len() == 1 {
            chosen.push(grid[0].clone());
            continue;
        }
        let master = derive_seed(config.seed, u64::MAX);
        let per_run: Vec<Vec<Option<f64>>> = parallel_map(config.runs, jobs, |run| {
            match generate(&spec, config.n, data_seed(master, 0, config.n, run)) {
                Ok(cloud) => grid.iter().map(|c| estimate(&cloud, c)).collect(),
                Err(_) => vec![None; grid.len()],
            }
        });
        let errs: Vec<f64> = (0..grid.len())
            .map(|ci| {
                let runs: Vec<Option<f64>> = per_run.iter().map(|r| r[ci]).collect();
                let m = ResultRow::from_runs("", config.n, "", "", d, &runs).mean;
                if m.is_finite() { (m - d).abs() } else { f64::INFINITY }
            })
            .collect();
        let mut best = 0;
        for (i, e) in errs.iter().enumerate() {
            if *e < errs[best] {
                best = i;
            }
        }
        chosen.push(grid[best].clone());
    }
    Ok(chosen)
}

/// Runs the study. Every level of a repetition corrupts the same clean cloud.
pub fn noise_experiment(config: &NoiseConfig, jobs: usize) -> Result<Vec<NoiseRow>> {
    config.validate()?;
    let specs: Vec<DatasetSpec> = config.datasets.iter().map(|d| DatasetSpec::from_str(d)).collect::<Result<_>>()?;
    let estimators = tune_on_clean(config, jobs)?;
    let levels: Vec<(NoiseKind, f64)> = config
        .sigma2
        .iter()
        .map(|s| (NoiseKind::Gaussian, *s))
        .chain(config.outliers.iter().map(|m| (NoiseKind::Outliers, *m as f64)))
        .collect();
    let tasks: Vec<(usize, usize)> =
        (0..specs.len()).flat_map(|di| (0..config.runs).map(move |run| (di, run))).collect();
    // per task: [level][estimator]
    let outcomes: Vec<Vec<Vec<Option<f64>>>> = parallel_map(tasks.len(), jobs, |t| {
        let (di, run) = tasks[t];
        let seed = data_seed(config.seed, di, config.n, run);
        let clean = match generate(&specs[di], config.n, seed) {
            Ok(c) => c,
            Err(_) => return vec![vec![None; estimators.len()]; levels.len()],
        };
        levels
            .iter()
            .enumerate()
            .map(|(li, &(kind, level))| {
                let cseed = derive_seed(seed, 1 + li as u64);
                let cloud = match kind {
                    NoiseKind::Gaussian => add_gaussian_noise(&clean, level, cseed),
                    NoiseKind::Outliers => add_outliers(&clean, level as usize, cseed),
                };
                match cloud {
                    Ok(c) => estimators.iter().map(|e| estimate(&c, e)).collect(),
                    Err(_) => vec![None; estimators.len()],
                }
            })
            .collect()
    });
    let mut rows = Vec::new();
    for (di, spec) in specs.iter().enumerate() {
        let block = &outcomes[di * config.runs..(di + 1) * config.runs];
        for (ei, e) in estimators.iter().enumerate() {
            for (li, &(kind, level)) in levels.iter().enumerate() {
                let runs: Vec<Option<f64>> = block.iter().map(|o| o[li][ei]).collect();
                let r = ResultRow::from_runs(&config.datasets[di], config.n, &e.estimator, "", spec.dims().0 as f64, &runs);
                rows.push(NoiseRow {
                    dataset: r.dataset,
                    n: config.n,
                    estimator: e.estimator.clone(),
                    params: e.param_label(),
                    kind,
                    level,
                    d: r.d,
                    median: r.median,
                    std: r.std,
                    mean: r.mean,
                    runs: r.runs,
                    failures: r.failures,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_noise_csv<W: std::io::Write>(rows: &[NoiseRow], w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::api::ParamValue;

    fn small() -> NoiseConfig {
        let mut c = NoiseConfig::new(vec![EstimatorGrid::new("mle")
            .with("k", vec![ParamValue::from(10.0)])
            .with("agg", vec![ParamValue::from("median")])]);
        c.datasets = vec!["sphere:2:4".into()];
        c.n = 300;
        c.runs = 3;
        c.sigma2 = vec![0.0, 1.0];
        c.outliers = vec![0, 30];
        c
    }

    #[test]
    fn zero_levels_agree_and_noise_inflates() {
        let rows = noise_experiment(&small(), 2).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].median, rows[2].median);
        assert!(rows[1].median > rows[0].median + 0.5);
        assert_eq!(rows[0].params, "agg=median;k=10");
    }

    #[test]
    fn multi_entry_grid_is_tuned_once() {
        let mut c = small();
        c.tuning_dataset = "sphere:2:3".into();
        c.estimators = vec![EstimatorGrid::new("mle").with("k", vec![ParamValue::from(3.0), ParamValue::from(20.0)])];
        let chosen = tune_on_clean(&c, 1).unwrap();
        assert_eq!(chosen.len(), 1);
        assert_eq!(chosen, tune_on_clean(&c, 3).unwrap());
    }
}
