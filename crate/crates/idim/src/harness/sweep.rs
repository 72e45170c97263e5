//! Benchmark sweeps over datasets, sample sizes, estimators and hyperparameter grids.

use crate::api::{run_estimator, EstimatorConfig, ParamValue};
use crate::bench::{generate, DatasetSpec};
use crate::error::{param, Error, Result};
use crate::harness::parallel_map;
use crate::rng::derive_seed;
use crate::stats::{mean, median, sample_std};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::str::FromStr;

/// One estimator with lists of values per hyperparameter; the grid is their product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorGrid {
    pub id: String,
    #[serde(default)]
    pub grid: BTreeMap<String, Vec<ParamValue>>,
}

impl EstimatorGrid {
    pub fn new(id: &str) -> Self {
        Self { id: id.to_string(), grid: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, values: Vec<ParamValue>) -> Self {
        self.grid.insert(key.to_string(), values);
        self
    }

    /// Cartesian product in key order; the last key varies fastest.
    pub fn expand(&self) -> Result<Vec<EstimatorConfig>> {
        let mut out = vec![EstimatorConfig::new(&self.id)];
        for (key, values) in &self.grid {
            if values.is_empty() {
                return Err(param(format!("empty grid for '{key}'")));
            }
            out = out
                .into_iter()
                .flat_map(|c| values.iter().map(move |v| c.clone().with(key.clone(), v.clone())))
                .collect();
        }
        Ok(out)
    }
}

fn default_runs() -> usize {
    20
}

/// Sweep description, read from TOML:
///
/// ```toml
/// datasets = ["M7_Roll", "sphere:6:11"]
/// sample_sizes = [625, 1250]
/// runs = 20
/// seed = 0
///
/// [[estimator]]
/// id = "mle"
/// [estimator.grid]
/// k = [10, 20]
/// agg = ["mean", "median"]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub datasets: Vec<String>,
    pub sample_sizes: Vec<usize>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(rename = "estimator")]
    pub estimators: Vec<EstimatorGrid>,
}

impl SweepConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let c: SweepConfig = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(param("runs must be >= 1"));
        }
        if self.datasets.is_empty() || self.sample_sizes.is_empty() || self.estimators.is_empty() {
            return Err(param("datasets, sample_sizes and estimators must be non-empty"));
        }
        for d in &self.datasets {
            DatasetSpec::from_str(d)?;
        }
        for g in &self.estimators {
            for c in g.expand()? {
                crate::api::resolve(&c)?;
            }
        }
        Ok(())
    }
}

/// Aggregated results of one `(dataset, N, estimator, hyperparameters)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub estimator: String,
    pub params: String,
    /// Intrinsic dimension of the dataset.
    pub d: f64,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub runs: usize,
    pub failures: usize,
    /// Successful per-run estimates; not written to CSV.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
}

impl ResultRow {
    /// Row from per-run outcomes; failed runs are counted and excluded.
    pub fn from_runs(dataset: &str, n: usize, estimator: &str, params: &str, d: f64, runs: &[Option<f64>]) -> Self {
        let values: Vec<f64> = runs.iter().flatten().copied().collect();
        let failures = runs.len() - values.len();
        let (m, s, med) = if values.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN)
        } else {
            (mean(&values), sample_std(&values), median(&values))
        };
        Self {
            dataset: dataset.into(),
            n,
            estimator: estimator.into(),
            params: params.into(),
            d,
            mean: m,
            std: s,
            median: med,
            runs: runs.len(),
            failures,
            values,
        }
    }
}

/// Rows in sweep order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().map(|r| r.failures).sum()
    }

    /// Dataset to intrinsic dimension.
    pub fn truth(&self) -> BTreeMap<String, f64> {
        self.rows.iter().map(|r| (r.dataset.clone(), r.d)).collect()
    }

    /// CSV: `dataset,N,estimator,params,d,mean,std,median,runs,failures`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        for r in &self.rows {
            w.serialize(CsvRow::from(r))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let rows = rd
            .deserialize::<CsvRow>()
            .map(|row| row.map(ResultRow::from).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rows })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    dataset: String,
    #[serde(rename = "N")]
    n: usize,
    estimator: String,
    params: String,
    d: f64,
    mean: f64,
    std: f64,
    median: f64,
    runs: usize,
    failures: usize,
}

impl From<&ResultRow> for CsvRow {
    fn from(r: &ResultRow) -> Self {
        Self {
            dataset: r.dataset.clone(),
            n: r.n,
            estimator: r.estimator.clone(),
            params: r.params.clone(),
            d: r.d,
            mean: r.mean,
            std: r.std,
            median: r.median,
            runs: r.runs,
            failures: r.failures,
        }
    }
}

impl From<CsvRow> for ResultRow {
    fn from(r: CsvRow) -> Self {
        Self {
            dataset: r.dataset,
            n: r.n,
            estimator: r.estimator,
            params: r.params,
            d: r.d,
            mean: r.mean,
            std: r.std,
            median: r.median,
            runs: r.runs,
            failures: r.failures,
            values: Vec::new(),
        }
    }
}

/// Seed of the cloud for `(dataset index, N, run)`; shared by every estimator.
pub fn data_seed(master: u64, dataset: usize, n: usize, run: usize) -> u64 {
    derive_seed(derive_seed(derive_seed(master, dataset as u64), n as u64), run as u64)
}

/// Runs every cell of the sweep on up to `jobs` threads. Failed runs are recorded, never fatal.
pub fn bench_run(config: &SweepConfig, jobs: usize) -> Result<ResultTable> {
    config.validate()?;
    let specs: Vec<DatasetSpec> = config.datasets.iter().map(|d| DatasetSpec::from_str(d)).collect::<Result<_>>()?;
    let configs: Vec<EstimatorConfig> =
        config.estimators.iter().map(|g| g.expand()).collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    let mut tasks = Vec::new();
    for (di, _) in specs.iter().enumerate() {
        for &n in &config.sample_sizes {
            for run in 0..config.runs {
                tasks.push((di, n, run));
            }
        }
    }
    let outcomes: Vec<Vec<Option<f64>>> = parallel_map(tasks.len(), jobs, |t| {
        let (di, n, run) = tasks[t];
        match generate(&specs[di], n, data_seed(config.seed, di, n, run)) {
            Ok(cloud) => configs
                .iter()
                .map(|c| run_estimator(&cloud, c).ok().map(|r| r.estimate).filter(|v| v.is_finite()))
                .collect(),
            Err(_) => vec![None; configs.len()],
        }
    });
    let mut rows = Vec::new();
    let mut t = 0;
    for (di, spec) in specs.iter().enumerate() {
        for &n in &config.sample_sizes {
            let block = &outcomes[t..t + config.runs];
            t += config.runs;
            for (ci, c) in configs.iter().enumerate() {
                let runs: Vec<Option<f64>> = block.iter().map(|o| o[ci]).collect();
                rows.push(ResultRow::from_runs(
                    &config.datasets[di],
                    n,
                    &c.estimator,
                    &c.param_label(),
                    spec.dims().0 as f64,
                    &runs,
                ));
            }
        }
    }
    Ok(ResultTable { rows })
}
