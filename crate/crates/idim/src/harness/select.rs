//! Hyperparameter selection: per-dataset best, and single choices minimising the median
//! absolute or relative error across datasets.

use crate::error::{param, Result};
use crate::harness::sweep::ResultTable;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Selected hyperparameters and their means for one `(dataset, N, estimator)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub dataset: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub estimator: String,
    pub d: f64,
    pub best_params: String,
    pub best_mean: f64,
    pub med_abs_params: String,
    pub med_abs_mean: f64,
    pub med_rel_params: String,
    pub med_rel_mean: f64,
}

fn err(mean: f64, d: f64) -> f64 {
    if mean.is_finite() {
        (mean - d).abs()
    } else {
        f64::INFINITY
    }
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Applies the three selection rules per `(estimator, N)`; ties go to the first grid entry.
pub fn hyperparam_select(table: &ResultTable, truth: &BTreeMap<String, f64>) -> Result<Vec<SelectionRow>> {
    if table.rows.is_empty() {
        return Err(param("empty result table"));
    }
    let mut groups: Vec<(String, usize)> = Vec::new();
    for r in &table.rows {
        let key = (r.estimator.clone(), r.n);
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    let mut out = Vec::new();
    for (est, n) in groups {
        let rows: Vec<_> = table.rows.iter().filter(|r| r.estimator == est && r.n == n).collect();
        let mut grid: Vec<&str> = Vec::new();
        let mut datasets: Vec<&str> = Vec::new();
        for r in &rows {
            if !grid.contains(&r.params.as_str()) {
                grid.push(&r.params);
            }
            if !datasets.contains(&r.dataset.as_str()) {
                datasets.push(&r.dataset);
            }
        }
        let cell = |ds: &str, h: &str| -> Result<f64> {
            rows.iter()
                .find(|r| r.dataset == ds && r.params == h)
                .map(|r| r.mean)
                .ok_or_else(|| param(format!("missing cell ({ds}, {n}, {est}, {h})")))
        };
        let d_of = |ds: &str| -> Result<f64> {
            truth.get(ds).copied().ok_or_else(|| param(format!("no intrinsic dimension for '{ds}'")))
        };
        let mut med_abs = Vec::with_capacity(grid.len());
        let mut med_rel = Vec::with_capacity(grid.len());
        for h in &grid {
            let mut a = Vec::new();
            let mut r = Vec::new();
            for ds in &datasets {
                let e = err(cell(ds, h)?, d_of(ds)?);
                a.push(e);
                r.push(e / d_of(ds)?);
            }
            med_abs.push(crate::stats::median(&a));
            med_rel.push(crate::stats::median(&r));
        }
        let h_abs = grid[argmin(&med_abs)];
        let h_rel = grid[argmin(&med_rel)];
        for ds in &datasets {
            let d = d_of(ds)?;
            let errs: Vec<f64> = grid.iter().map(|h| cell(ds, h).map(|m| err(m, d))).collect::<Result<_>>()?;
            let h_best = grid[argmin(&errs)];
            out.push(SelectionRow {
                dataset: ds.to_string(),
                n,
                estimator: est.clone(),
                d,
                best_params: h_best.to_string(),
                best_mean: cell(ds, h_best)?,
                med_abs_params: h_abs.to_string(),
                med_abs_mean: cell(ds, h_abs)?,
                med_rel_params: h_rel.to_string(),
                med_rel_mean: cell(ds, h_rel)?,
            });
        }
    }
    Ok(out)
}

/// CSV with one line per `(dataset, N, estimator)`.
pub fn write_selection_csv<W: std::io::Write>(rows: &[SelectionRow], w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
