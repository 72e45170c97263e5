//! Tangential estimators: local PCA with eigenvalue thresholds, conical dimension.

use crate::api::{EstimateReport, Flag};
use crate::error::{param, Error, Result};
use crate::geometry::{eps_neighbors, euclid, knn_query, PointCloud};
use crate::rng;
use crate::stats::{aggregate, Aggregation};
use faer::{Mat, Side};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// Eigenvalues of a local covariance matrix, nonincreasing and nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct EigSpectrum {
    pub values: Vec<f64>,
}

impl EigSpectrum {
    /// Sorts descending and clamps tiny negatives (down to `-1e-12`) to zero.
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        for v in &mut values {
            if *v < 0.0 && *v >= -1e-12 {
                *v = 0.0;
            }
        }
        Self { values }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v <= 0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * c).collect() }
    }
}

/// Eigenvalue threshold rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdMethod {
    /// Count of eigenvalues above `alpha * lambda_1`.
    Fo { alpha: f64 },
    /// Smaller of the first gap `lambda_u / lambda_{u+1} > gap` and the first prefix
    /// explaining `cumulative` of the variance.
    Fan { gap: f64, cumulative: f64 },
    /// Position of the largest ratio between consecutive nonzero eigenvalues.
    MaxGap,
    /// Smallest prefix whose share of total variance exceeds `gamma`.
    Ratio { gamma: f64 },
    /// `round((sum lambda)^2 / sum lambda^2)`.
    ParticipationRatio,
    /// Count of eigenvalues above `proportion * mean`.
    Kaiser { proportion: f64 },
    /// Longest prefix whose normalised eigenvalues exceed the expected broken-stick lengths.
    BrokenStick,
}

impl ThresholdMethod {
    pub const FO: ThresholdMethod = ThresholdMethod::Fo { alpha: 0.05 };
    pub const FAN: ThresholdMethod = ThresholdMethod::Fan { gap: 10.0, cumulative: 0.8 };
    pub const RATIO: ThresholdMethod = ThresholdMethod::Ratio { gamma: 0.95 };
    pub const KAISER: ThresholdMethod = ThresholdMethod::Kaiser { proportion: 1.0 };

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ThresholdMethod::Fo { alpha } => alpha > 0.0 && alpha < 1.0,
            ThresholdMethod::Fan { gap, cumulative } => gap > 1.0 && cumulative > 0.0 && cumulative < 1.0,
            ThresholdMethod::Ratio { gamma } => gamma > 0.0 && gamma < 1.0,
            ThresholdMethod::Kaiser { proportion } => proportion > 0.0 && proportion <= 1.0,
            ThresholdMethod::MaxGap | ThresholdMethod::ParticipationRatio | ThresholdMethod::BrokenStick => true,
        };
        if ok {
            Ok(())
        } else {
            Err(param(format!("threshold parameters out of range: {self:?}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ThresholdMethod::Fo { .. } => "fo",
            ThresholdMethod::Fan { .. } => "fan",
            ThresholdMethod::MaxGap => "maxgap",
            ThresholdMethod::Ratio { .. } => "ratio",
            ThresholdMethod::ParticipationRatio => "pr",
            ThresholdMethod::Kaiser { .. } => "kaiser",
            ThresholdMethod::BrokenStick => "broken_stick",
        }
    }
}

/// Result of a threshold rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdDim {
    pub dim: usize,
    /// Real-valued version (differs from `dim` only for the participation ratio).
    pub value: f64,
    pub degenerate: bool,
}

/// Covariance spectrum of a neighbourhood, padded with zeros to the ambient dimension.
pub fn local_pca_spectrum(points: &[&[f64]]) -> Result<EigSpectrum> {
    let m = points.len();
    if m < 2 {
        return Err(param("local PCA needs at least two points"));
    }
    let dim = points[0].len();
    let mut centre = vec![0.0; dim];
    for p in points {
        for (c, v) in centre.iter_mut().zip(*p) {
            *c += v;
        }
    }
    centre.iter_mut().for_each(|c| *c /= m as f64);
    let x = Mat::<f64>::from_fn(m, dim, |i, j| points[i][j] - centre[j]);
    let scale = 1.0 / (m - 1) as f64;
    // the nonzero spectrum of X^T X equals that of X X^T; use the smaller Gram matrix
    let gram = if m <= dim { &x * x.transpose() } else { x.transpose() * &x };
    let mut values = gram
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::NonConvergent(format!("eigenvalues: {e:?}")))?;
    values.iter_mut().for_each(|v| *v *= scale);
    values.resize(dim.max(values.len()), 0.0);
    let mut s = EigSpectrum::new(values);
    s.values.truncate(dim);
    Ok(s)
}

/// Applies `method` to `spectrum`.
pub fn threshold_dimension(spectrum: &EigSpectrum, method: &ThresholdMethod) -> ThresholdDim {
    let l = &spectrum.values;
    let m = l.len();
    if spectrum.is_zero() {
        return ThresholdDim { dim: 0, value: 0.0, degenerate: true };
    }
    let total: f64 = l.iter().sum();
    let first_prefix_above = |share: f64| -> usize {
        let mut acc = 0.0;
        for (u, v) in l.iter().enumerate() {
            acc += v;
            if acc > share * total {
                return u + 1;
            }
        }
        m
    };
    let positive = l.iter().filter(|v| **v > 0.0).count();
    let dim = match *method {
        ThresholdMethod::Fo { alpha } => l.iter().filter(|v| **v > alpha * l[0]).count(),
        ThresholdMethod::Fan { gap, cumulative } => {
            let by_gap = (0..m - 1).find(|&u| l[u] > 0.0 && l[u] > gap * l[u + 1]).map_or(positive, |u| u + 1);
            by_gap.min(first_prefix_above(cumulative))
        }
        ThresholdMethod::MaxGap => {
            let mut best = (1, f64::NEG_INFINITY);
            for u in 0..positive.saturating_sub(1) {
                let r = l[u] / l[u + 1];
                if r > best.1 {
                    best = (u + 1, r);
                }
            }
            best.0
        }
        ThresholdMethod::Ratio { gamma } => first_prefix_above(gamma),
        ThresholdMethod::ParticipationRatio => {
            let pr = total * total / l.iter().map(|v| v * v).sum::<f64>();
            return ThresholdDim { dim: pr.round() as usize, value: pr, degenerate: false };
        }
        ThresholdMethod::Kaiser { proportion } => {
            let mean = total / m as f64;
            l.iter().filter(|v| **v > proportion * mean).count()
        }
        ThresholdMethod::BrokenStick => {
            let stick = broken_stick_lengths(m);
            l.iter().zip(&stick).take_while(|(v, s)| **v / total > **s).count()
        }
    };
    ThresholdDim { dim, value: dim as f64, degenerate: false }
}

/// Expected lengths `L_u = (1/m) sum_{i=u}^m 1/i` of a unit stick broken at `m - 1` uniform points.
pub fn broken_stick_lengths(m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m];
    let mut acc = 0.0;
    for u in (1..=m).rev() {
        acc += 1.0 / u as f64;
        out[u - 1] = acc / m as f64;
    }
    out
}

/// Neighbourhood used by local estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Neighborhood {
    /// The `k` nearest neighbours.
    Knn(usize),
    /// Points strictly closer than `eps`.
    Eps(f64),
    /// Points strictly closer than the median `r_k` distance.
    EpsMedianKnn(usize),
}

impl Neighborhood {
    /// Neighbour lists (center excluded) plus the nominal neighbour count used for throttling.
    pub fn resolve(&self, cloud: &PointCloud) -> Result<(Vec<Vec<usize>>, usize)> {
        match *self {
            Neighborhood::Knn(k) => {
                let idx = knn_query(cloud, k)?;
                Ok(((0..cloud.n()).map(|p| idx.ids(p).to_vec()).collect(), k))
            }
            Neighborhood::Eps(eps) => {
                if !(eps > 0.0) {
                    return Err(param("eps must be > 0"));
                }
                let lists: Vec<Vec<usize>> = (0..cloud.n()).map(|p| eps_neighbors(cloud, p, eps)).collect();
                let k = crate::stats::median(&lists.iter().map(|l| l.len() as f64).collect::<Vec<_>>());
                Ok((lists, k.round() as usize))
            }
            Neighborhood::EpsMedianKnn(k) => {
                let eps = knn_query(cloud, k)?.median_rk(k);
                let lists = (0..cloud.n()).map(|p| eps_neighbors(cloud, p, eps)).collect();
                Ok((lists, k))
            }
        }
    }
}

/// Local PCA: per-point threshold dimension of the neighbourhood (center included), aggregated.
pub fn lpca_estimate(
    cloud: &PointCloud,
    nbhd: Neighborhood,
    method: &ThresholdMethod,
    agg: Aggregation,
) -> Result<EstimateReport> {
    method.validate()?;
    let (lists, k) = nbhd.resolve(cloud)?;
    let n = cloud.n();
    let mut locals = Vec::with_capacity(n);
    let mut degenerate = 0usize;
    let mut small = 0usize;
    for (p, list) in lists.iter().enumerate() {
        if list.is_empty() {
            small += 1;
            continue;
        }
        let mut pts: Vec<&[f64]> = vec![cloud.row(p)];
        pts.extend(list.iter().map(|&j| cloud.row(j)));
        let t = threshold_dimension(&local_pca_spectrum(&pts)?, method);
        if t.degenerate {
            degenerate += 1;
            continue;
        }
        locals.push(t.dim as f64);
    }
    if (small as f64) > 0.1 * n as f64 {
        return Err(param(format!("{small} of {n} neighbourhoods contain fewer than two points")));
    }
    if locals.is_empty() {
        return Err(Error::Degenerate("every neighbourhood is degenerate".into()));
    }
    let estimate = aggregate(&locals, agg)?;
    let mut report = EstimateReport::new(estimate).with_locals(locals);
    report.diag("k", k as f64).diag("degenerate_points", degenerate as f64).diag("small_neighborhoods", small as f64);
    if degenerate > 0 {
        report.flag(Flag::Degenerate);
    }
    if estimate >= k as f64 - 1.0 {
        report.flag(Flag::Throttled);
    }
    Ok(report)
}

/// Largest subset of `dirs` with pairwise strictly negative inner products.
///
/// Exact branch and bound when `exact`, otherwise greedy over `restarts` random orders.
pub fn max_obtuse_subset(dirs: &[Vec<f64>], exact: bool, restarts: usize, seed: u64) -> usize {
    let m = dirs.len();
    if m == 0 {
        return 0;
    }
    let adj: Vec<Vec<bool>> = (0..m)
        .map(|i| (0..m).map(|j| i != j && dot(&dirs[i], &dirs[j]) < 0.0).collect())
        .collect();
    if exact {
        let mut best = 0;
        clique_search(&adj, &mut Vec::new(), (0..m).collect(), &mut best);
        best
    } else {
        let mut rng = rng::stream(seed);
        let mut order: Vec<usize> = (0..m).collect();
        let mut best = 0;
        for r in 0..restarts.max(1) {
            if r > 0 {
                order.shuffle(&mut rng);
            }
            let mut set: Vec<usize> = Vec::new();
            for &v in &order {
                if set.iter().all(|&u| adj[u][v]) {
                    set.push(v);
                }
            }
            best = best.max(set.len());
        }
        best
    }
}

fn clique_search(adj: &[Vec<bool>], current: &mut Vec<usize>, candidates: Vec<usize>, best: &mut usize) {
    if candidates.is_empty() {
        *best = (*best).max(current.len());
        return;
    }
    if current.len() + candidates.len() <= *best {
        return;
    }
    for (pos, &v) in candidates.iter().enumerate() {
        if current.len() + candidates.len() - pos <= *best {
            return;
        }
        let next: Vec<usize> = candidates[pos + 1..].iter().copied().filter(|&u| adj[v][u]).collect();
        current.push(v);
        clique_search(adj, current, next, best);
        current.pop();
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest `k` for which the conical search is exhaustive.
pub const CDIM_EXACT_MAX_K: usize = 20;

/// Conical dimension: per point, the largest set of pairwise obtuse directions to its
/// `k` nearest neighbours; aggregated by `agg`.
pub fn conical_dimension(cloud: &PointCloud, k: usize, agg: Aggregation, seed: u64) -> Result<EstimateReport> {
    let idx = knn_query(cloud, k)?;
    let exact = k <= CDIM_EXACT_MAX_K;
    let mut locals = Vec::with_capacity(cloud.n());
    let mut skipped = 0usize;
    for p in 0..cloud.n() {
        let x = cloud.row(p);
        let dirs: Vec<Vec<f64>> = idx
            .ids(p)
            .iter()
            .filter_map(|&j| {
                let r = euclid(x, cloud.row(j));
                if r == 0.0 {
                    skipped += 1;
                    None
                } else {
                    Some(cloud.row(j).iter().zip(x).map(|(a, b)| (a - b) / r).collect())
                }
            })
            .collect();
        locals.push(max_obtuse_subset(&dirs, exact, 64, rng::derive_seed(seed, p as u64)) as f64);
    }
    let estimate = aggregate(&locals, agg)?;
    let mut report = EstimateReport::new(estimate).with_locals(locals);
    report.diag("skipped_duplicates", skipped as f64);
    if !exact {
        report.flag(Flag::Approximate);
    }
    if skipped > 0 {
        report.flag(Flag::Degenerate);
    }
    Ok(report)
}
