//! Point clouds, exact nearest-neighbour search and kNN graphs.
//!
//! Neighbour search is brute force. Ties are broken toward the smaller point index,
//! so every query is deterministic.

use crate::error::{param, Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::io::{Read, Write};

/// Dataset name and ground-truth intrinsic dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudMeta {
    pub name: String,
    pub intrinsic_dim: usize,
}

/// `N x D` sample stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    data: Vec<f64>,
    n: usize,
    dim: usize,
    pub meta: Option<CloudMeta>,
}

impl PointCloud {
    /// Cloud from row-major data. Requires `n >= 1`, `dim >= 1`, finite coordinates.
    pub fn new(data: Vec<f64>, n: usize, dim: usize) -> Result<Self> {
        if n == 0 || dim == 0 {
            return Err(param("point cloud needs N >= 1 and D >= 1"));
        }
        if data.len() != n * dim {
            return Err(param(format!("expected {} coordinates, got {}", n * dim, data.len())));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(param(format!("non-finite coordinate in row {}", pos / dim)));
        }
        Ok(Self { data, n, dim, meta: None })
    }

    /// Cloud from a list of equal-length rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(param("rows have different lengths"));
        }
        Self::new(rows.concat(), rows.len(), dim)
    }

    pub fn with_meta(mut self, name: impl Into<String>, intrinsic_dim: usize) -> Self {
        self.meta = Some(CloudMeta { name: name.into(), intrinsic_dim });
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Euclidean distance between rows `i` and `j`.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        euclid(self.row(i), self.row(j))
    }

    /// Sub-cloud made of the listed rows, in order.
    pub fn select(&self, idx: &[usize]) -> PointCloud {
        let mut data = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        PointCloud { data, n: idx.len(), dim: self.dim, meta: self.meta.clone() }
    }

    /// Applies `f` to every coordinate.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> PointCloud {
        PointCloud { data: self.data.iter().map(|v| f(*v)).collect(), ..self.clone() }
    }

    /// Number of points whose nearest other point is at distance zero.
    pub fn duplicate_count(&self) -> usize {
        (0..self.n).filter(|&i| (0..self.n).any(|j| j != i && self.row(i) == self.row(j))).count()
    }

    /// Reads a CSV with header `x0,...,x{D-1}`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let dim = rdr.headers()?.len();
        let mut data = Vec::new();
        let mut n = 0;
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != dim {
                return Err(Error::Parse(format!("row {n} has {} fields, expected {dim}", rec.len())));
            }
            for field in rec.iter() {
                data.push(field.trim().parse::<f64>().map_err(|e| Error::Parse(format!("row {n}: {e}")))?);
            }
            n += 1;
        }
        Self::new(data, n, dim)
    }

    /// Writes a CSV with header `x0,...,x{D-1}`; values round-trip exactly.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record((0..self.dim).map(|j| format!("x{j}")))?;
        for i in 0..self.n {
            w.write_record(self.row(i).iter().map(|v| format!("{v:?}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Euclidean distance with a fixed summation order, so `d(a,b)` and `d(b,a)` are bit-equal.
pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Symmetric `N x N` distance matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub n: usize,
    pub values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// All pairwise distances; each unordered pair is computed once.
pub fn pairwise_distances(cloud: &PointCloud) -> DistanceMatrix {
    let n = cloud.n();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = cloud.dist(i, j);
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    DistanceMatrix { n, values }
}

/// Per-point sorted nearest neighbours, self excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborIndex {
    pub k: usize,
    pub n: usize,
    ids: Vec<usize>,
    dists: Vec<f64>,
    /// Points whose nearest neighbour is at distance zero.
    pub duplicates: usize,
}

impl NeighborIndex {
    /// Neighbour ids of `p`, nearest first.
    pub fn ids(&self, p: usize) -> &[usize] {
        &self.ids[p * self.k..(p + 1) * self.k]
    }

    /// Neighbour distances `r_1(p) ..= r_k(p)`.
    pub fn dists(&self, p: usize) -> &[f64] {
        &self.dists[p * self.k..(p + 1) * self.k]
    }

    /// `r_j(p)` with 1-based rank.
    pub fn r(&self, p: usize, rank: usize) -> f64 {
        self.dists[p * self.k + rank - 1]
    }

    /// Index restricted to the first `k` neighbours.
    pub fn truncate(&self, k: usize) -> NeighborIndex {
        assert!(k <= self.k);
        let mut ids = Vec::with_capacity(self.n * k);
        let mut dists = Vec::with_capacity(self.n * k);
        for p in 0..self.n {
            ids.extend_from_slice(&self.ids(p)[..k]);
            dists.extend_from_slice(&self.dists(p)[..k]);
        }
        NeighborIndex { k, n: self.n, ids, dists, duplicates: self.duplicates }
    }

    /// Median of `r_k` over all points.
    pub fn median_rk(&self, rank: usize) -> f64 {
        let v: Vec<f64> = (0..self.n).map(|p| self.r(p, rank)).collect();
        crate::stats::median(&v)
    }
}

/// The `k` nearest others of row `i` among `candidates`, ordered by `(distance, index)`.
fn nearest_among(cloud: &PointCloud, i: usize, candidates: impl Iterator<Item = usize>, k: usize) -> Vec<(f64, usize)> {
    let xi = cloud.row(i);
    let mut all: Vec<(f64, usize)> =
        candidates.filter(|&j| j != i).map(|j| (euclid(xi, cloud.row(j)), j)).collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < all.len() {
        all.select_nth_unstable_by(k, cmp);
        all.truncate(k);
    }
    all.sort_unstable_by(cmp);
    all
}

/// Exact `k` nearest neighbours of every point. Requires `1 <= k <= N - 1`.
pub fn knn_query(cloud: &PointCloud, k: usize) -> Result<NeighborIndex> {
    let n = cloud.n();
    if k == 0 || k >= n {
        return Err(param(format!("k = {k} must satisfy 1 <= k <= N - 1 = {}", n.saturating_sub(1))));
    }
    let mut ids = Vec::with_capacity(n * k);
    let mut dists = Vec::with_capacity(n * k);
    let mut duplicates = 0;
    for i in 0..n {
        let nb = nearest_among(cloud, i, 0..n, k);
        if nb[0].0 == 0.0 {
            duplicates += 1;
        }
        for (d, j) in nb {
            ids.push(j);
            dists.push(d);
        }
    }
    Ok(NeighborIndex { k, n, ids, dists, duplicates })
}

/// Number of points at distance strictly below `eps` from `p`, excluding `p`.
pub fn eps_ball_count(cloud: &PointCloud, p: usize, eps: f64) -> usize {
    eps_neighbors(cloud, p, eps).len()
}

/// Ids of points at distance strictly below `eps` from `p`, excluding `p`.
pub fn eps_neighbors(cloud: &PointCloud, p: usize, eps: f64) -> Vec<usize> {
    let xp = cloud.row(p);
    (0..cloud.n()).filter(|&j| j != p && euclid(xp, cloud.row(j)) < eps).collect()
}

/// Ratio `rho_{i,j}(p) = r_i(p) / r_j(p)` with 1-based ranks.
pub fn distance_ratio(index: &NeighborIndex, p: usize, i: usize, j: usize) -> Result<f64> {
    if i == 0 || j == 0 || i > index.k || j > index.k {
        return Err(param(format!("ranks ({i}, {j}) outside 1..={}", index.k)));
    }
    let rj = index.r(p, j);
    if rj == 0.0 {
        return Err(Error::DegenerateRatio { point: p, rank: j });
    }
    Ok(index.r(p, i) / rj)
}

/// Directed unweighted kNN graph: edge `i -> j` iff `j` is among the `k` nearest of `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedKnnGraph {
    pub n: usize,
    pub k: usize,
    out: Vec<usize>,
}

impl DirectedKnnGraph {
    pub fn from_index(index: &NeighborIndex) -> Self {
        let out = (0..index.n).flat_map(|p| index.ids(p).iter().copied()).collect();
        Self { n: index.n, k: index.k, out }
    }

    pub fn out_edges(&self, i: usize) -> &[usize] {
        &self.out[i * self.k..(i + 1) * self.k]
    }
}

/// kNN graph with the same tie-breaking as [`knn_query`].
pub fn knn_graph(cloud: &PointCloud, k: usize) -> Result<DirectedKnnGraph> {
    Ok(DirectedKnnGraph::from_index(&knn_query(cloud, k)?))
}

/// Graph ball: vertices within `r` directed hops of `i` (including `i`); empty for `r = 0`.
///
/// `|B(i,1)| = k + 1` and `|B(i,2)| <= k(k+1) + 1`. Returned sorted.
pub fn graph_ball(graph: &DirectedKnnGraph, i: usize, r: usize) -> Vec<usize> {
    if r == 0 {
        return Vec::new();
    }
    let mut depth = vec![usize::MAX; graph.n];
    depth[i] = 0;
    let mut queue = VecDeque::from([i]);
    let mut ball = vec![i];
    while let Some(v) = queue.pop_front() {
        if depth[v] == r {
            continue;
        }
        for &w in graph.out_edges(v) {
            if depth[w] == usize::MAX {
                depth[w] = depth[v] + 1;
                ball.push(w);
                queue.push_back(w);
            }
        }
    }
    ball.sort_unstable();
    ball
}
