//! Minimum spanning trees and alpha-weights.

use crate::error::{param, Result};
use crate::geometry::{DistanceMatrix, PointCloud};

/// Spanning tree as `(i, j, length)` edges with `i < j`, in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTree {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl WeightedTree {
    pub fn total(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }
}

/// Prim's algorithm on an implicit complete graph; ties go to the lexicographically
/// smallest edge `(min, max)`, which makes the tree unique.
fn prim(n: usize, dist: impl Fn(usize, usize) -> f64) -> Result<WeightedTree> {
    if n < 2 {
        return Err(param("a spanning tree needs at least two points"));
    }
    let key = |u: usize, v: usize| (u.min(v), u.max(v));
    let mut in_tree = vec![false; n];
    let mut best = vec![(f64::INFINITY, usize::MAX); n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut cur = 0;
    in_tree[0] = true;
    for _ in 1..n {
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let d = dist(cur, v);
            if !d.is_finite() {
                return Err(param(format!("non-finite distance between {cur} and {v}")));
            }
            let (bd, bp) = best[v];
            if d < bd || (d == bd && key(cur, v) < key(bp, v)) {
                best[v] = (d, cur);
            }
        }
        let mut next = usize::MAX;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            if next == usize::MAX {
                next = v;
                continue;
            }
            let (a, b) = (best[v], best[next]);
            if a.0 < b.0 || (a.0 == b.0 && key(a.1, v) < key(b.1, next)) {
                next = v;
            }
        }
        let (d, p) = best[next];
        let (i, j) = key(p, next);
        edges.push((i, j, d));
        in_tree[next] = true;
        cur = next;
    }
    Ok(WeightedTree { n, edges })
}

/// MST of a distance matrix.
pub fn minimum_spanning_tree(distances: &DistanceMatrix) -> Result<WeightedTree> {
    prim(distances.n, |i, j| distances.get(i, j))
}

/// MST of a cloud, computing distances on the fly.
pub fn mst_of_cloud(cloud: &PointCloud) -> Result<WeightedTree> {
    prim(cloud.n(), |i, j| cloud.dist(i, j))
}

/// `E_alpha = sum of edge length^alpha`.
pub fn alpha_weight(tree: &WeightedTree, alpha: f64) -> f64 {
    tree.edges.iter().map(|e| e.2.powf(alpha)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pairwise_distances;

    fn line(xs: &[f64]) -> PointCloud {
        PointCloud::from_rows(&xs.iter().map(|x| vec![*x]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn line_examples() {
        let t = mst_of_cloud(&line(&[0.0, 1.0, 3.0])).unwrap();
        assert_eq!(t.edges, vec![(0, 1, 1.0), (1, 2, 2.0)]);
        assert_eq!(alpha_weight(&t, 1.0), 3.0);
        assert_eq!(alpha_weight(&t, 2.0), 5.0);
        let t2 = mst_of_cloud(&line(&[0.0, 2.0])).unwrap();
        assert_eq!(t2.edges, vec![(0, 1, 2.0)]);
        assert!(mst_of_cloud(&line(&[0.0])).is_err());
    }

    #[test]
    fn unit_edges_and_small_alpha() {
        let t = mst_of_cloud(&line(&[0.0, 1.0, 2.0, 3.0])).unwrap();
        for a in [0.3, 1.0, 4.0] {
            assert_eq!(alpha_weight(&t, a), 3.0);
        }
        let t = mst_of_cloud(&line(&[0.0, 0.2, 3.0, 7.5])).unwrap();
        assert!((alpha_weight(&t, 1e-8) - 3.0).abs() < 1e-6);
    }

    #[test]
    fn ties_are_lexicographic() {
        // unit square: four edges of length 1, the MST takes (0,1), (0,2), (1,3)
        let c = PointCloud::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let mut e: Vec<(usize, usize)> = mst_of_cloud(&c).unwrap().edges.iter().map(|e| (e.0, e.1)).collect();
        e.sort();
        assert_eq!(e, vec![(0, 1), (0, 2), (1, 3)]);
        let m = minimum_spanning_tree(&pairwise_distances(&c)).unwrap();
        assert_eq!(m.total(), 3.0);
    }
}
