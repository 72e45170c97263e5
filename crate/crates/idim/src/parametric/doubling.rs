//! Doubling ratio of kNN graph balls.

use crate::api::{EstimateReport, Flag};
use crate::error::Result;
use crate::geometry::{graph_ball, knn_graph, PointCloud};
use crate::stats::mean;

/// Upper bound `log2(k + 1/(k+1))` of the doubling estimate.
pub fn doubling_bound(k: usize) -> f64 {
    let k = k as f64;
    (k + 1.0 / (k + 1.0)).log2()
}

/// Mean over points of `log2(|B(i,2)| / |B(i,1)|)` in the directed kNN graph.
pub fn doubling_estimate(cloud: &PointCloud, k: usize) -> Result<EstimateReport> {
    let g = knn_graph(cloud, k)?;
    let locals: Vec<f64> = (0..cloud.n())
        .map(|i| (graph_ball(&g, i, 2).len() as f64 / graph_ball(&g, i, 1).len() as f64).log2())
        .collect();
    let estimate = mean(&locals);
    let bound = doubling_bound(k);
    let mut report = EstimateReport::new(estimate).with_locals(locals);
    report.diag("bound", bound);
    if estimate >= bound - 1e-12 {
        report.flag(Flag::Throttled);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{generate, DatasetSpec};

    #[test]
    fn integer_line_interior() {
        let c = PointCloud::from_rows(&(0..20).map(|i| vec![i as f64]).collect::<Vec<_>>()).unwrap();
        let r = doubling_estimate(&c, 2).unwrap();
        let l = r.locals.unwrap();
        assert!((l[10] - (5.0f64 / 3.0).log2()).abs() < 1e-15);
        assert!((l[10] - 0.737).abs() < 1e-3);
    }

    #[test]
    fn saturated_graph_is_zero() {
        let c = generate(&DatasetSpec::sphere(2), 12, 1).unwrap();
        assert_eq!(doubling_estimate(&c, 11).unwrap().estimate, 0.0);
    }

    #[test]
    fn bound_holds() {
        for k in [1, 3, 10] {
            let c = generate(&DatasetSpec::Cube { d: 5 }, 300, k as u64).unwrap();
            let r = doubling_estimate(&c, k).unwrap();
            assert!(r.locals.unwrap().iter().all(|v| *v <= doubling_bound(k) + 1e-12));
        }
    }
}
