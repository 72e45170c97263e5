//! Lens-fraction (WODCap) and doubling estimators with their saturation bounds.
//!
//! `cargo run --release --example lens_and_doubling`

use idim::bench::{generate, DatasetSpec};
use idim::parametric::doubling::{doubling_bound, doubling_estimate};
use idim::parametric::wodcap::{wodcap_bound, wodcap_estimate, Lens};
use idim::stats::Aggregation;

fn main() -> idim::Result<()> {
    let k = 20;
    println!("bounds at k = {k}: wodcap {:.2}  doubling {:.2}", wodcap_bound(k), doubling_bound(k));
    for d in [1, 2, 4, 8] {
        let cloud = generate(&DatasetSpec::Cube { d }, 3000, 8)?;
        let metric = wodcap_estimate(&cloud, k, Aggregation::Median, Lens::Metric)?;
        let graph = wodcap_estimate(&cloud, k, Aggregation::Median, Lens::Graph)?;
        let dbl = doubling_estimate(&cloud, k)?;
        println!(
            "cube d = {d}: wodcap metric {:.2}  graph {:.2}  doubling {:.2} {:?}",
            metric.estimate, graph.estimate, dbl.estimate, dbl.flags
        );
    }
    Ok(())
}
