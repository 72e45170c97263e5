//! Conical dimension from maximal pairwise-obtuse direction sets.
//!
//! `cargo run --release --example conical_dimension`

use idim::bench::{generate, DatasetSpec};
use idim::stats::Aggregation;
use idim::tangential::{conical_dimension, max_obtuse_subset};

fn main() -> idim::Result<()> {
    let cross: Vec<Vec<f64>> = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0], vec![-0.6, -0.6]];
    println!("obtuse subset of a planar cross: {}", max_obtuse_subset(&cross, true, 0, 0));
    for d in [1, 2, 3] {
        let cloud = generate(&DatasetSpec::sphere(d), 800, 2)?;
        let r = conical_dimension(&cloud, 12, Aggregation::Median, 0)?;
        println!("S^{d}: conical dimension {:.2}", r.estimate);
    }
    Ok(())
}
