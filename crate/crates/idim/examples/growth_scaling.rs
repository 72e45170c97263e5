//! MST alpha-weight and kNN-graph length scaling under subsampling.
//!
//! `cargo run --release --example growth_scaling`

use idim::bench::{generate, DatasetSpec};
use idim::topology::{knn_dimension, ph0_dimension, SubsampleSchedule};

fn main() -> idim::Result<()> {
    for d in [1, 2, 3, 5] {
        let cloud = generate(&DatasetSpec::Cube { d }, 2000, 3)?;
        let ph0 = ph0_dimension(&cloud, 1.0, &SubsampleSchedule::standard(0))?;
        let knn = knn_dimension(&cloud, 1, &SubsampleSchedule::standard(0))?;
        println!("cube d = {d}: ph0 {:.3}  knn {:.3}", ph0.estimate, knn.estimate);
    }
    Ok(())
}
