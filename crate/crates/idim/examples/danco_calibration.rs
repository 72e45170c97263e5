//! DANCo against cached ball and sphere calibration tables.
//!
//! `cargo run --release --example danco_calibration`

use idim::bench::{generate, DatasetSpec};
use idim::parametric::danco::{danco_estimate, danco_stats, Calibration, CalibrationCache};
use std::time::Instant;

fn main() -> idim::Result<()> {
    let cache = CalibrationCache::default();
    for d in [3, 6, 9] {
        let cloud = generate(&DatasetSpec::Sphere { d, ambient: 2 * d - 1 }, 1000, 5)?;
        let (stats, _) = danco_stats(&cloud, 10, 20)?;
        let start = Instant::now();
        let ball = danco_estimate(&cloud, 10, 20, Calibration::Ball, &cache, 0)?;
        let sphere = danco_estimate(&cloud, 10, 20, Calibration::Sphere, &cache, 0)?;
        println!(
            "S^{d}: d_ml {:.3}  ball-calibrated {}  sphere-calibrated {}  ({:.1?})",
            stats.dhat,
            ball.estimate,
            sphere.estimate,
            start.elapsed()
        );
    }
    Ok(())
}
