//! Local PCA with every eigenvalue threshold rule.
//!
//! `cargo run --release --example lpca_thresholds`

use idim::bench::{generate, Benchmark, DatasetSpec};
use idim::stats::Aggregation;
use idim::tangential::{lpca_estimate, Neighborhood, ThresholdMethod};

fn main() -> idim::Result<()> {
    let methods = [
        ThresholdMethod::FO,
        ThresholdMethod::FAN,
        ThresholdMethod::MaxGap,
        ThresholdMethod::RATIO,
        ThresholdMethod::ParticipationRatio,
        ThresholdMethod::KAISER,
        ThresholdMethod::BrokenStick,
    ];
    for b in [Benchmark::M1Sphere, Benchmark::M7Roll, Benchmark::M10aCubic] {
        let cloud = generate(&DatasetSpec::Named(b), 2500, 0)?;
        print!("{:<16} d = {:>2}:", b.name(), b.dims().0);
        for m in &methods {
            let r = lpca_estimate(&cloud, Neighborhood::Knn(40), m, Aggregation::Mean)?;
            print!("  {} {:.2}", m.name(), r.estimate);
        }
        println!();
    }
    Ok(())
}
