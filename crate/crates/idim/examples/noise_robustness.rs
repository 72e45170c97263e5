//! Gaussian noise and outlier robustness with tuning on the clean data.
//!
//! `cargo run --release --example noise_robustness`

use idim::api::ParamValue;
use idim::harness::noise::write_noise_csv;
use idim::harness::{noise_experiment, EstimatorGrid, NoiseConfig};

fn main() -> idim::Result<()> {
    let mut config = NoiseConfig::new(vec![
        EstimatorGrid::new("mle").with("k", vec![ParamValue::Num(5.0), ParamValue::Num(20.0)]),
        EstimatorGrid::new("twonn"),
    ]);
    config.n = 1000;
    config.runs = 3;
    let rows = noise_experiment(&config, 2)?;
    write_noise_csv(&rows, std::io::stdout())
}
