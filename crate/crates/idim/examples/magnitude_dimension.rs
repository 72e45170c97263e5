//! Magnitude function of a sphere sample and the slope of its linear region.
//!
//! `cargo run --release --example magnitude_dimension -- [d] [n] [seed]`

use idim::api::{run_estimator, EstimatorConfig};
use idim::bench::{generate, DatasetSpec};
use std::time::Instant;

fn main() -> idim::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let d: usize = args.first().map_or(Ok(2), |s| s.parse()).expect("d");
    let n: usize = args.get(1).map_or(Ok(1000), |s| s.parse()).expect("n");
    let seed: u64 = args.get(2).map_or(Ok(0), |s| s.parse()).expect("seed");
    let cloud = generate(&DatasetSpec::sphere(d), n, seed)?;
    let start = Instant::now();
    let report = run_estimator(&cloud, &EstimatorConfig::new("magnitude"))?;
    println!("S^{d}, N = {n}: magnitude dimension {:.4} ({:.1?})", report.estimate, start.elapsed());
    for (k, v) in &report.diagnostics {
        println!("  {k} = {v:.4}");
    }
    println!("  flags: {:?}", report.flags);
    Ok(())
}
