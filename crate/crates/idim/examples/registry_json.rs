//! The estimator registry, configuration validation and JSON reports.
//!
//! `cargo run --release --example registry_json`

use idim::api::{list_estimators, resolve, run_estimator, EstimatorConfig};
use idim::bench::{generate, DatasetSpec};

fn main() -> idim::Result<()> {
    for info in list_estimators() {
        let params: Vec<&str> = info.params.iter().map(|p| p.name).collect();
        println!("{:<10} {:<12} {}", info.id, info.family, params.join(","));
    }
    match resolve(&EstimatorConfig::new("mle").with("k", 0.0)) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    let cloud = generate(&DatasetSpec::sphere(3), 400, 0)?;
    let report = run_estimator(&cloud, &EstimatorConfig::new("lpca").with("k", 30.0))?;
    println!("{}", report.to_json()?);
    Ok(())
}
