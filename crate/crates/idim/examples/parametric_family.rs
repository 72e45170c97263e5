//! Distance and angle based estimators on one sample, through the registry.
//!
//! `cargo run --release --example parametric_family -- [d] [n]`

use idim::api::{run_estimator, EstimatorConfig};
use idim::bench::{generate, DatasetSpec};

fn main() -> idim::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let d: usize = args.first().map_or(5, |s| s.parse().expect("d"));
    let n: usize = args.get(1).map_or(2000, |s| s.parse().expect("n"));
    let cloud = generate(&DatasetSpec::sphere(d), n, 11)?;
    let configs = [
        EstimatorConfig::new("mle"),
        EstimatorConfig::new("mle").with("corrected", 1.0).with("agg", "hmean"),
        EstimatorConfig::new("tle"),
        EstimatorConfig::new("twonn"),
        EstimatorConfig::new("gride"),
        EstimatorConfig::new("mind_ml"),
        EstimatorConfig::new("ess"),
        EstimatorConfig::new("corrint"),
        EstimatorConfig::new("packing"),
        EstimatorConfig::new("idea"),
        EstimatorConfig::new("pettis"),
    ];
    println!("S^{d}, N = {n}");
    for cfg in &configs {
        let r = run_estimator(&cloud, cfg)?;
        println!("  {:<8} {:<28} {:>7.3} {:?}", cfg.estimator, cfg.param_label(), r.estimate, r.flags);
    }
    Ok(())
}
