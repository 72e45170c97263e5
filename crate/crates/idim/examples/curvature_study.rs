//! Pointwise estimates on paraboloids and the torus overestimation CDF.
//!
//! `cargo run --release --example curvature_study`

use idim::harness::{curvature_paraboloid, curvature_torus, paraboloid_area, ParaboloidConfig, TorusConfig};

fn main() -> idim::Result<()> {
    let cfg = ParaboloidConfig { bs: vec![0.5, 1.0, 2.0], runs: 5, ..Default::default() };
    for &b in &cfg.bs {
        println!("b = {b}: area {:.4}", paraboloid_area(b));
    }
    let (_, counts) = curvature_paraboloid(&cfg, 2)?;
    for c in counts {
        println!(
            "b = {} sign {:+}: curvature {:+.2}, k giving 2: {:.1} +- {:.1} of {}, largest {:.0}",
            c.b,
            c.sign,
            c.curvature_y,
            c.mean_count,
            c.std_count,
            cfg.ks.len(),
            c.mean_largest_k
        );
    }
    let torus = curvature_torus(&TorusConfig { n: 3000, ..Default::default() }, 2)?;
    println!(
        "torus: {} of {} points overestimated, KS D = {:.4}, p = {:.3}",
        torus.overestimated, torus.n, torus.ks_statistic, torus.ks_pvalue
    );
    Ok(())
}
