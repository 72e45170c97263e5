//! Benchmark manifolds and the two corruption protocols.
//!
//! `cargo run --release --example generate_and_corrupt`

use idim::bench::{add_gaussian_noise, add_outliers, generate, Benchmark, DatasetSpec};

fn main() -> idim::Result<()> {
    for b in Benchmark::ALL {
        let (d, ambient) = b.dims();
        let c = generate(&DatasetSpec::Named(b), 625, 0)?;
        println!("{:<24} d = {d:>2}  ambient = {ambient:>3}  rows = {}", b.name(), c.n());
    }
    let clean = generate(&DatasetSpec::Sphere { d: 6, ambient: 11 }, 1000, 1)?;
    let noisy = add_gaussian_noise(&clean, 0.1, 2)?;
    let shift: f64 = (0..clean.n()).map(|i| idim::geometry::euclid(clean.row(i), noisy.row(i))).sum::<f64>() / clean.n() as f64;
    println!("sigma^2 = 0.1: mean displacement {shift:.3}");
    let dirty = add_outliers(&clean, 125, 3)?;
    let moved = (0..clean.n()).filter(|&i| clean.row(i) != dirty.row(i)).count();
    println!("125 outliers requested, {moved} rows moved");
    let mut out = Vec::new();
    generate(&DatasetSpec::Torus { big_r: 2.0, r: 1.0 }, 3, 0)?.write_csv(&mut out)?;
    print!("{}", String::from_utf8_lossy(&out));
    Ok(())
}
