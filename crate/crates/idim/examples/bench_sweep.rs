//! A small benchmark sweep from a TOML configuration, then hyperparameter selection.
//!
//! `cargo run --release --example bench_sweep`

use idim::harness::select::write_selection_csv;
use idim::harness::{bench_run, hyperparam_select, SweepConfig};

const CONFIG: &str = r#"
datasets = ["M1_Sphere", "M5a_Helix1d", "M7_Roll", "sphere:4:6"]
sample_sizes = [500]
runs = 3
seed = 1

[[estimator]]
id = "mle"
[estimator.grid]
k = [5, 10, 20]

[[estimator]]
id = "twonn"
"#;

fn main() -> idim::Result<()> {
    let config = SweepConfig::from_toml(CONFIG)?;
    let table = bench_run(&config, 2)?;
    table.write_csv(std::io::stdout())?;
    println!();
    let selection = hyperparam_select(&table, &table.truth())?;
    write_selection_csv(&selection, std::io::stdout())
}
