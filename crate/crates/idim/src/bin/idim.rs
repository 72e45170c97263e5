//! Command-line front end.

use clap::{Args, Parser, Subcommand};
use idim::api::{list_estimators, run_estimator, EstimatorConfig, ParamValue};
use idim::bench::{add_gaussian_noise, add_outliers, generate, DatasetSpec};
use idim::harness::curvature::{LocalMethod, ParaboloidConfig, TorusConfig};
use idim::harness::noise::write_noise_csv;
use idim::harness::select::write_selection_csv;
use idim::harness::{
    bench_run, curvature_paraboloid, curvature_torus, hyperparam_select, noise_experiment, NoiseConfig, ResultTable,
    SweepConfig,
};
use idim::{Error, PointCloud, Result};
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "idim", version, about = "Intrinsic dimension estimation")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Output directory; stdout when absent.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Exit with 0 even if some runs failed.
    #[arg(long, global = true)]
    allow_failures: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// List registered estimators and their defaults.
    List,
    /// Sample a dataset and write it as CSV.
    Generate {
        /// Benchmark name or `sphere:d[:D]`, `so:n`, `torus:R:r`, `paraboloid:b:+|-`, `cube:d`, `ball:d`.
        #[arg(long)]
        dataset: String,
        #[arg(long, short)]
        n: usize,
    },
    /// Corrupt a CSV cloud with Gaussian noise or outliers.
    Corrupt {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        sigma2: Option<f64>,
        #[arg(long)]
        outliers: Option<usize>,
    },
    /// Run one estimator and print its JSON report.
    Estimate {
        /// CSV cloud; alternatively `--dataset` and `-n`.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        dataset: Option<String>,
        #[arg(long, short)]
        n: Option<usize>,
        #[arg(long, short)]
        estimator: String,
        /// Hyperparameter `key=value`, repeatable.
        #[arg(long = "param", short = 'p')]
        params: Vec<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        agg: Option<String>,
    },
    /// Run a benchmark sweep from a TOML config.
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
    /// Hyperparameter selection over a results CSV.
    Select {
        #[arg(long)]
        table: PathBuf,
    },
    /// Noise and outlier robustness study from a TOML config.
    Noise {
        #[arg(long)]
        config: PathBuf,
    },
    /// Curvature studies.
    Curvature {
        #[command(subcommand)]
        kind: CurvatureKind,
    },
}

#[derive(Subcommand)]
enum CurvatureKind {
    /// Pointwise estimates at the vertex of `z = 2x^2 +- y^2/b^2`.
    Paraboloid {
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.7, 1.0, 1.5, 2.0])]
        b: Vec<f64>,
        #[arg(long, default_value = "lpca")]
        method: String,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        #[arg(long, default_value_t = 10000)]
        base_n: usize,
    },
    /// CDF of overestimated points against the tube angle.
    Torus {
        #[arg(long, default_value_t = 20)]
        k: usize,
        #[arg(long, default_value = "mle")]
        method: String,
        #[arg(long, default_value_t = 10000)]
        n: usize,
    },
}

fn output(global: &Global, name: &str, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match &global.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(name);
            let mut f = io::BufWriter::new(File::create(&path)?);
            write(&mut f)?;
            f.flush()?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)
        }
    }
}

fn read_cloud(path: &Path) -> Result<PointCloud> {
    PointCloud::read_csv(BufReader::new(File::open(path)?))
}

fn run(cli: Cli) -> Result<usize> {
    let g = &cli.global;
    match cli.cmd {
        Cmd::List => {
            let json = serde_json::to_string_pretty(&list_estimators())?;
            output(g, "estimators.json", |w| Ok(writeln!(w, "{json}")?))?;
        }
        Cmd::Generate { dataset, n } => {
            let spec: DatasetSpec = dataset.parse()?;
            let cloud = generate(&spec, n, g.seed)?;
            output(g, "cloud.csv", |w| cloud.write_csv(w))?;
        }
        Cmd::Corrupt { input, sigma2, outliers } => {
            let cloud = read_cloud(&input)?;
            let out = match (sigma2, outliers) {
                (Some(s), None) => add_gaussian_noise(&cloud, s, g.seed)?,
                (None, Some(m)) => add_outliers(&cloud, m, g.seed)?,
                _ => return Err(Error::Param("give exactly one of --sigma2, --outliers".into())),
            };
            output(g, "corrupted.csv", |w| out.write_csv(w))?;
        }
        Cmd::Estimate { input, dataset, n, estimator, params, k, agg } => {
            let cloud = match (input, dataset, n) {
                (Some(p), None, _) => read_cloud(&p)?,
                (None, Some(d), Some(n)) => generate(&d.parse()?, n, g.seed)?,
                _ => return Err(Error::Param("give --input, or --dataset with -n".into())),
            };
            let mut cfg = EstimatorConfig::new(estimator);
            for p in &params {
                let (key, value) =
                    p.split_once('=').ok_or_else(|| Error::Param(format!("expected key=value, got '{p}'")))?;
                cfg.set(key.trim(), ParamValue::parse(value.trim()));
            }
            if let Some(k) = k {
                cfg.set("k", k);
            }
            if let Some(a) = agg {
                cfg.set("agg", a);
            }
            let report = run_estimator(&cloud, &cfg)?;
            let json = report.to_json()?;
            output(g, "estimate.json", |w| Ok(writeln!(w, "{json}")?))?;
        }
        Cmd::Bench { config } => {
            let mut cfg = SweepConfig::from_toml(&std::fs::read_to_string(config)?)?;
            cfg.seed ^= g.seed;
            let table = bench_run(&cfg, g.jobs)?;
            output(g, "results.csv", |w| table.write_csv(w))?;
            if g.out_dir.is_some() {
                let json = table.to_json()?;
                output(g, "results.json", |w| Ok(writeln!(w, "{json}")?))?;
            }
            return Ok(table.failures());
        }
        Cmd::Select { table } => {
            let t = ResultTable::read_csv(BufReader::new(File::open(table)?))?;
            let rows = hyperparam_select(&t, &t.truth())?;
            output(g, "selection.csv", |w| write_selection_csv(&rows, w))?;
        }
        Cmd::Noise { config } => {
            let mut cfg = NoiseConfig::from_toml(&std::fs::read_to_string(config)?)?;
            cfg.seed ^= g.seed;
            let rows = noise_experiment(&cfg, g.jobs)?;
            output(g, "noise.csv", |w| write_noise_csv(&rows, w))?;
            return Ok(rows.iter().map(|r| r.failures).sum());
        }
        Cmd::Curvature { kind: CurvatureKind::Paraboloid { b, method, runs, base_n } } => {
            let cfg = ParaboloidConfig {
                bs: b,
                runs,
                base_n,
                method: method.parse::<LocalMethod>()?,
                seed: g.seed,
                ..Default::default()
            };
            let (rows, counts) = curvature_paraboloid(&cfg, g.jobs)?;
            output(g, "paraboloid.csv", |w| write_rows(&rows, w))?;
            output(g, "paraboloid_counts.csv", |w| write_rows(&counts, w))?;
        }
        Cmd::Curvature { kind: CurvatureKind::Torus { k, method, n } } => {
            let cfg = TorusConfig { k, n, method: method.parse()?, seed: g.seed, ..Default::default() };
            let cdf = curvature_torus(&cfg, g.jobs)?;
            eprintln!(
                "{} of {} points overestimated; KS D = {:.4}, p = {:.4}",
                cdf.overestimated, cdf.n, cdf.ks_statistic, cdf.ks_pvalue
            );
            output(g, "torus_cdf.csv", |w| cdf.write_csv(w))?;
        }
    }
    Ok(0)
}

fn write_rows<T: serde::Serialize>(rows: &[T], w: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let allow = cli.global.allow_failures;
    match run(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failures) => {
            eprintln!("{failures} run(s) failed");
            if allow { ExitCode::SUCCESS } else { ExitCode::from(2) }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
