//! Intrinsic dimension estimation.
//!
//! The crate is organised by estimator family:
//!
//! - [`geometry`]: point clouds, exact nearest-neighbour search, kNN graphs.
//! - [`bench`]: benchmark manifold generators and corruption protocols.
//! - [`tangential`]: local PCA with pluggable eigenvalue thresholds, conical dimension.
//! - [`parametric`]: distance, count and angle based estimators (MLE, TLE, TwoNN,
//!   GRIDE, MiND_ML, DANCo, ESS, CorrInt, packing, doubling, WODCap, IDEA, Pettis).
//! - [`topology`]: MST / PH0 alpha-weight scaling, kNN-graph length scaling, magnitude.
//! - [`api`]: estimator registry, configuration schema and JSON reports.
//! - [`harness`]: benchmark sweeps, hyperparameter selection, noise and curvature protocols.
//!
//! ```
//! use idim::bench::{generate, DatasetSpec};
//! use idim::api::{run_estimator, EstimatorConfig};
//!
//! let cloud = generate(&DatasetSpec::sphere(2), 500, 7).unwrap();
//! let cfg = EstimatorConfig::new("mle").with("k", 10.0).with("agg", "median");
//! let report = run_estimator(&cloud, &cfg).unwrap();
//! assert!((report.estimate - 2.0).abs() < 0.5);
//! ```

pub mod api;
pub mod bench;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod parametric;
pub mod rng;
pub mod special;
pub mod stats;
pub mod tangential;
pub mod topology;

pub use error::{Error, Result};
pub use geometry::PointCloud;
