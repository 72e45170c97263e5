//! Estimators from metric invariants: MST alpha-weights, kNN graph length, magnitude.

pub mod growth;
pub mod magnitude;
pub mod mst;

pub use growth::{knn_dimension, knn_total_length, ph0_dimension, SubsampleSchedule};
pub use magnitude::{magnitude, magnitude_dimension, magnitude_from_distances, magnitude_function, MagnitudeCurve, MagnitudeGrid};
pub use mst::{alpha_weight, minimum_spanning_tree, mst_of_cloud, WeightedTree};
