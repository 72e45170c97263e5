//! Experiment protocols: benchmark sweeps, hyperparameter selection, noise and curvature studies.

pub mod curvature;
pub mod noise;
pub mod select;
pub mod sweep;

pub use curvature::{curvature_paraboloid, curvature_torus, paraboloid_area, ParaboloidConfig, TorusConfig};
pub use noise::{noise_experiment, NoiseConfig, NoiseKind, NoiseRow};
pub use select::{hyperparam_select, SelectionRow};
pub use sweep::{bench_run, EstimatorGrid, ResultRow, ResultTable, SweepConfig};

use std::thread;

/// Maps `f` over `0..n` on up to `jobs` threads; results keep index order.
pub fn parallel_map<T: Send>(n: usize, jobs: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let jobs = jobs.clamp(1, n.max(1));
    if jobs == 1 {
        return (0..n).map(&f).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut parts: Vec<(usize, T)> = thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|_| {
                s.spawn(|| {
                    let mut out = Vec::new();
                    loop {
                        let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        if i >= n {
                            break;
                        }
                        out.push((i, f(i)));
                    }
                    out
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });
    parts.sort_by_key(|p| p.0);
    parts.into_iter().map(|p| p.1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_keeps_order() {
        let a = parallel_map(50, 1, |i| i * i);
        let b = parallel_map(50, 4, |i| i * i);
        assert_eq!(a, b);
        assert_eq!(b[7], 49);
    }
}
