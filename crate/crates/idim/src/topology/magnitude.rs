//! Magnitude of finite metric spaces and the magnitude dimension.

use crate::api::{EstimateReport, Flag};
use crate::error::{param, Error, Result};
use crate::geometry::{knn_query, pairwise_distances, DistanceMatrix, PointCloud};
use crate::stats::ols;
use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use std::io::Write;

/// Squared Cholesky pivots below this fraction of the largest are rejected.
pub const PIVOT_FLOOR: f64 = 1e-12;

/// Flushes subnormal results to zero on the current thread until dropped; the
/// factorisation at large scales otherwise spends most of its time on subnormals.
struct FlushSubnormals {
    #[cfg(target_arch = "x86_64")]
    saved: u32,
}

impl FlushSubnormals {
    #[allow(deprecated)]
    fn new() -> Self {
        #[cfg(target_arch = "x86_64")]
        {
            use std::arch::x86_64::{_mm_getcsr, _mm_setcsr};
            // SAFETY: only the FTZ (bit 15) and DAZ (bit 6) flags change; restored on drop
            unsafe {
                let saved = _mm_getcsr();
                _mm_setcsr(saved | 0x8040);
                Self { saved }
            }
        }
        #[cfg(not(target_arch = "x86_64"))]
        Self {}
    }
}

impl Drop for FlushSubnormals {
    #[allow(deprecated)]
    fn drop(&mut self) {
        #[cfg(target_arch = "x86_64")]
        // SAFETY: restores the control word read in `new`
        unsafe {
            std::arch::x86_64::_mm_setcsr(self.saved)
        }
    }
}

/// `|tX| = sum_ij (Z^{-1})_ij` with `Z_ij = exp(-t d(x_i, x_j))`, via a Cholesky solve of `Z w = 1`.
pub fn magnitude(cloud: &PointCloud, t: f64) -> Result<f64> {
    magnitude_from_distances(&pairwise_distances(cloud), t)
}

/// [`magnitude`] on precomputed distances; only the lower triangle of `Z` is formed.
pub fn magnitude_from_distances(dist: &DistanceMatrix, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(param("magnitude scale must be > 0"));
    }
    let n = dist.n;
    let mut z = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        let col = dist.row(j);
        for i in j..n {
            z[(i, j)] = (-t * col[i]).exp();
        }
    }
    let _flush = FlushSubnormals::new();
    let llt = z.llt(Side::Lower).map_err(|e| match e {
        faer::linalg::cholesky::llt::factor::LltError::NonPositivePivot { index } => {
            Error::Conditioning { index, pivot: 0.0 }
        }
    })?;
    let l = llt.L();
    let diag: Vec<f64> = (0..n).map(|i| l[(i, i)] * l[(i, i)]).collect();
    let (imin, pmin) = diag.iter().enumerate().fold((0, f64::INFINITY), |a, (i, v)| if *v < a.1 { (i, *v) } else { a });
    let pmax = diag.iter().copied().fold(0.0, f64::max);
    if pmin < PIVOT_FLOOR * pmax {
        return Err(Error::Conditioning { index: imin, pivot: pmin });
    }
    let w = llt.solve(Mat::<f64>::from_fn(n, 1, |_, _| 1.0));
    Ok((0..n).map(|i| w[(i, 0)]).sum())
}

/// Sampled magnitude function `t -> |tX|`.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeCurve {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl MagnitudeCurve {
    /// CSV with header `t,magnitude`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "magnitude"])?;
        for (t, v) in self.t.iter().zip(&self.values) {
            w.write_record([format!("{t:?}"), format!("{v:?}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Magnitude at every scale in `t_grid`.
pub fn magnitude_function(cloud: &PointCloud, t_grid: &[f64]) -> Result<MagnitudeCurve> {
    let dist = pairwise_distances(cloud);
    let values = t_grid.iter().map(|&t| magnitude_from_distances(&dist, t)).collect::<Result<Vec<_>>>()?;
    Ok(MagnitudeCurve { t: t_grid.to_vec(), values })
}

/// Log-spaced scale grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeGrid {
    pub values: Vec<f64>,
}

impl MagnitudeGrid {
    pub fn logspace(tmin: f64, tmax: f64, steps: usize) -> Result<Self> {
        if !(tmin > 0.0 && tmax > tmin) || steps < 2 {
            return Err(param("scale grid needs 0 < tmin < tmax and at least two steps"));
        }
        let (a, b) = (tmin.ln(), tmax.ln());
        Ok(Self { values: (0..steps).map(|i| (a + (b - a) * i as f64 / (steps - 1) as f64).exp()).collect() })
    }

    /// Grid from `0.05 t*` to `50 t*` with `t* = 1 / median r_1`, unless explicit ends are given
    /// (a zero end means the default).
    pub fn resolve(cloud: &PointCloud, tmin: f64, tmax: f64, steps: usize) -> Result<Self> {
        let t_star = if tmin == 0.0 || tmax == 0.0 {
            let r1 = knn_query(cloud, 1)?.median_rk(1);
            if !(r1 > 0.0) {
                return Err(Error::Degenerate("median nearest-neighbour distance is zero".into()));
            }
            1.0 / r1
        } else {
            f64::NAN
        };
        let lo = if tmin == 0.0 { 0.05 * t_star } else { tmin };
        let hi = if tmax == 0.0 { 50.0 * t_star } else { tmax };
        Self::logspace(lo, hi, steps)
    }
}

/// Central second differences of `y` against `x` at interior points (non-uniform spacing).
pub fn second_differences(x: &[f64], y: &[f64]) -> Vec<f64> {
    (1..x.len() - 1)
        .map(|i| {
            let (h1, h2) = (x[i] - x[i - 1], x[i + 1] - x[i]);
            2.0 * ((y[i + 1] - y[i]) / h2 - (y[i] - y[i - 1]) / h1) / (h1 + h2)
        })
        .collect()
}

/// Shortest accepted linear region.
pub const MIN_LINEAR_RUN: usize = 5;

/// Window around the steepest interior point: grows one point at a time toward the flatter
/// side while `|y''| < threshold`, and unconditionally until it spans `MIN_LINEAR_RUN` points.
/// Returns the inclusive range and whether padding past the threshold was needed.
pub fn linear_region(x: &[f64], y: &[f64], threshold: f64) -> Option<(usize, usize, bool)> {
    let n = x.len();
    if n < MIN_LINEAR_RUN + 2 {
        return None;
    }
    let dd = second_differences(x, y);
    // curvature at point i is dd[i - 1], for 1 <= i <= n - 2
    let curv = |i: usize| dd[i - 1].abs();
    let slope = |i: usize| (y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]);
    let mut c = 1;
    for i in 2..n - 1 {
        if slope(i) > slope(c) {
            c = i;
        }
    }
    let (mut a, mut b) = (c, c);
    let mut padded = curv(c) >= threshold;
    loop {
        let left = (a > 1).then(|| curv(a - 1));
        let right = (b < n - 2).then(|| curv(b + 1));
        let go_left = match (left, right) {
            (Some(l), Some(r)) => l <= r,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        let v = if go_left { left.unwrap() } else { right.unwrap() };
        let short = b - a + 1 < MIN_LINEAR_RUN;
        if v >= threshold && !short {
            break;
        }
        padded |= v >= threshold;
        if go_left {
            a -= 1;
        } else {
            b += 1;
        }
    }
    (b - a + 1 >= MIN_LINEAR_RUN).then_some((a, b, padded))
}

/// Slope of `log |tX|` against `log t` on its linear region.
pub fn magnitude_dimension(cloud: &PointCloud, t_grid: &[f64], curvature_threshold: f64) -> Result<EstimateReport> {
    if t_grid.len() < 20 {
        return Err(param("magnitude dimension needs at least 20 scales"));
    }
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(param("scales must be increasing"));
    }
    let curve = magnitude_function(cloud, t_grid)?;
    let x: Vec<f64> = curve.t.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = curve.values.iter().map(|v| v.ln()).collect();
    let (a, b, padded) = linear_region(&x, &y, curvature_threshold)
        .ok_or(Error::NoLinearRegion { min_len: MIN_LINEAR_RUN, threshold: curvature_threshold })?;
    let fit = ols(&x[a..=b], &y[a..=b])?;
    let n = cloud.n() as f64;
    let mut report = EstimateReport::new(fit.slope);
    report
        .diag("t_start", curve.t[a])
        .diag("t_end", curve.t[b])
        .diag("run_length", (b - a + 1) as f64)
        .diag("residual", fit.rms_residual)
        .diag("saturation_end", curve.values[b] / n)
        .diag("saturation_max", curve.values.last().copied().unwrap_or(0.0) / n);
    if padded || a == 1 || b == x.len() - 2 || curve.values.last().is_some_and(|v| *v < 0.9 * n) {
        report.flag(Flag::Approximate);
    }
    Ok(report)
}
