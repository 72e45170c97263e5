//! Expected norm of normalised neighbour distances, with an optional subsampling correction.

use crate::api::{EstimateReport, Flag};
use crate::error::{param, Error, Result};
use crate::geometry::{knn_query, PointCloud};
use crate::rng;
use rand::Rng;

/// Default subsampling probabilities of the jackknife correction.
pub const DEFAULT_P_GRID: [f64; 9] = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

/// `m = mean r_j / r_{k+1}` over points and `j = 1..=k`.
pub fn idea_mean_ratio(cloud: &PointCloud, k: usize) -> Result<f64> {
    let idx = knn_query(cloud, k + 1)?;
    let mut s = 0.0;
    let mut count = 0usize;
    for p in 0..cloud.n() {
        let r = idx.r(p, k + 1);
        if r == 0.0 {
            continue;
        }
        s += idx.dists(p)[..k].iter().map(|v| v / r).sum::<f64>();
        count += k;
    }
    if count == 0 {
        return Err(Error::Degenerate("all neighbourhoods collapse".into()));
    }
    Ok(s / count as f64)
}

/// `d = m / (1 - m)`.
pub fn idea_from_mean(m: f64) -> Result<f64> {
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::Degenerate(format!("mean ratio {m} outside (0, 1)")));
    }
    Ok(m / (1.0 - m))
}

/// Basic estimate.
pub fn idea_estimate(cloud: &PointCloud, k: usize) -> Result<EstimateReport> {
    if k < 1 {
        return Err(param("IDEA needs k >= 1"));
    }
    let m = idea_mean_ratio(cloud, k)?;
    let mut report = EstimateReport::new(idea_from_mean(m)?);
    report.diag("mean_ratio", m);
    Ok(report)
}

fn curve(a: &[f64; 4], x: f64) -> f64 {
    a[0] - a[1] / (x / a[2].exp() + a[3].exp()).log2()
}

/// Levenberg-Marquardt fit of `y = a0 - a1 / log2(x / a2 + a3)` with `a2, a3 > 0`.
pub fn fit_correction_curve(x: &[f64], y: &[f64]) -> Option<[f64; 4]> {
    let resid = |a: &[f64; 4]| -> Vec<f64> { x.iter().zip(y).map(|(xi, yi)| curve(a, *xi) - yi).collect() };
    let cost = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let ymax = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut a = [ymax, 1.0, 0.0, 0.0];
    let mut r = resid(&a);
    let mut c = cost(&r);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let mut jac = vec![[0.0; 4]; x.len()];
        for p in 0..4 {
            let h = 1e-7 * (1.0 + a[p].abs());
            let mut b = a;
            b[p] += h;
            let rb = resid(&b);
            for i in 0..x.len() {
                jac[i][p] = (rb[i] - r[i]) / h;
            }
        }
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        for i in 0..x.len() {
            for p in 0..4 {
                jtr[p] += jac[i][p] * r[i];
                for q in 0..4 {
                    jtj[p][q] += jac[i][p] * jac[i][q];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut m = jtj;
            for p in 0..4 {
                m[p][p] += lambda * (1.0 + jtj[p][p]);
            }
            if let Some(step) = solve4(m, jtr) {
                let b = [a[0] - step[0], a[1] - step[1], a[2] - step[2], a[3] - step[3]];
                let rb = resid(&b);
                let cb = cost(&rb);
                if cb.is_finite() && cb < c {
                    let done = (c - cb) < 1e-15 * (1.0 + c);
                    a = b;
                    r = rb;
                    c = cb;
                    lambda = (lambda / 10.0).max(1e-12);
                    improved = true;
                    if done {
                        return a.iter().all(|v| v.is_finite()).then_some(a);
                    }
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    a.iter().all(|v| v.is_finite()).then_some(a)
}

fn solve4(mut m: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..4 {
            let f = m[row][col] / m[col][col];
            for c in col..4 {
                m[row][c] -= f * m[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = (row + 1..4).map(|c| m[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / m[row][row];
    }
    Some(x)
}

/// Jackknife correction: basic estimates on Bernoulli(`p`) subsamples with `floor(k sqrt p)`
/// neighbours, fitted against `p N`; returns `a0` unless the fit fails or `a1 < 0`.
pub fn idea_jackknife(cloud: &PointCloud, k: usize, p_grid: &[f64], seed: u64) -> Result<EstimateReport> {
    if p_grid.is_empty() || p_grid.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
        return Err(param("subsampling probabilities must lie in (0, 1]"));
    }
    let full = idea_estimate(cloud, k)?.estimate;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (t, &p) in p_grid.iter().enumerate() {
        let mut g = rng::child(seed, t as u64);
        let ids: Vec<usize> = (0..cloud.n()).filter(|_| g.random::<f64>() < p).collect();
        let kp = ((k as f64 * p.sqrt()).floor() as usize).max(1);
        if ids.len() < kp + 2 {
            continue;
        }
        if let Ok(r) = idea_estimate(&cloud.select(&ids), kp) {
            xs.push(ids.len() as f64);
            ys.push(r.estimate);
        }
    }
    let fit = if xs.len() >= 4 { fit_correction_curve(&xs, &ys) } else { None };
    let mut report;
    match fit {
        Some(a) if a[1] >= 0.0 => {
            report = EstimateReport::new(a[0]);
            report.diag("a1", a[1]).diag("a2", a[2].exp()).diag("a3", a[3].exp());
        }
        Some(a) => {
            report = EstimateReport::new(full);
            report.diag("a1", a[1]);
        }
        None => {
            report = EstimateReport::new(full);
            report.flag(Flag::Nonconvergent);
        }
    }
    report.diag("basic", full);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{generate, DatasetSpec};

    #[test]
    fn mean_ratio_closed_forms() {
        assert_eq!(idea_from_mean(0.5).unwrap(), 1.0);
        assert!((idea_from_mean(2.0 / 3.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(idea_from_mean(1.0).is_err());
    }

    #[test]
    fn ball_radial_norm() {
        // |x| for x uniform in the 3-ball has mean 3/4
        let c = generate(&DatasetSpec::Ball { d: 3 }, 10_000, 3).unwrap();
        let m: f64 = (0..c.n()).map(|i| c.row(i).iter().map(|v| v * v).sum::<f64>().sqrt()).sum::<f64>() / c.n() as f64;
        assert!((m - 0.75).abs() < 0.01);
        assert!((idea_from_mean(m).unwrap() - 3.0).abs() < 0.2);
        let r = idea_estimate(&generate(&DatasetSpec::Cube { d: 3 }, 2000, 1).unwrap(), 10).unwrap();
        assert!((r.estimate - 3.0).abs() < 0.4, "{}", r.estimate);
    }

    #[test]
    fn curve_fit_recovers_parameters() {
        let a = [5.0, 2.0, 1.5f64.ln(), 0.8f64.ln()];
        let xs: Vec<f64> = (1..=9).map(|i| 100.0 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| curve(&a, *x)).collect();
        let fit = fit_correction_curve(&xs, &ys).unwrap();
        let err: f64 = xs.iter().zip(&ys).map(|(x, y)| (curve(&fit, *x) - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn jackknife_runs() {
        let c = generate(&DatasetSpec::sphere(4), 1500, 2).unwrap();
        let r = idea_jackknife(&c, 10, &DEFAULT_P_GRID, 0).unwrap();
        assert!(r.estimate.is_finite());
        assert!(r.estimate > 2.0 && r.estimate < 8.0, "{}", r.estimate);
    }
}
