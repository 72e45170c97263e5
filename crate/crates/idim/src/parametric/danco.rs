//! DANCo: neighbour distance likelihood and angle concentration compared against
//! statistics of uniform samples from balls or spheres of each candidate dimension.

use crate::api::{EstimateReport, Flag};
use crate::bench::{generate, DatasetSpec};
use crate::error::{param, Error, Result};
use crate::geometry::{knn_query, PointCloud};
use crate::parametric::mind::{mind_mlk, mind_ratios};
use crate::rng;
use crate::special::ln_bessel_i;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

/// The three summary statistics compared by DANCo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DancoStats {
    /// Continuous MiND likelihood root.
    pub dhat: f64,
    /// Mean von Mises location of neighbour angles.
    pub mu_nu: f64,
    /// Mean von Mises concentration of neighbour angles.
    pub mu_tau: f64,
}

/// Approximate inverse of `A(tau) = I_1(tau) / I_0(tau)`.
pub fn ainv(eta: f64) -> f64 {
    if eta < 0.53 {
        2.0 * eta + eta.powi(3) + 5.0 * eta.powi(5) / 6.0
    } else if eta < 0.85 {
        -0.4 + 1.39 * eta + 0.43 / (1.0 - eta)
    } else {
        1.0 / (eta.powi(3) - 4.0 * eta * eta + 3.0 * eta)
    }
}

/// Von Mises location and concentration of one point's pairwise neighbour angles.
fn angle_fit(center: &[f64], nb: &[&[f64]]) -> (f64, f64) {
    let dirs: Vec<Vec<f64>> = nb
        .iter()
        .map(|x| {
            let v: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
            let n = v.iter().map(|t| t * t).sum::<f64>().sqrt();
            v.into_iter().map(|t| t / n).collect()
        })
        .collect();
    let (mut sc, mut ss, mut m) = (0.0, 0.0, 0usize);
    for i in 0..dirs.len() {
        for j in i + 1..dirs.len() {
            let c: f64 = dirs[i].iter().zip(&dirs[j]).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0);
            let th = c.acos();
            sc += th.cos();
            ss += th.sin();
            m += 1;
        }
    }
    let nu = (ss / sc).atan();
    let (mc, ms) = (sc / m as f64, ss / m as f64);
    let eta = (mc * mc + ms * ms).sqrt();
    (nu, ainv(eta))
}

/// DANCo statistics of a cloud with `k` neighbours.
pub fn danco_stats(cloud: &PointCloud, k: usize, dmax: usize) -> Result<(DancoStats, bool)> {
    if k < 3 {
        return Err(param("DANCo needs k >= 3"));
    }
    let (rho, _) = mind_ratios(cloud, k)?;
    let (dhat, inside) = mind_mlk(&rho, k, dmax as f64)?;
    let idx = knn_query(cloud, k)?;
    let (mut snu, mut stau, mut m) = (0.0, 0.0, 0usize);
    for p in 0..cloud.n() {
        if idx.r(p, 1) == 0.0 {
            continue;
        }
        let nb: Vec<&[f64]> = idx.ids(p).iter().map(|&j| cloud.row(j)).collect();
        let (nu, tau) = angle_fit(cloud.row(p), &nb);
        snu += nu;
        stau += tau;
        m += 1;
    }
    if m == 0 {
        return Err(Error::Degenerate("every point has a duplicate neighbour".into()));
    }
    let mu_tau = if cloud.dim() == 1 { 1.0 } else { stau / m as f64 };
    Ok((DancoStats { dhat, mu_nu: snu / m as f64, mu_tau }, inside))
}

/// `Delta(q) = sum_{i=0}^k (-1)^i C(k,i) psi(1 + i/q)`, evaluated as
/// `-int_0^1 (1 - t^{1/q})^k / (1 - t) dt` to avoid cancellation.
pub fn alternating_digamma_sum(k: usize, q: f64) -> f64 {
    let f = |t: f64| {
        if t >= 1.0 {
            if k == 1 {
                1.0 / q
            } else {
                0.0
            }
        } else {
            (1.0 - t.powf(1.0 / q)).powi(k as i32) / (1.0 - t)
        }
    };
    -adaptive_simpson(&f, 0.0, 1.0, 1e-13, 50)
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let c = 0.5 * (a + b);
    let (fa, fb, fc) = (f(a), f(b), f(c));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    simpson_step(f, a, b, fa, fb, fc, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fb: f64, fc: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let c = 0.5 * (a + b);
    let (d, e) = (0.5 * (a + c), 0.5 * (c + b));
    let (fd, fe) = (f(d), f(e));
    let left = (c - a) / 6.0 * (fa + 4.0 * fd + fc);
    let right = (b - c) / 6.0 * (fc + 4.0 * fe + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson_step(f, a, c, fa, fc, fd, left, tol / 2.0, depth - 1) + simpson_step(f, c, b, fc, fb, fe, right, tol / 2.0, depth - 1)
}

/// Divergence between the distance likelihoods of `dhat` (data) and `dcal` (calibration).
pub fn kl_d(dhat: f64, dcal: f64, k: usize) -> f64 {
    let hk: f64 = (1..=k).map(|i| 1.0 / i as f64).sum();
    let q = dcal / dhat;
    hk * q - q.ln() - (k as f64 - 1.0) * alternating_digamma_sum(k, q)
}

/// Divergence between von Mises laws `(nu1, tau1)` (data) and `(nu2, tau2)` (calibration).
pub fn kl_nutau(nu1: f64, nu2: f64, tau1: f64, tau2: f64) -> f64 {
    let a1 = (ln_bessel_i(1, tau1) - ln_bessel_i(0, tau1)).exp();
    (ln_bessel_i(0, tau2) - ln_bessel_i(0, tau1)) + a1 * (tau1 - tau2 * (nu1 - nu2).cos())
}

/// Manifold sampled for each candidate dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Calibration {
    /// Unit `n`-ball in `R^n`.
    Ball,
    /// Round `S^n` in `R^(n+1)`.
    Sphere,
}

impl Calibration {
    fn spec(self, dim: usize) -> DatasetSpec {
        match self {
            Calibration::Ball => DatasetSpec::Ball { d: dim },
            Calibration::Sphere => DatasetSpec::sphere(dim),
        }
    }
}

/// Calibration statistics for one candidate dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibEntry {
    pub dim: usize,
    pub stats: DancoStats,
}

/// Calibration statistics for dimensions `1 ..= dmax`, each sampled with `n_points` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub manifold: Calibration,
    pub n_points: usize,
    pub k: usize,
    pub seed: u64,
    pub entries: Vec<CalibEntry>,
}

impl CalibrationTable {
    /// Samples each dimension with a seed derived from `(seed, dim)`.
    pub fn generate(manifold: Calibration, n_points: usize, k: usize, dmax: usize, seed: u64) -> Result<Self> {
        let mut t = Self { manifold, n_points, k, seed, entries: Vec::new() };
        t.extend_to(dmax)?;
        Ok(t)
    }

    fn extend_to(&mut self, dmax: usize) -> Result<()> {
        for dim in self.entries.len() + 1..=dmax {
            let cloud = generate(&self.manifold.spec(dim), self.n_points, rng::derive_seed(self.seed, dim as u64))?;
            // generous cap so the calibration root is never clipped
            let (stats, _) = danco_stats(&cloud, self.k, 10 * dmax.max(dim))?;
            self.entries.push(CalibEntry { dim, stats });
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

type CacheKey = (Calibration, usize, usize, u64);

/// Process-wide calibration tables keyed by `(manifold, n_points, k, seed)`.
#[derive(Debug, Clone, Default)]
pub struct CalibrationCache {
    tables: Arc<Mutex<BTreeMap<CacheKey, CalibrationTable>>>,
}

impl CalibrationCache {
    pub fn global() -> CalibrationCache {
        static CACHE: OnceLock<CalibrationCache> = OnceLock::new();
        CACHE.get_or_init(CalibrationCache::default).clone()
    }

    /// A table covering at least `dmax` dimensions, generated on first use.
    pub fn table(&self, manifold: Calibration, n_points: usize, k: usize, dmax: usize, seed: u64) -> Result<CalibrationTable> {
        let mut map = self.tables.lock().expect("calibration cache poisoned");
        let t = map
            .entry((manifold, n_points, k, seed))
            .or_insert_with(|| CalibrationTable { manifold, n_points, k, seed, entries: Vec::new() });
        if t.entries.len() < dmax {
            t.extend_to(dmax)?;
        }
        Ok(t.clone())
    }

    pub fn insert(&self, table: CalibrationTable) {
        let mut map = self.tables.lock().expect("calibration cache poisoned");
        map.insert((table.manifold, table.n_points, table.k, table.seed), table);
    }
}

/// Dimension in `1..=dmax` whose calibration statistics are closest to `stats`.
pub fn danco_select(stats: &DancoStats, table: &CalibrationTable, k: usize, dmax: usize) -> Result<(usize, f64)> {
    if table.k != k || table.entries.len() < dmax {
        return Err(Error::Calibration(format!(
            "table (N={}, k={}, dims={}) does not cover k={k}, dmax={dmax}",
            table.n_points,
            table.k,
            table.entries.len()
        )));
    }
    let mut best = (0, f64::INFINITY);
    for e in &table.entries[..dmax] {
        let kl = kl_d(stats.dhat, e.stats.dhat, k) + kl_nutau(stats.mu_nu, e.stats.mu_nu, stats.mu_tau, e.stats.mu_tau);
        if kl < best.1 {
            best = (e.dim, kl);
        }
    }
    if best.0 == 0 {
        return Err(Error::Calibration("no finite divergence".into()));
    }
    Ok(best)
}

/// DANCo on a cloud, calibrated with samples of the same size.
pub fn danco_estimate(
    cloud: &PointCloud,
    k: usize,
    dmax: usize,
    manifold: Calibration,
    cache: &CalibrationCache,
    seed: u64,
) -> Result<EstimateReport> {
    if dmax < 1 {
        return Err(param("DANCo needs dmax >= 1"));
    }
    let (stats, inside) = danco_stats(cloud, k, dmax)?;
    let table = cache.table(manifold, cloud.n(), k, dmax, seed)?;
    let (dim, kl) = danco_select(&stats, &table, k, dmax)?;
    let mut report = EstimateReport::new(dim as f64);
    report
        .diag("dhat_ml", stats.dhat)
        .diag("mu_nu", stats.mu_nu)
        .diag("mu_tau", stats.mu_tau)
        .diag("divergence", kl);
    if !inside {
        report.flag(Flag::Nonconvergent);
    }
    if dim == dmax {
        report.flag(Flag::Throttled);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::digamma;

    fn binom(k: usize, i: usize) -> f64 {
        (0..i).fold(1.0, |acc, j| acc * (k - j) as f64 / (j + 1) as f64)
    }

    #[test]
    fn integral_form_matches_direct_sum() {
        for k in [1usize, 2, 3, 5, 8] {
            for q in [0.3, 1.0, 2.5] {
                let direct: f64 = (0..=k)
                    .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } * binom(k, i) * digamma(1.0 + i as f64 / q))
                    .sum();
                let a = alternating_digamma_sum(k, q);
                assert!((a - direct).abs() < 1e-8, "k={k} q={q}: {a} vs {direct}");
            }
        }
    }

    #[test]
    fn divergences_vanish_at_identity() {
        // the distance term is minimised at q = 1
        let k = 10;
        let at1 = kl_d(4.0, 4.0, k);
        assert!(kl_d(4.0, 3.0, k) > at1 && kl_d(4.0, 5.0, k) > at1);
        assert!(kl_nutau(0.3, 0.3, 2.0, 2.0).abs() < 1e-12);
        assert!(kl_nutau(0.3, 0.5, 2.0, 3.0) > 0.0);
    }

    #[test]
    fn ainv_inverts_bessel_ratio() {
        for tau in [0.5, 1.0, 2.0, 5.0] {
            let a = (ln_bessel_i(1, tau) - ln_bessel_i(0, tau)).exp();
            assert!((ainv(a) - tau).abs() / tau < 0.05, "tau {tau} -> {}", ainv(a));
        }
    }

    #[test]
    fn sphere_self_consistency() {
        let c = generate(&DatasetSpec::sphere(6), 500, 77).unwrap();
        let cache = CalibrationCache::default();
        for m in [Calibration::Ball, Calibration::Sphere] {
            let r = danco_estimate(&c, 10, 7, m, &cache, 0).unwrap();
            assert!((r.estimate - 6.0).abs() <= 1.0, "{m:?}: {}", r.estimate);
        }
    }

    #[test]
    fn ball_calibration_recovers_a_flat_cube() {
        let c = generate(&DatasetSpec::Cube { d: 4 }, 1000, 5).unwrap();
        let r = danco_estimate(&c, 10, 4, Calibration::Ball, &CalibrationCache::default(), 0).unwrap();
        assert_eq!(r.estimate, 4.0);
    }

    #[test]
    fn table_round_trips_through_json() {
        let t = CalibrationTable::generate(Calibration::Sphere, 200, 5, 3, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("calib.json");
        t.save(&path).unwrap();
        assert_eq!(CalibrationTable::load(&path).unwrap(), t);
        assert!(danco_select(&t.entries[1].stats, &t, 5, 3).is_ok());
        assert!(matches!(danco_select(&t.entries[1].stats, &t, 6, 3), Err(Error::Calibration(_))));
    }
}
