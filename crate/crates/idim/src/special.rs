//! Special functions not covered by `statrs`.

pub use statrs::function::beta::beta_reg;
pub use statrs::function::gamma::{digamma, ln_gamma};

/// `ln I_nu(x)` for `nu in {0, 1}` and `x >= 0`.
///
/// Power series below 25, Hankel asymptotic expansion above.
pub fn ln_bessel_i(nu: u32, x: f64) -> f64 {
    assert!(nu <= 1 && x >= 0.0);
    if x == 0.0 {
        return if nu == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if x < 25.0 {
        let h = x / 2.0;
        let mut term = if nu == 0 { 1.0 } else { h };
        let mut sum = term;
        let h2 = h * h;
        for m in 1..500 {
            term *= h2 / (m as f64 * (m + nu as usize) as f64);
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        sum.ln()
    } else {
        let mu = 4.0 * (nu * nu) as f64;
        let mut term = 1.0;
        let mut sum = 1.0;
        for j in 1..30 {
            let odd = (2 * j - 1) as f64;
            let next = -term * (mu - odd * odd) / (j as f64 * 8.0 * x);
            if next.abs() > term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term.abs() < 1e-17 {
                break;
            }
        }
        x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + sum.ln()
    }
}

/// Asymptotic Kolmogorov survival function `P(D_n > d)` with Stephens' small-sample correction.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=200 {
        let jf = j as f64;
        let t = 2.0 * (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { t } else { -t };
        if t < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov statistic of `sample` against the CDF `cdf`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
