//! Benchmark manifolds and corruption protocols.
//!
//! Generators are pure functions of `(spec, n, seed)`. Formulas:
//!
//! | name | d | D | construction |
//! |------|---|---|--------------|
//! | M1_Sphere | 10 | 11 | normalised 11-variate Gaussian |
//! | M2_Affine_3to5 | 3 | 5 | `A p + b`, `p ~ U[0,4]^3`, fixed `A` (5x3), `b = (3,-1,0,0,8)` |
//! | M3_Nonlinear_4to6 | 4 | 6 | polynomial/trigonometric warp of `U[0,1]^4` |
//! | M4/M6/M8_Nonlinear | 4/6/12 | 8/36/72 | `(p_{i+1} cos 2 pi p_i, p_{i+1} sin 2 pi p_i)` blocks, repeated |
//! | M5a_Helix1d | 1 | 3 | `((2+cos 8t) cos t, (2+cos 8t) sin t, sin 8t)` |
//! | M5b_Helix2d | 2 | 3 | `(r cos p, r sin p, p/2)`, `r, p ~ U[0, 10 pi]` |
//! | M7_Roll | 2 | 3 | `(t cos t, h, t sin t)`, `t ~ U[1.5 pi, 4.5 pi]`, `h ~ U[0,21]` |
//! | M9_Affine | 20 | 20 | `U[-2.5, 2.5]^20` |
//! | M10a-d_Cubic | 10/17/24/70 | 11/18/25/72 | boundary of the unit `(d+1)`-cube, zero padded |
//! | M11_Moebius | 2 | 3 | ten-times twisted band |
//! | M12_Norm | 20 | 20 | standard Gaussian |
//! | M13a_Scurve | 2 | 3 | `(sin t, h, sign(t)(cos t - 1))` |
//! | M13b_Spiral | 1 | 13 | `(100 cos t, 100 sin t, t, 0, ...)` |
//! | Mbeta | 10 | 40 | Beta(10, 1/2) coordinates, trigonometric warp |
//! | Mn1/Mn2_Nonlinear | 18/24 | 72/96 | `tan(x_i cos x_{d-1-i})`, `atan(x_{d-1-i} sin x_i)` |
//! | Mp1-3_Paraboloid | 3/6/9 | 12/21/30 | Burr-type paraboloid `[X, sin X, X^2]` |
//!
//! Extra families: round spheres, `SO(n)` (Haar), tori of revolution (area-uniform),
//! paraboloids `z = 2x^2 +- y^2/b^2`, uniform cubes and balls.

use crate::error::{param, Error, Result};
use crate::geometry::PointCloud;
use crate::rng::{self, Rng};
use rand::Rng as _;
use rand_distr::{Beta, Distribution, Exp1, StandardNormal};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Named benchmark manifolds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Benchmark {
    M1Sphere,
    M2Affine3to5,
    M3Nonlinear4to6,
    M4Nonlinear,
    M5aHelix1d,
    M5bHelix2d,
    M6Nonlinear,
    M7Roll,
    M8Nonlinear,
    M9Affine,
    M10aCubic,
    M10bCubic,
    M10cCubic,
    M10dCubic,
    M11Moebius,
    M12Norm,
    M13aScurve,
    M13bSpiral,
    Mbeta,
    Mn1Nonlinear,
    Mn2Nonlinear,
    Mp1Paraboloid,
    Mp2Paraboloid,
    Mp3Paraboloid,
}

impl Benchmark {
    pub const ALL: [Benchmark; 24] = [
        Benchmark::M1Sphere,
        Benchmark::M2Affine3to5,
        Benchmark::M3Nonlinear4to6,
        Benchmark::M4Nonlinear,
        Benchmark::M5aHelix1d,
        Benchmark::M5bHelix2d,
        Benchmark::M6Nonlinear,
        Benchmark::M7Roll,
        Benchmark::M8Nonlinear,
        Benchmark::M9Affine,
        Benchmark::M10aCubic,
        Benchmark::M10bCubic,
        Benchmark::M10cCubic,
        Benchmark::M10dCubic,
        Benchmark::M11Moebius,
        Benchmark::M12Norm,
        Benchmark::M13aScurve,
        Benchmark::M13bSpiral,
        Benchmark::Mbeta,
        Benchmark::Mn1Nonlinear,
        Benchmark::Mn2Nonlinear,
        Benchmark::Mp1Paraboloid,
        Benchmark::Mp2Paraboloid,
        Benchmark::Mp3Paraboloid,
    ];

    pub fn name(self) -> &'static str {
        use Benchmark::*;
        match self {
            M1Sphere => "M1_Sphere",
            M2Affine3to5 => "M2_Affine_3to5",
            M3Nonlinear4to6 => "M3_Nonlinear_4to6",
            M4Nonlinear => "M4_Nonlinear",
            M5aHelix1d => "M5a_Helix1d",
            M5bHelix2d => "M5b_Helix2d",
            M6Nonlinear => "M6_Nonlinear",
            M7Roll => "M7_Roll",
            M8Nonlinear => "M8_Nonlinear",
            M9Affine => "M9_Affine",
            M10aCubic => "M10a_Cubic",
            M10bCubic => "M10b_Cubic",
            M10cCubic => "M10c_Cubic",
            M10dCubic => "M10d_Cubic",
            M11Moebius => "M11_Moebius",
            M12Norm => "M12_Norm",
            M13aScurve => "M13a_Scurve",
            M13bSpiral => "M13b_Spiral",
            Mbeta => "Mbeta",
            Mn1Nonlinear => "Mn1_Nonlinear",
            Mn2Nonlinear => "Mn2_Nonlinear",
            Mp1Paraboloid => "Mp1_Paraboloid",
            Mp2Paraboloid => "Mp2_Paraboloid",
            Mp3Paraboloid => "Mp3_Paraboloid",
        }
    }

    /// `(d, D)`: intrinsic and ambient dimension.
    pub fn dims(self) -> (usize, usize) {
        use Benchmark::*;
        match self {
            M1Sphere => (10, 11),
            M2Affine3to5 => (3, 5),
            M3Nonlinear4to6 => (4, 6),
            M4Nonlinear => (4, 8),
            M5aHelix1d => (1, 3),
            M5bHelix2d => (2, 3),
            M6Nonlinear => (6, 36),
            M7Roll => (2, 3),
            M8Nonlinear => (12, 72),
            M9Affine => (20, 20),
            M10aCubic => (10, 11),
            M10bCubic => (17, 18),
            M10cCubic => (24, 25),
            M10dCubic => (70, 72),
            M11Moebius => (2, 3),
            M12Norm => (20, 20),
            M13aScurve => (2, 3),
            M13bSpiral => (1, 13),
            Mbeta => (10, 40),
            Mn1Nonlinear => (18, 72),
            Mn2Nonlinear => (24, 96),
            Mp1Paraboloid => (3, 12),
            Mp2Paraboloid => (6, 21),
            Mp3Paraboloid => (9, 30),
        }
    }
}

/// Half-width of the square under the curvature-study paraboloids.
pub const PARABOLOID_HALF_WIDTH: f64 = 2.0;

/// Dataset family plus its shape parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DatasetSpec {
    Named(Benchmark),
    /// Uniform on the round unit sphere `S^d`, zero padded to `ambient >= d + 1`.
    Sphere { d: usize, ambient: usize },
    /// Haar-distributed `SO(n)`, flattened row-major to `n^2` coordinates.
    SOn { n: usize },
    /// Area-uniform torus of revolution with tube radius `r < R`.
    Torus { big_r: f64, r: f64 },
    /// `z = 2x^2 + sign * y^2 / b^2` over `(x, y)` uniform on `[-w, w]^2`, `w = PARABOLOID_HALF_WIDTH`.
    Paraboloid { b: f64, sign: f64 },
    /// Uniform on `[0, 1]^d`.
    Cube { d: usize },
    /// Uniform on the unit `d`-ball.
    Ball { d: usize },
}

impl DatasetSpec {
    pub fn sphere(d: usize) -> Self {
        DatasetSpec::Sphere { d, ambient: d + 1 }
    }

    /// `(d, D)` of the generated cloud.
    pub fn dims(&self) -> (usize, usize) {
        match *self {
            DatasetSpec::Named(b) => b.dims(),
            DatasetSpec::Sphere { d, ambient } => (d, ambient),
            DatasetSpec::SOn { n } => (n * (n - 1) / 2, n * n),
            DatasetSpec::Torus { .. } | DatasetSpec::Paraboloid { .. } => (2, 3),
            DatasetSpec::Cube { d } | DatasetSpec::Ball { d } => (d, d),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            DatasetSpec::Sphere { d, ambient } if ambient < d + 1 => {
                Err(param(format!("sphere S^{d} needs ambient dimension >= {}", d + 1)))
            }
            DatasetSpec::SOn { n } if n < 2 => Err(param("SO(n) needs n >= 2")),
            DatasetSpec::Torus { big_r, r } if !(big_r > r && r > 0.0) => {
                Err(param("torus needs R > r > 0"))
            }
            DatasetSpec::Paraboloid { b, sign } if !(b > 0.0) || sign.abs() != 1.0 => {
                Err(param("paraboloid needs b > 0 and sign = +-1"))
            }
            DatasetSpec::Cube { d } | DatasetSpec::Ball { d } if d == 0 => Err(param("dimension must be >= 1")),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for DatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DatasetSpec::Named(b) => f.write_str(b.name()),
            DatasetSpec::Sphere { d, ambient } => write!(f, "sphere:{d}:{ambient}"),
            DatasetSpec::SOn { n } => write!(f, "so:{n}"),
            DatasetSpec::Torus { big_r, r } => write!(f, "torus:{big_r}:{r}"),
            DatasetSpec::Paraboloid { b, sign } => {
                write!(f, "paraboloid:{b}:{}", if sign > 0.0 { "+" } else { "-" })
            }
            DatasetSpec::Cube { d } => write!(f, "cube:{d}"),
            DatasetSpec::Ball { d } => write!(f, "ball:{d}"),
        }
    }
}

impl FromStr for DatasetSpec {
    type Err = Error;

    /// Benchmark names (`M7_Roll`) or `sphere:d[:D]`, `so:n`, `torus:R:r`,
    /// `paraboloid:b:+|-`, `cube:d`, `ball:d`.
    fn from_str(s: &str) -> Result<Self> {
        if let Some(b) = Benchmark::ALL.iter().find(|b| b.name().eq_ignore_ascii_case(s)) {
            return Ok(DatasetSpec::Named(*b));
        }
        let unknown = || Error::UnknownDataset(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let int = |i: usize| -> Result<usize> { parts.get(i).ok_or_else(unknown)?.parse().map_err(|_| unknown()) };
        let real = |i: usize| -> Result<f64> { parts.get(i).ok_or_else(unknown)?.parse().map_err(|_| unknown()) };
        let spec = match parts[0].to_ascii_lowercase().as_str() {
            "sphere" => {
                let d = int(1)?;
                let ambient = if parts.len() > 2 { int(2)? } else { d + 1 };
                DatasetSpec::Sphere { d, ambient }
            }
            "so" | "son" => DatasetSpec::SOn { n: int(1)? },
            "torus" => DatasetSpec::Torus { big_r: real(1)?, r: real(2)? },
            "paraboloid" => {
                let sign = match parts.get(2).copied().unwrap_or("+") {
                    "+" => 1.0,
                    "-" => -1.0,
                    _ => return Err(unknown()),
                };
                DatasetSpec::Paraboloid { b: real(1)?, sign }
            }
            "cube" => DatasetSpec::Cube { d: int(1)? },
            "ball" => DatasetSpec::Ball { d: int(1)? },
            _ => return Err(unknown()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn gauss(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn unif(rng: &mut Rng) -> f64 {
    rng.random::<f64>()
}

/// Samples `n` points of `spec` from the stream seeded by `seed`.
pub fn generate(spec: &DatasetSpec, n: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return Err(param("n must be >= 1"));
    }
    spec.validate()?;
    let mut rng = rng::stream(seed);
    let (d, dim) = spec.dims();
    let rows: Vec<Vec<f64>> = match *spec {
        DatasetSpec::Named(b) => named(b, n, &mut rng),
        DatasetSpec::Sphere { d, ambient } => (0..n).map(|_| sphere_point(d, ambient, &mut rng)).collect(),
        DatasetSpec::SOn { n: m } => (0..n).map(|_| haar_so(m, &mut rng)).collect(),
        DatasetSpec::Torus { big_r, r } => (0..n).map(|_| torus_point(big_r, r, &mut rng)).collect(),
        DatasetSpec::Paraboloid { b, sign } => (0..n)
            .map(|_| {
                let x = PARABOLOID_HALF_WIDTH * (2.0 * unif(&mut rng) - 1.0);
                let y = PARABOLOID_HALF_WIDTH * (2.0 * unif(&mut rng) - 1.0);
                vec![x, y, 2.0 * x * x + sign * y * y / (b * b)]
            })
            .collect(),
        DatasetSpec::Cube { d } => (0..n).map(|_| (0..d).map(|_| unif(&mut rng)).collect()).collect(),
        DatasetSpec::Ball { d } => (0..n).map(|_| ball_point(d, &mut rng)).collect(),
    };
    debug_assert!(rows.iter().all(|r| r.len() == dim));
    Ok(PointCloud::from_rows(&rows)?.with_meta(spec.to_string(), d))
}

fn sphere_point(d: usize, ambient: usize, rng: &mut Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..=d).map(|_| gauss(rng)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v.resize(ambient, 0.0);
    v
}

fn ball_point(d: usize, rng: &mut Rng) -> Vec<f64> {
    let mut v = sphere_point(d - 1, d, rng);
    let radius = unif(rng).powf(1.0 / d as f64);
    v.iter_mut().for_each(|x| *x *= radius);
    v
}

/// Haar sample on `SO(m)`: QR of a Gaussian matrix with sign-corrected diagonal,
/// then the first column is negated if the determinant is `-1`.
fn haar_so(m: usize, rng: &mut Rng) -> Vec<f64> {
    let g = faer::Mat::<f64>::from_fn(m, m, |_, _| gauss(rng));
    let qr = g.qr();
    let mut q = qr.compute_Q();
    let r = qr.R();
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            for i in 0..m {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    if q.determinant() < 0.0 {
        for i in 0..m {
            q[(i, 0)] = -q[(i, 0)];
        }
    }
    (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| q[(i, j)]).collect()
}

fn torus_point(big_r: f64, r: f64, rng: &mut Rng) -> Vec<f64> {
    // area element is proportional to R + r cos(phi)
    let phi = loop {
        let phi = 2.0 * PI * unif(rng);
        if unif(rng) * (big_r + r) <= big_r + r * phi.cos() {
            break phi;
        }
    };
    let theta = 2.0 * PI * unif(rng);
    let rho = big_r + r * phi.cos();
    vec![rho * theta.cos(), rho * theta.sin(), r * phi.sin()]
}

/// Tube angle `phi in [0, 2 pi)` of a torus point; `phi = pi` is the inner equator.
pub fn torus_angle(point: &[f64], big_r: f64) -> f64 {
    let rho = (point[0] * point[0] + point[1] * point[1]).sqrt();
    point[2].atan2(rho - big_r).rem_euclid(2.0 * PI)
}

fn named(b: Benchmark, n: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    use Benchmark::*;
    let (d, dim) = b.dims();
    let pad = |mut v: Vec<f64>| {
        v.resize(dim, 0.0);
        v
    };
    match b {
        M1Sphere => (0..n).map(|_| sphere_point(d, dim, rng)).collect(),
        M2Affine3to5 => {
            const A: [[f64; 3]; 5] =
                [[1.2, -0.5, 0.0], [0.5, 0.9, 0.0], [-0.5, -0.2, 1.0], [0.4, -0.9, -0.1], [1.1, -0.3, 0.0]];
            const B: [f64; 5] = [3.0, -1.0, 0.0, 0.0, 8.0];
            (0..n)
                .map(|_| {
                    let p: Vec<f64> = (0..3).map(|_| 4.0 * unif(rng)).collect();
                    (0..5).map(|i| B[i] + (0..3).map(|j| A[i][j] * p[j]).sum::<f64>()).collect()
                })
                .collect()
        }
        M3Nonlinear4to6 => (0..n)
            .map(|_| {
                let (p0, p1, p2, p3) = (unif(rng), unif(rng), unif(rng), unif(rng));
                vec![
                    p1 * p1 * (2.0 * PI * p0).cos(),
                    p2 * p2 * (2.0 * PI * p0).sin(),
                    p1 + p2 + (p1 - p3).powi(2),
                    p1 - 2.0 * p2 + (p0 - p3).powi(2),
                    -p1 - 2.0 * p2 + (p2 - p3).powi(2),
                    p0 * p0 - p1 * p1 + p2 * p2 - p3 * p3,
                ]
            })
            .collect(),
        M4Nonlinear | M6Nonlinear | M8Nonlinear => (0..n)
            .map(|_| {
                let p: Vec<f64> = (0..d).map(|_| unif(rng)).collect();
                let block: Vec<f64> = (0..d)
                    .flat_map(|i| {
                        let a = p[(i + 1) % d];
                        [a * (2.0 * PI * p[i]).cos(), a * (2.0 * PI * p[i]).sin()]
                    })
                    .collect();
                block.repeat(dim / (2 * d))
            })
            .collect(),
        M5aHelix1d => (0..n)
            .map(|_| {
                let t = 2.0 * PI / n as f64 + 2.0 * PI * unif(rng);
                let rho = 2.0 + (8.0 * t).cos();
                vec![rho * t.cos(), rho * t.sin(), (8.0 * t).sin()]
            })
            .collect(),
        M5bHelix2d => (0..n)
            .map(|_| {
                let r = 10.0 * PI * unif(rng);
                let p = 10.0 * PI * unif(rng);
                vec![r * p.cos(), r * p.sin(), 0.5 * p]
            })
            .collect(),
        M7Roll => (0..n)
            .map(|_| {
                let t = 1.5 * PI * (1.0 + 2.0 * unif(rng));
                let h = 21.0 * unif(rng);
                vec![t * t.cos(), h, t * t.sin()]
            })
            .collect(),
        M9Affine => (0..n).map(|_| (0..d).map(|_| 5.0 * unif(rng) - 2.5).collect()).collect(),
        M10aCubic | M10bCubic | M10cCubic | M10dCubic => {
            let faces = d + 1;
            let per_side = n / (2 * faces) + 1;
            let mut rows = Vec::with_capacity(2 * faces * per_side);
            'outer: for i in 0..faces {
                for side in [0.0, 1.0] {
                    for _ in 0..per_side {
                        if rows.len() == n {
                            break 'outer;
                        }
                        let mut v: Vec<f64> = (0..faces).map(|_| unif(rng)).collect();
                        v[i] = side;
                        rows.push(pad(v));
                    }
                }
            }
            rows
        }
        M11Moebius => (0..n)
            .map(|_| {
                let phi = 2.0 * PI * unif(rng);
                let rad = 2.0 * unif(rng) - 1.0;
                let w = 1.0 + 0.5 * rad * (5.0 * phi).cos();
                vec![w * phi.cos(), w * phi.sin(), 0.5 * rad * (5.0 * phi).sin()]
            })
            .collect(),
        M12Norm => (0..n).map(|_| (0..d).map(|_| gauss(rng)).collect()).collect(),
        M13aScurve => (0..n)
            .map(|_| {
                let t = 3.0 * PI * (unif(rng) - 0.5);
                let h = 2.0 * unif(rng);
                vec![t.sin(), h, t.signum() * (t.cos() - 1.0)]
            })
            .collect(),
        M13bSpiral => (0..n)
            .map(|_| {
                let t = 10.0 * PI * unif(rng);
                pad(vec![100.0 * t.cos(), 100.0 * t.sin(), t])
            })
            .collect(),
        Mbeta => {
            let beta = Beta::new(10.0, 0.5).expect("valid beta parameters");
            (0..n)
                .map(|_| {
                    let x: Vec<f64> = (0..d).map(|_| beta.sample(rng)).collect();
                    let t1: Vec<f64> = x.iter().map(|v| v * (2.0 * PI * v).cos().sin()).collect();
                    let t2: Vec<f64> = x.iter().map(|v| v * (2.0 * PI * v).sin().cos()).collect();
                    [t1.clone(), t2.clone(), t1, t2].concat()
                })
                .collect()
        }
        Mn1Nonlinear | Mn2Nonlinear => (0..n)
            .map(|_| {
                let x: Vec<f64> = (0..d).map(|_| unif(rng)).collect();
                let t1: Vec<f64> = (0..d).map(|i| (x[i] * x[d - 1 - i].cos()).tan()).collect();
                let t2: Vec<f64> = (0..d).map(|i| (x[d - 1 - i] * x[i].sin()).atan()).collect();
                [t1.clone(), t2.clone(), t1, t2].concat()
            })
            .collect(),
        Mp1Paraboloid | Mp2Paraboloid | Mp3Paraboloid => (0..n)
            .map(|_| {
                let e: Vec<f64> = (0..=d).map(|_| Exp1.sample(rng)).collect();
                let mut x: Vec<f64> = (1..=d).map(|j| 1.0 / (1.0 + e[j] / e[0])).collect();
                x.push(x.iter().map(|v| v * v).sum());
                let s: Vec<f64> = x.iter().map(|v| v.sin()).collect();
                let q: Vec<f64> = x.iter().map(|v| v * v).collect();
                [x, s, q].concat()
            })
            .collect(),
    }
}

/// Adds i.i.d. `N(0, sigma2)` to every coordinate. `sigma2 = 0` returns the input unchanged.
pub fn add_gaussian_noise(cloud: &PointCloud, sigma2: f64, seed: u64) -> Result<PointCloud> {
    if !(sigma2 >= 0.0) {
        return Err(param("noise variance must be >= 0"));
    }
    if sigma2 == 0.0 {
        return Ok(cloud.clone());
    }
    let sigma = sigma2.sqrt();
    let mut rng = rng::stream(seed);
    Ok(cloud.map(|v| v + sigma * gauss(&mut rng)))
}

/// Picks `n_out` distinct points uniformly and multiplies each of their coordinates
/// by an independent `U(3, 6)` factor.
pub fn add_outliers(cloud: &PointCloud, n_out: usize, seed: u64) -> Result<PointCloud> {
    if n_out > cloud.n() {
        return Err(param(format!("cannot pick {n_out} outliers from {} points", cloud.n())));
    }
    let mut rng = rng::stream(seed);
    let mut out = cloud.clone();
    let mut chosen = rand::seq::index::sample(&mut rng, cloud.n(), n_out).into_vec();
    chosen.sort_unstable();
    for i in chosen {
        for c in out.row_mut(i) {
            *c *= 3.0 + 3.0 * unif(&mut rng);
        }
    }
    Ok(out)
}
