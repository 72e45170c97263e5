//! Estimator registry, configuration schema and JSON reports.

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::parametric::{self, danco::{Calibration, CalibrationCache}, mind::MindVersion};
use crate::stats::Aggregation;
use crate::tangential::{self, Neighborhood, ThresholdMethod};
use crate::topology::{self, MagnitudeGrid, SubsampleSchedule};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;

/// A hyperparameter value: a number or an enumeration label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Num(f64),
    Text(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Num(v) => write!(f, "{v}"),
            ParamValue::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Num(v)
    }
}

impl From<usize> for ParamValue {
    fn from(v: usize) -> Self {
        ParamValue::Num(v as f64)
    }
}

impl From<i32> for ParamValue {
    fn from(v: i32) -> Self {
        ParamValue::Num(v as f64)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.to_string())
    }
}

impl From<String> for ParamValue {
    fn from(v: String) -> Self {
        ParamValue::Text(v)
    }
}

impl ParamValue {
    /// Parses a command-line or config-file token: numbers become `Num`, anything else `Text`.
    pub fn parse(s: &str) -> Self {
        s.trim().parse::<f64>().map(ParamValue::Num).unwrap_or_else(|_| ParamValue::Text(s.trim().to_string()))
    }
}

/// Estimator id plus hyperparameters, kept in sorted key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub estimator: String,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
}

impl EstimatorConfig {
    pub fn new(estimator: impl Into<String>) -> Self {
        Self { estimator: estimator.into(), params: BTreeMap::new() }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<ParamValue>) -> Self {
        self.params.insert(key.into(), value.into());
        self
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<ParamValue>) {
        self.params.insert(key.into(), value.into());
    }

    /// `k=10;agg=mean` style label of the explicit parameters.
    pub fn param_label(&self) -> String {
        self.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
    }

    /// Inverse of [`param_label`](Self::param_label).
    pub fn from_label(estimator: &str, label: &str) -> Result<Self> {
        let mut cfg = Self::new(estimator);
        for item in label.split(';').filter(|s| !s.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{item}'")))?;
            cfg.set(k.trim(), ParamValue::parse(v));
        }
        Ok(cfg)
    }
}

/// Condition attached to an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    /// The estimate sits at a hyperparameter-imposed ceiling.
    Throttled,
    /// Some points or pairs carried no information and were excluded.
    Degenerate,
    /// The slope is close to 1, where small slope errors explode.
    SlopeHazard,
    /// An iterative method hit its iteration cap or fell back.
    Nonconvergent,
    /// A heuristic replaced an exact search.
    Approximate,
    /// The input contains coincident points.
    Duplicates,
}

/// Output of an estimator run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimator: String,
    pub config: BTreeMap<String, ParamValue>,
    #[serde(serialize_with = "ser_nullable", deserialize_with = "de_nullable")]
    pub estimate: f64,
    pub flags: Vec<Flag>,
    pub diagnostics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locals: Option<Vec<f64>>,
}

fn ser_nullable<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn de_nullable<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl EstimateReport {
    pub fn new(estimate: f64) -> Self {
        Self {
            estimator: String::new(),
            config: BTreeMap::new(),
            estimate,
            flags: Vec::new(),
            diagnostics: BTreeMap::new(),
            locals: None,
        }
    }

    pub fn with_locals(mut self, locals: Vec<f64>) -> Self {
        self.locals = Some(locals);
        self
    }

    /// Adds a diagnostic; non-finite values are dropped (JSON has no encoding for them).
    pub fn diag(&mut self, key: &str, value: f64) -> &mut Self {
        if value.is_finite() {
            self.diagnostics.insert(key.to_string(), value);
        }
        self
    }

    pub fn flag(&mut self, flag: Flag) -> &mut Self {
        if let Err(pos) = self.flags.binary_search(&flag) {
            self.flags.insert(pos, flag);
        }
        self
    }

    pub fn has(&self, flag: Flag) -> bool {
        self.flags.contains(&flag)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Type and range of one hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ParamKind {
    Int { min: f64, max: f64 },
    Float { min: f64, max: f64 },
    Choice { options: Vec<&'static str> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    #[serde(flatten)]
    pub kind: ParamKind,
    pub default: ParamValue,
    pub help: &'static str,
}

/// Registry entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorInfo {
    pub id: &'static str,
    pub family: &'static str,
    pub description: &'static str,
    pub params: Vec<ParamSpec>,
}

impl EstimatorInfo {
    pub fn defaults(&self) -> BTreeMap<String, ParamValue> {
        self.params.iter().map(|p| (p.name.to_string(), p.default.clone())).collect()
    }
}

fn int(name: &'static str, default: f64, min: f64, max: f64, help: &'static str) -> ParamSpec {
    ParamSpec { name, kind: ParamKind::Int { min, max }, default: ParamValue::Num(default), help }
}

fn float(name: &'static str, default: f64, min: f64, max: f64, help: &'static str) -> ParamSpec {
    ParamSpec { name, kind: ParamKind::Float { min, max }, default: ParamValue::Num(default), help }
}

fn choice(name: &'static str, default: &'static str, options: &[&'static str], help: &'static str) -> ParamSpec {
    ParamSpec { name, kind: ParamKind::Choice { options: options.to_vec() }, default: ParamValue::Text(default.into()), help }
}

const BIG: f64 = 1e9;
const AGG: &[&str] = &["mean", "hmean", "median"];

fn k_param(default: f64) -> ParamSpec {
    int("k", default, 1.0, BIG, "number of nearest neighbours")
}

fn agg_param() -> ParamSpec {
    choice("agg", "mean", AGG, "aggregation of local estimates")
}

fn nbhd_param() -> ParamSpec {
    choice("nbhd", "knn", &["knn", "eps"], "knn neighbourhood, or eps ball of radius median r_k")
}

fn seed_param() -> ParamSpec {
    int("seed", 0.0, 0.0, u64::MAX as f64, "seed for internal sampling")
}

fn schedule_params() -> Vec<ParamSpec> {
    vec![
        float("fraction_min", 0.75, 1e-6, 1.0, "smallest subsample fraction"),
        int("nsteps", 10.0, 2.0, BIG, "number of subsample fractions"),
        int("subsamples", 10.0, 1.0, BIG, "repeats per fraction"),
        seed_param(),
    ]
}

/// Every registered estimator, in stable order.
pub fn list_estimators() -> Vec<EstimatorInfo> {
    let e = |id, family, description, params| EstimatorInfo { id, family, description, params };
    vec![
        e(
            "lpca",
            "tangential",
            "local PCA with eigenvalue threshold",
            vec![
                k_param(10.0),
                nbhd_param(),
                choice("ver", "fo", &["fo", "fan", "maxgap", "ratio", "pr", "kaiser", "broken_stick"], "threshold rule"),
                float("alpha", 0.05, 0.0, 1.0, "FO fraction of the top eigenvalue; Ratio uses 1 - alpha"),
                float("gap", 10.0, 1.0, BIG, "Fan eigenvalue gap"),
                float("beta", 0.8, 0.0, 1.0, "Fan cumulative variance share"),
                float("proportion", 1.0, 0.0, 1.0, "Kaiser multiple of the mean eigenvalue"),
                agg_param(),
            ],
        ),
        e(
            "mle",
            "parametric",
            "maximum likelihood from neighbour distance ratios",
            vec![k_param(10.0), nbhd_param(), agg_param(), int("corrected", 0.0, 0.0, 1.0, "normalise by k - 2")],
        ),
        e(
            "tle",
            "parametric",
            "tight-locality estimator over neighbour pairs",
            vec![k_param(10.0), float("epsilon", 1e-6, 0.0, 1.0, "relative tolerance for coincident points"), agg_param()],
        ),
        e(
            "twonn",
            "parametric",
            "two nearest neighbour ratio CDF fit",
            vec![float("discard", 0.05, 0.0, 0.99, "fraction of largest ratios discarded")],
        ),
        e(
            "gride",
            "parametric",
            "generalised ratio likelihood",
            vec![
                int("n1", 1.0, 1.0, BIG, "lower neighbour rank"),
                int("multiplier", 2.0, 2.0, BIG, "upper rank is n1 * multiplier"),
                float("dmax", 150.0, 1.0, 1e6, "upper end of the likelihood search"),
            ],
        ),
        e(
            "mind_ml",
            "parametric",
            "likelihood of the first to (k+1)-th neighbour ratio",
            vec![
                k_param(1.0),
                choice("ver", "mlk", &["mlk", "mli"], "continuous root or integer argmax"),
                int("dmax", 10.0, 1.0, 1e4, "largest dimension considered"),
            ],
        ),
        e(
            "danco",
            "parametric",
            "distance and angle statistics compared with calibration samples",
            vec![
                k_param(10.0),
                int("dmax", 0.0, 0.0, 1e3, "largest dimension considered; 0 means ambient"),
                choice("calib", "ball", &["ball", "sphere"], "calibration manifold per candidate dimension"),
                seed_param(),
            ],
        ),
        e(
            "ess",
            "parametric",
            "expected simplex skewness",
            vec![k_param(10.0), agg_param(), seed_param()],
        ),
        e(
            "corrint",
            "parametric",
            "correlation integral slope between two scales",
            vec![
                int("k1", 2.0, 1.0, BIG, "rank of the small scale (median r_k1)"),
                int("k2", 12.0, 2.0, BIG, "rank of the large scale (median r_k2)"),
            ],
        ),
        e(
            "packing",
            "parametric",
            "greedy packing number scaling",
            vec![
                int("k1", 2.0, 1.0, BIG, "rank of the small scale (median r_k1)"),
                int("k2", 12.0, 2.0, BIG, "rank of the large scale (median r_k2)"),
            ],
        ),
        e("doubling", "parametric", "kNN graph ball doubling ratio", vec![k_param(10.0)]),
        e(
            "wodcap",
            "parametric",
            "volume fraction of lens-shaped ball intersections",
            vec![k_param(10.0), agg_param(), choice("lens", "metric", &["metric", "graph"], "lens membership rule")],
        ),
        e(
            "idea",
            "parametric",
            "expected norm of normalised neighbour distances",
            vec![k_param(10.0), int("jackknife", 0.0, 0.0, 1.0, "fit the subsampling correction curve"), seed_param()],
        ),
        e(
            "pettis",
            "parametric",
            "iterative regression of mean kNN distances",
            vec![int("kmin", 2.0, 1.0, BIG, "smallest rank"), int("kmax", 10.0, 2.0, BIG, "largest rank")],
        ),
        e(
            "cdim",
            "tangential",
            "largest pairwise obtuse set of neighbour directions",
            vec![k_param(10.0), agg_param(), seed_param()],
        ),
        e("ph0", "topology", "MST alpha-weight growth under subsampling", {
            let mut p = vec![float("alpha", 0.5, 1e-6, BIG, "edge length exponent")];
            p.extend(schedule_params());
            p
        }),
        e("knn", "topology", "kNN graph total length growth under subsampling", {
            let mut p = vec![k_param(1.0)];
            p.extend(schedule_params());
            p
        }),
        e(
            "magnitude",
            "topology",
            "slope of the linear part of the log magnitude function",
            vec![
                float("tmin", 0.0, 0.0, BIG, "smallest scale; 0 means 0.05 / median r_1"),
                float("tmax", 0.0, 0.0, BIG, "largest scale; 0 means 50 / median r_1"),
                int("tsteps", 60.0, 20.0, 1e5, "number of log-spaced scales"),
                float("curv_threshold", 0.05, 0.0, BIG, "second-derivative bound of the linear region"),
            ],
        ),
    ]
}

/// Looks up a registry entry.
pub fn estimator_info(id: &str) -> Result<EstimatorInfo> {
    list_estimators().into_iter().find(|e| e.id == id).ok_or_else(|| Error::UnknownEstimator(id.to_string()))
}

/// Validates `config` against its schema and fills in defaults.
pub fn resolve(config: &EstimatorConfig) -> Result<BTreeMap<String, ParamValue>> {
    let info = estimator_info(&config.estimator)?;
    let mut out = info.defaults();
    for (key, value) in &config.params {
        let spec = info.params.iter().find(|p| p.name == key).ok_or_else(|| Error::Schema {
            key: key.clone(),
            reason: format!("not a parameter of '{}'", info.id),
        })?;
        let bad = |reason: String| Error::Schema { key: key.clone(), reason };
        let value = match (&spec.kind, value) {
            (ParamKind::Int { min, max }, ParamValue::Num(v)) => {
                if v.fract() != 0.0 || v < min || v > max {
                    return Err(bad(format!("expected an integer in [{min}, {max}], got {v}")));
                }
                ParamValue::Num(*v)
            }
            (ParamKind::Float { min, max }, ParamValue::Num(v)) => {
                if !(v >= min && v <= max) {
                    return Err(bad(format!("expected a number in [{min}, {max}], got {v}")));
                }
                ParamValue::Num(*v)
            }
            (ParamKind::Choice { options }, ParamValue::Text(s)) => {
                let lower = s.to_ascii_lowercase();
                if !options.contains(&lower.as_str()) {
                    return Err(bad(format!("expected one of {options:?}, got '{s}'")));
                }
                ParamValue::Text(lower)
            }
            (_, v) => return Err(bad(format!("wrong value type '{v}'"))),
        };
        out.insert(key.clone(), value);
    }
    Ok(out)
}

struct Params<'a>(&'a BTreeMap<String, ParamValue>);

impl Params<'_> {
    fn num(&self, key: &str) -> f64 {
        match self.0.get(key) {
            Some(ParamValue::Num(v)) => *v,
            _ => unreachable!("schema guarantees numeric '{key}'"),
        }
    }
    fn usize(&self, key: &str) -> usize {
        self.num(key) as usize
    }
    fn u64(&self, key: &str) -> u64 {
        self.num(key) as u64
    }
    fn text(&self, key: &str) -> &str {
        match self.0.get(key) {
            Some(ParamValue::Text(s)) => s,
            _ => unreachable!("schema guarantees text '{key}'"),
        }
    }
    fn agg(&self) -> Aggregation {
        self.text("agg").parse().expect("schema guarantees a valid aggregation")
    }
    fn nbhd(&self) -> Neighborhood {
        let k = self.usize("k");
        if self.text("nbhd") == "eps" {
            Neighborhood::EpsMedianKnn(k)
        } else {
            Neighborhood::Knn(k)
        }
    }
    fn schedule(&self) -> Result<SubsampleSchedule> {
        SubsampleSchedule::linear(self.num("fraction_min"), 1.0, self.usize("nsteps"), self.usize("subsamples"), self.u64("seed"))
    }
}

/// Runs the configured estimator on `cloud`.
pub fn run_estimator(cloud: &PointCloud, config: &EstimatorConfig) -> Result<EstimateReport> {
    let resolved = resolve(config)?;
    let p = Params(&resolved);
    let mut report = match config.estimator.as_str() {
        "lpca" => {
            let method = match p.text("ver") {
                "fo" => ThresholdMethod::Fo { alpha: p.num("alpha") },
                "fan" => ThresholdMethod::Fan { gap: p.num("gap"), cumulative: p.num("beta") },
                "maxgap" => ThresholdMethod::MaxGap,
                "ratio" => ThresholdMethod::Ratio { gamma: 1.0 - p.num("alpha") },
                "pr" => ThresholdMethod::ParticipationRatio,
                "kaiser" => ThresholdMethod::Kaiser { proportion: p.num("proportion") },
                _ => ThresholdMethod::BrokenStick,
            };
            tangential::lpca_estimate(cloud, p.nbhd(), &method, p.agg())?
        }
        "mle" => parametric::mle::mle_estimate(cloud, p.nbhd(), p.num("corrected") != 0.0, p.agg())?,
        "tle" => parametric::tle::tle_estimate(cloud, p.usize("k"), p.num("epsilon"), p.agg())?,
        "twonn" => parametric::twonn::twonn_estimate(cloud, p.num("discard"))?,
        "gride" => {
            let n1 = p.usize("n1");
            parametric::gride::gride_estimate(cloud, n1, n1 * p.usize("multiplier"), p.num("dmax"))?
        }
        "mind_ml" => {
            let ver = if p.text("ver") == "mli" { MindVersion::MLi } else { MindVersion::MLk };
            parametric::mind::mind_ml_estimate(cloud, p.usize("k"), ver, p.usize("dmax"))?
        }
        "danco" => {
            let dmax = match p.usize("dmax") {
                0 => cloud.dim(),
                d => d,
            };
            let calib = if p.text("calib") == "sphere" { Calibration::Sphere } else { Calibration::Ball };
            parametric::danco::danco_estimate(cloud, p.usize("k"), dmax, calib, &CalibrationCache::global(), p.u64("seed"))?
        }
        "ess" => parametric::ess::ess_estimate(cloud, p.usize("k"), p.agg(), p.u64("seed"))?,
        "corrint" => parametric::corrint::corrint_ranks(cloud, p.usize("k1"), p.usize("k2"))?,
        "packing" => parametric::packing::packing_ranks(cloud, p.usize("k1"), p.usize("k2"))?,
        "doubling" => parametric::doubling::doubling_estimate(cloud, p.usize("k"))?,
        "wodcap" => {
            let lens = if p.text("lens") == "graph" {
                parametric::wodcap::Lens::Graph
            } else {
                parametric::wodcap::Lens::Metric
            };
            parametric::wodcap::wodcap_estimate(cloud, p.usize("k"), p.agg(), lens)?
        }
        "idea" => {
            if p.num("jackknife") != 0.0 {
                parametric::idea::idea_jackknife(cloud, p.usize("k"), &parametric::idea::DEFAULT_P_GRID, p.u64("seed"))?
            } else {
                parametric::idea::idea_estimate(cloud, p.usize("k"))?
            }
        }
        "pettis" => parametric::pettis::pettis_estimate(cloud, p.usize("kmin"), p.usize("kmax"))?,
        "cdim" => tangential::conical_dimension(cloud, p.usize("k"), p.agg(), p.u64("seed"))?,
        "ph0" => topology::ph0_dimension(cloud, p.num("alpha"), &p.schedule()?)?,
        "knn" => topology::knn_dimension(cloud, p.usize("k"), &p.schedule()?)?,
        "magnitude" => {
            let grid = MagnitudeGrid::resolve(cloud, p.num("tmin"), p.num("tmax"), p.usize("tsteps"))?;
            topology::magnitude_dimension(cloud, &grid.values, p.num("curv_threshold"))?
        }
        other => return Err(Error::UnknownEstimator(other.to_string())),
    };
    if cloud.duplicate_count() > 0 {
        report.flag(Flag::Duplicates);
    }
    report.estimator = config.estimator.clone();
    report.config = resolved;
    Ok(report)
}
