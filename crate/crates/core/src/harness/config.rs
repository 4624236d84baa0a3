//! TOML experiment configs with strict key checking.
//!
//! ```toml
//! name = "kara-diag"      # optional, defaults to the file stem
//! seed = 7                # optional
//! kind = "kara"
//!
//! [params]
//! symbol = "diag:0.5,0.3"
//! n_max = 60
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::capacity::{LogRegion, RegionShape};
use crate::domains::Domain;
use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: Option<u64>,
    /// Output directory, relative to the output root.
    pub output: Option<PathBuf>,
    /// Directory relative paths inside `params` resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
    pub experiment: Experiment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Kara(KaraParams),
    Mata(MataParams),
    Capacity(CapacityParams),
    Widths(WidthsParams),
    GoodReinhardt(GoodReinhardtParams),
    Dilation(DilationParams),
    Tails(TailsParams),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Kara(_) => "kara",
            Experiment::Mata(_) => "mata",
            Experiment::Capacity(_) => "capacity",
            Experiment::Widths(_) => "widths",
            Experiment::GoodReinhardt(_) => "good_reinhardt",
            Experiment::Dilation(_) => "dilation",
            Experiment::Tails(_) => "tails",
        }
    }
}

fn polydisk2() -> Domain {
    Domain::Polydisk(2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KaraParams {
    #[serde(default = "polydisk2")]
    pub domain: Domain,
    pub symbol: String,
    #[serde(default = "KaraParams::default_n_max")]
    pub n_max: usize,
    #[serde(default = "KaraParams::default_n_min")]
    pub n_min: usize,
    #[serde(default = "KaraParams::default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "KaraParams::default_corrected_tolerance")]
    pub corrected_tolerance: f64,
}

impl KaraParams {
    fn default_n_max() -> usize {
        60
    }
    fn default_n_min() -> usize {
        5
    }
    fn default_tolerance() -> f64 {
        0.05
    }
    fn default_corrected_tolerance() -> f64 {
        0.02
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MataParams {
    pub sigma: Vec<f64>,
    /// The bound `A`; exclusive with `target_count`.
    pub bound: Option<f64>,
    /// Pick `A` so that the asymptotic count equals this.
    pub target_count: Option<f64>,
    #[serde(default = "MataParams::default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "MataParams::default_ladder")]
    pub ladder: usize,
}

impl MataParams {
    fn default_tolerance() -> f64 {
        0.02
    }
    fn default_ladder() -> usize {
        10
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum CapacityParams {
    /// `{j_Ω ≤ s}` against the product rule over 1-D factors.
    ProductRule {
        domain: Domain,
        levels: Vec<f64>,
        #[serde(default = "default_machine_tolerance")]
        tolerance: f64,
    },
    Grid1d {
        /// Analytic shapes; exclusive with `mask`.
        shapes: Option<Vec<RegionShape>>,
        /// Path of a `mask v1` file.
        mask: Option<PathBuf>,
        resolution: usize,
        expected: Option<f64>,
        #[serde(default = "default_capacity_tolerance")]
        tolerance: f64,
    },
    Toric {
        region: LogRegion,
        #[serde(default = "default_truncation")]
        truncation: f64,
        resolution: usize,
        #[serde(default = "default_edge_band")]
        edge_band: usize,
        expected: Option<f64>,
        #[serde(default = "default_capacity_tolerance")]
        tolerance: f64,
    },
    /// `(4π)^N / dist^N` against the closed-form ball sub-levels.
    UpperBound {
        dim: usize,
        #[serde(default = "default_bound_samples")]
        samples: usize,
    },
}

fn default_machine_tolerance() -> f64 {
    1e-14
}
fn default_capacity_tolerance() -> f64 {
    0.03
}
fn default_truncation() -> f64 {
    4.0
}
fn default_edge_band() -> usize {
    2
}
fn default_bound_samples() -> usize {
    100
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Tensor grid on the torus of the given radius.
    Torus,
    /// Seeded points on the distinguished boundary of the gauge ball.
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WidthsParams {
    pub domain: Domain,
    pub radius: f64,
    #[serde(default = "WidthsParams::default_sampling")]
    pub sampling: Sampling,
    /// Torus points per axis, or boundary sample count.
    pub samples: Option<usize>,
    pub degree: u32,
    pub n_min: usize,
    pub n_max: usize,
    #[serde(default = "WidthsParams::default_tolerance")]
    pub tolerance: f64,
}

impl WidthsParams {
    fn default_sampling() -> Sampling {
        Sampling::Torus
    }
    fn default_tolerance() -> f64 {
        0.1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoodReinhardtParams {
    pub domain: Domain,
    #[serde(default = "GoodReinhardtParams::default_samples")]
    pub samples: usize,
    #[serde(default = "GoodReinhardtParams::default_p_max")]
    pub p_max: u32,
    #[serde(default = "GoodReinhardtParams::default_gauge_max")]
    pub gauge_max: f64,
}

impl GoodReinhardtParams {
    fn default_samples() -> usize {
        10_000
    }
    fn default_p_max() -> u32 {
        60
    }
    fn default_gauge_max() -> f64 {
        0.95
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilationParams {
    #[serde(default = "polydisk2")]
    pub domain: Domain,
    pub symbol: String,
    #[serde(default = "DilationParams::default_t")]
    pub t: Vec<f64>,
    #[serde(default = "DilationParams::default_n_max")]
    pub n_max: usize,
    /// Truncation degree for polynomial symbols; defaults to the smallest
    /// degree whose basis holds `n_max` values.
    pub degree: Option<u32>,
    #[serde(default = "DilationParams::default_tolerance")]
    pub tolerance: f64,
}

impl DilationParams {
    fn default_t() -> Vec<f64> {
        vec![0.9f64.ln(), 0.5f64.ln()]
    }
    fn default_n_max() -> usize {
        1000
    }
    fn default_tolerance() -> f64 {
        1e-8
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailsParams {
    #[serde(default = "TailsParams::default_m_max")]
    pub m_max: u32,
    #[serde(default = "TailsParams::default_l_max")]
    pub l_max: u64,
    #[serde(default = "TailsParams::default_x")]
    pub x: Vec<f64>,
    #[serde(default = "polydisk2")]
    pub domain: Domain,
    #[serde(default = "TailsParams::default_symbol")]
    pub symbol: String,
    #[serde(default = "TailsParams::default_degree")]
    pub degree: u32,
    #[serde(default = "TailsParams::default_step")]
    pub degree_step: u32,
}

impl TailsParams {
    fn default_m_max() -> u32 {
        6
    }
    fn default_l_max() -> u64 {
        100
    }
    fn default_x() -> Vec<f64> {
        (1..=9).map(|k| f64::from(k) / 10.0).collect()
    }
    fn default_symbol() -> String {
        "diag:0.5,0.3".into()
    }
    fn default_degree() -> u32 {
        20
    }
    fn default_step() -> u32 {
        10
    }
}

fn config_error(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        reason: reason.into(),
    }
}

fn ensure(ok: bool, field: &str, reason: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(config_error(field, reason))
    }
}

fn ensure_tolerance(t: f64, field: &str) -> Result<()> {
    ensure(
        t.is_finite() && t >= 0.0,
        field,
        format!("tolerance must be finite and non-negative, got {t}"),
    )
}

fn ensure_open_unit(v: f64, field: &str) -> Result<()> {
    ensure(v > 0.0 && v < 1.0, field, format!("must lie in (0,1), got {v}"))
}

impl ExperimentConfig {
    pub fn new(name: impl Into<String>, experiment: Experiment) -> Result<Self> {
        let config = Self {
            name: name.into(),
            seed: None,
            output: None,
            base_dir: PathBuf::from("."),
            experiment,
        };
        config.validate()?;
        Ok(config)
    }

    /// Parses TOML text; `default_name` is used when `name` is absent.
    pub fn parse(text: &str, default_name: &str) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| config_error("<file>", e.message().to_string()))?;
        let name = match table.remove("name") {
            None => default_name.to_string(),
            Some(toml::Value::String(s)) => s,
            Some(other) => {
                return Err(config_error(
                    "name",
                    format!("expected a string, got {}", other.type_str()),
                ))
            }
        };
        let seed = match table.remove("seed") {
            None => None,
            Some(toml::Value::Integer(i)) if i >= 0 => Some(i as u64),
            Some(other) => {
                return Err(config_error(
                    "seed",
                    format!("expected a non-negative integer, got {other}"),
                ))
            }
        };
        let output = match table.remove("output") {
            None => None,
            Some(toml::Value::String(s)) => Some(PathBuf::from(s)),
            Some(other) => {
                return Err(config_error(
                    "output",
                    format!("expected a path string, got {}", other.type_str()),
                ))
            }
        };
        let kind = table
            .get("kind")
            .and_then(|v| v.as_str())
            .unwrap_or("<missing>")
            .to_string();
        table
            .entry("params")
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        let experiment: Experiment = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| config_error(format!("{kind}.params"), e.message().to_string()))?;
        let config = Self {
            name,
            seed,
            output,
            base_dir: PathBuf::from("."),
            experiment,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("reading {}: {e}", path.display())))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("experiment");
        let mut config = Self::parse(&text, stem)?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(
            !self.name.is_empty()
                && self
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.')),
            "name",
            format!("`{}` must be non-empty and use only [A-Za-z0-9._-]", self.name),
        )?;
        match &self.experiment {
            Experiment::Kara(p) => {
                ensure(p.n_min >= 1, "n_min", "must be at least 1")?;
                ensure(p.n_max >= p.n_min + 2, "n_max", "must exceed n_min by at least 2")?;
                ensure(
                    (p.n_max as f64).powi(p.domain.dim() as i32) <= 5e7,
                    "n_max",
                    format!("n_max^N must stay below 5e7 for {}", p.domain),
                )?;
                ensure_tolerance(p.tolerance, "tolerance")?;
                ensure_tolerance(p.corrected_tolerance, "corrected_tolerance")?;
            }
            Experiment::Mata(p) => {
                ensure(
                    !p.sigma.is_empty() && p.sigma.iter().all(|s| s.is_finite() && *s > 0.0),
                    "sigma",
                    "weights must be positive and finite",
                )?;
                match (p.bound, p.target_count) {
                    (Some(a), None) => ensure(a.is_finite() && a > 0.0, "bound", "must be positive")?,
                    (None, Some(c)) => ensure((1.0..=1e9).contains(&c), "target_count", "must lie in [1, 1e9]")?,
                    _ => return Err(config_error("bound", "give exactly one of `bound` and `target_count`")),
                }
                ensure_tolerance(p.tolerance, "tolerance")?;
                ensure((1..=1000).contains(&p.ladder), "ladder", "must lie in 1..=1000")?;
            }
            Experiment::Capacity(p) => match p {
                CapacityParams::ProductRule {
                    domain,
                    levels,
                    tolerance,
                } => {
                    ensure(domain.is_toral(), "domain", "the product rule applies to polydisks")?;
                    ensure(!levels.is_empty(), "levels", "need at least one level")?;
                    for &s in levels {
                        ensure_open_unit(s, "levels")?;
                    }
                    ensure_tolerance(*tolerance, "tolerance")?;
                }
                CapacityParams::Grid1d {
                    shapes,
                    mask,
                    resolution,
                    expected,
                    tolerance,
                } => {
                    ensure(
                        shapes.is_some() != mask.is_some(),
                        "shapes",
                        "give exactly one of `shapes` and `mask`",
                    )?;
                    ensure((16..=8192).contains(resolution), "resolution", "must lie in 16..=8192")?;
                    if let Some(e) = expected {
                        ensure(*e > 0.0, "expected", "must be positive")?;
                    }
                    ensure_tolerance(*tolerance, "tolerance")?;
                }
                CapacityParams::Toric {
                    truncation,
                    resolution,
                    edge_band,
                    expected,
                    tolerance,
                    ..
                } => {
                    ensure(
                        *truncation > 0.0 && truncation.is_finite(),
                        "truncation",
                        "must be positive",
                    )?;
                    ensure((16..=4096).contains(resolution), "resolution", "must lie in 16..=4096")?;
                    ensure(
                        *edge_band < *resolution / 4,
                        "edge_band",
                        "must be below resolution / 4",
                    )?;
                    if let Some(e) = expected {
                        ensure(*e > 0.0, "expected", "must be positive")?;
                    }
                    ensure_tolerance(*tolerance, "tolerance")?;
                }
                CapacityParams::UpperBound { dim, samples } => {
                    ensure((1..=16).contains(dim), "dim", "must lie in 1..=16")?;
                    ensure((1..=1_000_000).contains(samples), "samples", "must lie in 1..=1e6")?;
                }
            },
            Experiment::Widths(p) => {
                ensure_open_unit(p.radius, "radius")?;
                ensure((1..=400).contains(&p.degree), "degree", "must lie in 1..=400")?;
                ensure(p.n_min >= 1, "n_min", "must be at least 1")?;
                ensure(
                    p.n_max >= p.n_min + 7,
                    "n_max",
                    "the rate fit needs at least 8 values of n",
                )?;
                if let Some(s) = p.samples {
                    ensure(s >= 1, "samples", "must be positive")?;
                }
                if p.sampling == Sampling::Torus {
                    ensure(p.domain.is_toral(), "sampling", "torus sampling needs a polydisk")?;
                }
                ensure_tolerance(p.tolerance, "tolerance")?;
            }
            Experiment::GoodReinhardt(p) => {
                ensure((1..=10_000_000).contains(&p.samples), "samples", "must lie in 1..=1e7")?;
                ensure(p.p_max <= 1000, "p_max", "must be at most 1000")?;
                ensure_open_unit(p.gauge_max, "gauge_max")?;
            }
            Experiment::Dilation(p) => {
                ensure(!p.t.is_empty(), "t", "need at least one dilation")?;
                ensure(
                    p.t.iter().all(|t| *t < 0.0 && t.is_finite()),
                    "t",
                    "dilations must be negative",
                )?;
                ensure((1..=1_000_000).contains(&p.n_max), "n_max", "must lie in 1..=1e6")?;
                ensure_tolerance(p.tolerance, "tolerance")?;
            }
            Experiment::Tails(p) => {
                ensure(p.m_max <= 30, "m_max", "must be at most 30")?;
                ensure((1..=100_000).contains(&p.l_max), "l_max", "must lie in 1..=1e5")?;
                ensure(!p.x.is_empty(), "x", "need at least one ratio")?;
                for &x in &p.x {
                    ensure_open_unit(x, "x")?;
                }
                ensure((1..=200).contains(&p.degree), "degree", "must lie in 1..=200")?;
                ensure((1..=50).contains(&p.degree_step), "degree_step", "must lie in 1..=50")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::parse("kind = \"kara\"\n[params]\nsymbol = \"diag:0.5,0.3\"\n", "k").unwrap();
        assert_eq!(c.name, "k");
        let Experiment::Kara(p) = &c.experiment else { panic!() };
        assert_eq!((p.n_min, p.n_max, p.tolerance), (5, 60, 0.05));
        assert_eq!(p.domain, Domain::Polydisk(2));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let top = ExperimentConfig::parse("kind = \"tails\"\ncolour = 1\n", "t").unwrap_err();
        assert!(matches!(top, Error::Config { .. }), "{top}");
        let inner = ExperimentConfig::parse("kind = \"tails\"\n[params]\nm_maxx = 3\n", "t").unwrap_err();
        assert!(inner.to_string().contains("m_maxx"), "{inner}");
        let kind = ExperimentConfig::parse("kind = \"nope\"\n", "t").unwrap_err();
        assert!(kind.to_string().contains("nope"), "{kind}");
    }

    #[test]
    fn ranges_name_the_field() {
        let err = ExperimentConfig::parse("kind = \"tails\"\n[params]\nx = [0.5, 1.5]\n", "t").unwrap_err();
        assert_eq!(
            err,
            Error::Config {
                field: "x".into(),
                reason: "must lie in (0,1), got 1.5".into()
            }
        );
        let err = ExperimentConfig::parse("kind = \"mata\"\n[params]\nsigma = [1.0]\n", "m").unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "bound"));
        let err = ExperimentConfig::parse("name = \"a b\"\nkind = \"tails\"\n", "t").unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "name"));
    }

    #[test]
    fn nested_capacity_methods() {
        let text = r#"
kind = "capacity"
[params]
method = "toric"
resolution = 240
region = { shape = "box", lo = [-1.0, -2.0], hi = [-0.5, -0.7] }
"#;
        let c = ExperimentConfig::parse(text, "c").unwrap();
        let Experiment::Capacity(CapacityParams::Toric { truncation, .. }) = c.experiment else {
            panic!()
        };
        assert_eq!(truncation, 4.0);
        let bad = text.replace("resolution = 240", "resolution = 240\nstencil = 2");
        assert!(ExperimentConfig::parse(&bad, "c").is_err());
        let union = text.replace(
            "region = { shape = \"box\"",
            "region = { shape = \"union\", parts = [{ shape = \"disk\", center = [-1.0, -1.0], radius = 0.2 }] }\nunused = { shape = \"box\"",
        );
        assert!(ExperimentConfig::parse(&union, "c").is_err());
        let union = text.replace(
            "region = { shape = \"box\", lo = [-1.0, -2.0], hi = [-0.5, -0.7] }",
            "region = { shape = \"union\", parts = [{ shape = \"box\", lo = [-1.0, -2.0], hi = [-0.5, -0.7] }] }",
        );
        let c = ExperimentConfig::parse(&union, "c").unwrap();
        let json = serde_json::to_string(&c.experiment).unwrap();
        assert!(json.contains("\"parts\""));
    }
}
