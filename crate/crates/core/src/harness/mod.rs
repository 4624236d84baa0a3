//! Experiment plumbing: configs in, CSV/JSON reports and plot scripts out.

mod config;
mod experiments;
mod plots;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use config::{
    CapacityParams, DilationParams, Experiment, ExperimentConfig, GoodReinhardtParams, KaraParams, MataParams,
    Sampling, TailsParams, WidthsParams, DEFAULT_SEED,
};
pub use plots::{emit_plots, emit_plots_in};

pub const REPORT_FILE: &str = "report.json";
pub const SUITE_FILE: &str = "suite.json";

/// Serializes non-finite floats as `null` and reads `null` back as NaN.
mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|observed - expected| ≤ tolerance · |expected|`.
    Relative,
    /// `|observed - expected| ≤ tolerance`.
    Absolute,
    /// `observed ≤ expected + tolerance`.
    AtMost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    #[serde(with = "nullable")]
    pub observed: f64,
    #[serde(with = "nullable")]
    pub expected: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    /// Where `expected` comes from.
    pub oracle: String,
}

impl Verdict {
    pub fn new(
        name: impl Into<String>,
        observed: f64,
        expected: f64,
        tolerance: f64,
        comparison: Comparison,
        oracle: impl Into<String>,
    ) -> Self {
        let passed = match comparison {
            Comparison::Relative => (observed - expected).abs() <= tolerance * expected.abs(),
            Comparison::Absolute => (observed - expected).abs() <= tolerance,
            Comparison::AtMost => observed <= expected + tolerance,
        };
        Self {
            name: name.into(),
            passed,
            observed,
            expected,
            tolerance,
            comparison,
            oracle: oracle.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub role: String,
    /// File name inside the report directory.
    pub file: String,
    pub columns: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSource {
    Default,
    Config,
    Override,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub kind: String,
    pub seed: u64,
    pub seed_source: SeedSource,
    /// The config with defaults filled in.
    pub parameters: serde_json::Value,
    pub verdicts: Vec<Verdict>,
    pub artifacts: Vec<Artifact>,
    pub summary: BTreeMap<String, f64>,
    /// Methods, oracles and resolutions, in pipeline order.
    pub provenance: Vec<String>,
    pub output_dir: PathBuf,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_root: PathBuf,
    /// Overrides every config seed.
    pub seed: Option<u64>,
}

impl RunOptions {
    pub fn new(out_root: impl Into<PathBuf>) -> Self {
        Self {
            out_root: out_root.into(),
            seed: None,
        }
    }
}

pub(crate) struct Outcome {
    pub verdicts: Vec<Verdict>,
    pub artifacts: Vec<(Artifact, String)>,
    pub summary: BTreeMap<String, f64>,
    pub provenance: Vec<String>,
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Runs one experiment, writing its CSV files and `report.json` under
/// `out_root/<name>` (or `out_root/<output>`).
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Result<ExperimentReport> {
    config.validate()?;
    let (seed, seed_source) = match (options.seed, config.seed) {
        (Some(s), _) => (s, SeedSource::Override),
        (None, Some(s)) => (s, SeedSource::Config),
        (None, None) => (DEFAULT_SEED, SeedSource::Default),
    };
    let outcome = experiments::execute(config, seed).map_err(|e| Error::Experiment {
        name: config.name.clone(),
        source: Box::new(e),
    })?;

    let dir = options
        .out_root
        .join(config.output.clone().unwrap_or_else(|| PathBuf::from(&config.name)));
    std::fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    let mut artifacts = Vec::new();
    for (artifact, content) in outcome.artifacts {
        let path = dir.join(&artifact.file);
        std::fs::write(&path, content).map_err(|e| io_error(&path, e))?;
        artifacts.push(artifact);
    }
    let parameters = serde_json::to_value(&config.experiment).map_err(|e| Error::Io(e.to_string()))?;
    let mut report = ExperimentReport {
        name: config.name.clone(),
        kind: config.experiment.kind().to_string(),
        seed,
        seed_source,
        parameters,
        verdicts: outcome.verdicts,
        artifacts,
        summary: outcome.summary.into_iter().filter(|(_, v)| v.is_finite()).collect(),
        provenance: outcome.provenance,
        output_dir: dir.clone(),
        passed: false,
    };
    report.passed = report.all_passed();
    let path = dir.join(REPORT_FILE);
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(&path, json).map_err(|e| io_error(&path, e))?;
    Ok(report)
}

pub fn read_report(path: &Path) -> Result<ExperimentReport> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub config: PathBuf,
    pub name: String,
    pub passed: bool,
    /// Set when the experiment could not run to completion.
    pub error: Option<String>,
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub entries: Vec<SuiteEntry>,
    pub passed: bool,
}

/// Runs every `*.toml` in `dir` (sorted by file name) on up to `workers`
/// threads and writes `suite.json` to the output root.
pub fn run_suite(dir: &Path, options: &RunOptions, workers: usize) -> Result<SuiteReport> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| io_error(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Config {
            field: "<suite>".into(),
            reason: format!("no .toml configs in {}", dir.display()),
        });
    }
    let configs: Vec<(PathBuf, Result<ExperimentConfig>)> = paths
        .into_iter()
        .map(|p| (p.clone(), ExperimentConfig::load(&p)))
        .collect();
    let mut seen = BTreeMap::new();
    for (path, config) in &configs {
        if let Ok(c) = config {
            let out = c.output.clone().unwrap_or_else(|| PathBuf::from(&c.name));
            if let Some(other) = seen.insert(out.clone(), path.clone()) {
                return Err(Error::Config {
                    field: "name".into(),
                    reason: format!(
                        "{} and {} both write to {}",
                        other.display(),
                        path.display(),
                        out.display()
                    ),
                });
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    let entries: Vec<SuiteEntry> = pool.install(|| {
        configs
            .par_iter()
            .map(|(path, config)| {
                let fallback = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("experiment")
                    .to_string();
                match config
                    .as_ref()
                    .map_err(Clone::clone)
                    .and_then(|c| run_experiment(c, options))
                {
                    Ok(report) => SuiteEntry {
                        config: path.clone(),
                        name: report.name.clone(),
                        passed: report.passed,
                        error: None,
                        report: Some(report.output_dir.join(REPORT_FILE)),
                    },
                    Err(e) => SuiteEntry {
                        config: path.clone(),
                        name: config.as_ref().map(|c| c.name.clone()).unwrap_or(fallback),
                        passed: false,
                        error: Some(e.to_string()),
                        report: None,
                    },
                }
            })
            .collect()
    });
    let suite = SuiteReport {
        passed: entries.iter().all(|e| e.passed),
        entries,
    };
    std::fs::create_dir_all(&options.out_root).map_err(|e| io_error(&options.out_root, e))?;
    let path = options.out_root.join(SUITE_FILE);
    let json = serde_json::to_string_pretty(&suite).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(&path, json).map_err(|e| io_error(&path, e))?;
    Ok(suite)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_comparisons() {
        assert!(Verdict::new("a", 1.04, 1.0, 0.05, Comparison::Relative, "").passed);
        assert!(!Verdict::new("a", 1.06, 1.0, 0.05, Comparison::Relative, "").passed);
        assert!(Verdict::new("a", 0.0, 0.0, 0.0, Comparison::AtMost, "").passed);
        assert!(!Verdict::new("a", f64::NAN, 1.0, 1.0, Comparison::Absolute, "").passed);
    }

    #[test]
    fn nan_survives_json() {
        let v = Verdict::new("a", f64::NAN, 1.0, 0.1, Comparison::Relative, "x");
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.contains("\"observed\":null"));
        let back: Verdict = serde_json::from_str(&json).unwrap();
        assert!(back.observed.is_nan() && !back.passed);
    }
}
