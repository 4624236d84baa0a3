//! Matplotlib scripts that read only the CSV artifacts next to them.

use std::path::{Path, PathBuf};

use super::{Artifact, ExperimentReport};
use crate::error::{Error, Result};

const PRELUDE: &str = r#"import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def load(name):
    with open(os.path.join(HERE, name), newline="") as f:
        rows = list(csv.DictReader(f))
    return {k: [float(r[k]) for r in rows] for k in rows[0]} if rows else {}


def save(fig, name):
    out = os.path.join(HERE, name)
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    print(out)

"#;

fn body(report: &ExperimentReport, a: &Artifact) -> Option<String> {
    let stem = a.file.trim_end_matches(".csv");
    let file = &a.file;
    let title = format!("{} ({})", report.name, a.role);
    let s = match a.role.as_str() {
        "spectrum" => format!(
            r#"d = load("{file}")
fig, ax = plt.subplots()
ax.semilogy(d["n"], d["a_n"], ".", ms=2, label="a_n")
ax.fill_between(d["n"], d["lower"], d["upper"], alpha=0.3, label="bracket")
ax.set_xlabel("n")
ax.set_ylabel("a_n")
ax.set_title("{title}")
ax.legend()
save(fig, "{stem}.png")
"#
        ),
        "beta" => {
            let gamma = report.summary.get("gamma_target").copied().unwrap_or(f64::NAN);
            let line = if gamma.is_finite() {
                format!("ax.axhline({gamma:?}, color=\"k\", ls=\"--\", label=\"Gamma_N\")\n")
            } else {
                String::new()
            };
            format!(
                r#"d = load("{file}")
fig, ax = plt.subplots()
ax.plot(d["n"], d["b_n"], "o-", ms=3, label="b_n")
ax.plot(d["n"], d["beta_minus"], ":", label="inf tail")
ax.plot(d["n"], d["beta_plus"], ":", label="sup tail")
{line}ax.set_xlabel("n")
ax.set_ylabel("a_(n^N)^(1/n)")
ax.set_title("{title}")
ax.legend()
save(fig, "{stem}.png")
"#
            )
        }
        "widths" => {
            let slope = report.summary.get("slope").copied();
            let intercept = report.summary.get("intercept").copied();
            let fit = match (slope, intercept) {
                (Some(k), Some(c)) => format!(
                    r#"dim = {dim}
ns = [n for n in range(1, int(max(d["n"])) + 1) if n ** dim <= max(d["n"])]
ax.semilogy([n ** dim for n in ns], [2.718281828459045 ** -({c:?} + {k:?} * n) for n in ns], "k--", label="rate fit")
"#,
                    dim = report
                        .parameters
                        .pointer("/params/domain")
                        .and_then(|v| v.as_str())
                        .and_then(|s| s.parse::<crate::domains::Domain>().ok())
                        .map_or(1, |d| d.dim()),
                ),
                _ => String::new(),
            };
            format!(
                r#"d = load("{file}")
fig, ax = plt.subplots()
ax.fill_between(d["n"], d["lower"], d["upper"], alpha=0.3, label="width bracket")
ax.semilogy(d["n"], [(lo * up) ** 0.5 for lo, up in zip(d["lower"], d["upper"])], "-", label="geometric mean")
{fit}ax.set_yscale("log")
ax.set_xlabel("n")
ax.set_ylabel("d_n")
ax.set_title("{title}")
ax.legend()
save(fig, "{stem}.png")
"#
            )
        }
        "dilation" => format!(
            r#"d = load("{file}")
fig, ax = plt.subplots()
for key in d:
    if key != "n":
        ax.semilogy(d["n"], d[key], ".", ms=2, label=key)
ax.set_xlabel("n")
ax.set_ylabel("a_n")
ax.set_title("{title}")
ax.legend()
save(fig, "{stem}.png")
"#
        ),
        "counts" => format!(
            r#"d = load("{file}")
fig, ax = plt.subplots()
ax.plot(d["bound"], d["ratio"], "o-")
ax.axhline(1.0, color="k", ls="--")
ax.set_xlabel("A")
ax.set_ylabel("count / asymptotic")
ax.set_title("{title}")
save(fig, "{stem}.png")
"#
        ),
        _ => return None,
    };
    Some(s)
}

/// Writes one `plot_<stem>.py` per plottable artifact into `dir`.
pub fn emit_plots_in(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for a in &report.artifacts {
        let Some(body) = body(report, a) else { continue };
        if written.is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        }
        let path = dir.join(format!("plot_{}.py", a.file.trim_end_matches(".csv")));
        let script = format!("{PRELUDE}\n{body}\nsys.exit(0)\n");
        std::fs::write(&path, script).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}

/// Writes plot scripts next to the report's CSV files.
pub fn emit_plots(report: &ExperimentReport) -> Result<Vec<PathBuf>> {
    emit_plots_in(report, &report.output_dir)
}
