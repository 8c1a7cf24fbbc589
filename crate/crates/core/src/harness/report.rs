use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value as Json};
use sha2::{Digest, Sha256};

use crate::dynamics::Value;
use crate::error::Result;
use crate::harness::experiment::{ExperimentKind, RunOutput, RunResult};
use crate::rng::COIN_ALGORITHM;

/// One file written by a report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    /// Path relative to the report directory, with `/` separators.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Writes the artifacts of `runs` under `dir` plus a `manifest.json`
/// describing them. A single run writes directly into `dir`; several runs
/// get one subdirectory each, named by run id. Output depends only on the
/// runs, so repeated reports are byte-identical.
pub fn emit_report(dir: &Path, name: &str, runs: &[RunOutput]) -> Result<Vec<FileEntry>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut run_entries = Vec::new();
    for run in runs {
        let sub = if runs.len() == 1 {
            PathBuf::new()
        } else {
            PathBuf::from(&run.config.id)
        };
        fs::create_dir_all(dir.join(&sub))?;
        let written = write_run(dir, &sub, run)?;
        run_entries.push(run_manifest(run, &written));
        files.extend(written);
    }
    let manifest = json!({
        "name": name,
        "rng_algorithm": COIN_ALGORITHM,
        "defaults": {
            "bins": 20,
            "burn_in": 0,
            "histogram_bins": "equal width, right-open except the last",
            "walk_histogram": "preimages x_-1 .. x_-p, the start excluded",
        },
        "runs": run_entries,
        "files": files,
    });
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(dir.join("manifest.json"), text)?;
    Ok(files)
}

fn run_manifest(run: &RunOutput, files: &[FileEntry]) -> Json {
    json!({
        "id": run.config.id,
        "config": run.config,
        "seed": run.config.seed,
        "backend": backend_id(run),
        "represented": {
            "N": run.represented_bound,
            "x0": run.represented_x0,
        },
        "errata": run.errata,
        "files": files.iter().map(|f| &f.path).collect::<Vec<_>>(),
    })
}

fn backend_id(run: &RunOutput) -> String {
    match run.config.kind {
        ExperimentKind::SineMap => "f64".into(),
        ExperimentKind::Backward => "rational".into(),
        _ => run
            .config
            .validate()
            .ok()
            .and_then(|p| p.map)
            .map_or_else(|| run.config.backend.clone(), |m| m.backend().to_string()),
    }
}

struct Sink<'a> {
    root: &'a Path,
    sub: &'a Path,
    files: Vec<FileEntry>,
}

impl Sink<'_> {
    fn put(&mut self, name: &str, bytes: Vec<u8>) -> Result<()> {
        let rel = self.sub.join(name);
        fs::write(self.root.join(&rel), &bytes)?;
        self.files.push(FileEntry {
            path: rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect::<Vec<_>>()
                .join("/"),
            sha256: hex::encode(Sha256::digest(&bytes)),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_vec_pretty(value)?;
        text.push(b'\n');
        self.put(name, text)
    }

    fn with<F>(&mut self, name: &str, f: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.put(name, buf)
    }
}

fn write_run(root: &Path, sub: &Path, run: &RunOutput) -> Result<Vec<FileEntry>> {
    let mut sink = Sink {
        root,
        sub,
        files: Vec::new(),
    };
    match &run.result {
        RunResult::Trajectory(values) => {
            sink.with("trajectory.csv", |b| write_trajectory(b, values))?;
        }
        RunResult::Orbit(outcome) => {
            sink.json("orbit.json", outcome)?;
            sink.with("trajectory.csv", |b| {
                write_trajectory(b, outcome.trajectory())
            })?;
        }
        RunResult::Basin { orbit, forest } => {
            sink.with("edges.csv", |b| forest.write_edges_csv(b))?;
            sink.json(
                "cycle.json",
                &json!({
                    "N": forest.bound,
                    "cycle": forest.cycle,
                    "nodes": forest.len(),
                    "orbit": orbit,
                }),
            )?;
            sink.put("tree.txt", forest.render_text().into_bytes())?;
        }
        RunResult::Backward {
            walk,
            histogram,
            consistency,
        } => {
            sink.with("walk.csv", |b| walk.write_csv(b))?;
            sink.with("histogram.csv", |b| histogram.write_csv(b))?;
            sink.json(
                "consistency.json",
                &json!({
                    "walk": {
                        "seed": walk.seed,
                        "rng_algorithm": walk.algorithm,
                        "steps": walk.steps(),
                        "precision_cap": walk.precision_cap,
                        "truncated_from": walk.truncated_from,
                    },
                    "histogram": {
                        "bins": histogram.bins(),
                        "total": histogram.total,
                        "sup_norm": histogram.sup_norm,
                        "chi_square": histogram.chi_square,
                    },
                    "forward_check": consistency,
                    "ends_in_even_cycle": consistency.ends_in_even_cycle(),
                }),
            )?;
        }
        RunResult::ForwardHistogram { outcome, histogram } => {
            sink.with("histogram.csv", |b| histogram.write_csv(b))?;
            sink.json(
                "orbit.json",
                &json!({
                    "orbit": outcome,
                    "histogram": {
                        "bins": histogram.bins(),
                        "total": histogram.total,
                        "sup_norm": histogram.sup_norm,
                        "chi_square": histogram.chi_square,
                    },
                }),
            )?;
        }
        RunResult::Errors(series) => {
            sink.with("errors.csv", |b| series.write_csv(b))?;
        }
        RunResult::Sine(orbit) => {
            sink.json(
                "sine.json",
                &json!({
                    "y0": run.represented_x0,
                    "max_steps": run.config.steps,
                    "result": orbit,
                }),
            )?;
        }
    }
    Ok(sink.files)
}

/// `t,value,bits` rows; `bits` is empty outside the fixed-point backend.
pub fn write_trajectory<W: Write>(out: W, values: &[Value]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "value", "bits"])?;
    for (t, v) in values.iter().enumerate() {
        w.write_record([
            t.to_string(),
            v.to_decimal_string(),
            v.bit_string().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
