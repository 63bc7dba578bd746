//! Pinned suite runs and their stored JSON reports.

use std::path::{Path, PathBuf};

use serde_json::Value;
use thiserror::Error;

use crate::models::{self, BUILTIN_NAMES};
use crate::exprdsl::Params;
use crate::report::Tolerances;

use super::{run, RunError, SuiteSpec};

pub const GOLDEN_ENV: &str = "NEUTRAL4_GOLDEN_DIR";
pub const GOLDEN_SAMPLES: usize = 20;
pub const FLOAT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GoldenError {
    #[error("golden directory {0} does not exist")]
    MissingDir(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{file}: {source}")]
    Run { file: String, source: RunError },
    #[error("{file}: invalid JSON: {message}")]
    Json { file: String, message: String },
}

pub fn default_dir() -> PathBuf {
    match std::env::var_os(GOLDEN_ENV) {
        Some(d) => PathBuf::from(d),
        None => PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/golden")),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoldenEntry {
    pub file: String,
    pub spec: SuiteSpec,
}

fn entry(spec: SuiteSpec) -> GoldenEntry {
    let mut file = format!("{}.{}.n{}.seed{}", spec.geometry, spec.suite, spec.samples, spec.seed);
    for (k, v) in &spec.params {
        file.push_str(&format!(".{k}={}", v.0));
    }
    if spec.tolerances != Tolerances::default() {
        file.push_str(&format!(".tol={:e}", spec.tolerances.first()));
    }
    file.push_str(".json");
    GoldenEntry { file, spec }
}

/// Every manifest suite of every shipped model, plus the runs quoted in the
/// documentation.
pub fn pinned() -> Vec<GoldenEntry> {
    let mut out = Vec::new();
    for m in BUILTIN_NAMES {
        let b = models::builtin(m, &Params::new()).expect("shipped models load");
        for s in &b.manifest {
            let seed = if *s == "hopf_remark" { 42 } else { 1 };
            out.push(entry(SuiteSpec::new(s, m, GOLDEN_SAMPLES, seed)));
        }
    }
    let mut hopf = SuiteSpec::new("para_hyperhermitian", "hopf", 100, 1);
    hopf.tolerances = Tolerances::uniform(1e-8);
    out.push(entry(hopf));
    out.push(entry(SuiteSpec::new("david", "petean_torus", 50, 7)));
    out.push(entry(SuiteSpec::new("curvature", "sl2r_r", 100, 1)));
    out.push(entry(SuiteSpec::new("inoue_invariance", "inoue_s_plus", GOLDEN_SAMPLES, 1).with_param("t2", 1.0)));
    out
}

fn render(e: &GoldenEntry) -> Result<String, GoldenError> {
    run(&e.spec)
        .map(|r| r.canonical_json())
        .map_err(|source| GoldenError::Run { file: e.file.clone(), source })
}

/// Regenerates every pinned report; returns the written paths.
pub fn update(dir: &Path) -> Result<Vec<PathBuf>, GoldenError> {
    std::fs::create_dir_all(dir).map_err(|source| GoldenError::Io { path: dir.to_path_buf(), source })?;
    let mut written = Vec::new();
    for e in pinned() {
        let text = render(&e)?;
        let path = dir.join(&e.file);
        std::fs::write(&path, text).map_err(|source| GoldenError::Io { path: path.clone(), source })?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FileOutcome {
    pub file: String,
    pub byte_identical: bool,
    /// Field paths whose values differ beyond [`FLOAT_TOLERANCE`].
    pub diffs: Vec<String>,
    pub missing: bool,
}

impl FileOutcome {
    pub fn passed(&self) -> bool {
        !self.missing && self.diffs.is_empty()
    }
}

pub fn verify(dir: &Path) -> Result<Vec<FileOutcome>, GoldenError> {
    if !dir.is_dir() {
        return Err(GoldenError::MissingDir(dir.to_path_buf()));
    }
    let mut out = Vec::new();
    for e in pinned() {
        let path = dir.join(&e.file);
        let stored = match std::fs::read_to_string(&path) {
            Ok(s) => s,
            Err(_) => {
                out.push(FileOutcome { file: e.file.clone(), byte_identical: false, diffs: Vec::new(), missing: true });
                continue;
            }
        };
        let fresh = render(&e)?;
        let parse = |s: &str| {
            serde_json::from_str::<Value>(s).map_err(|err| GoldenError::Json { file: e.file.clone(), message: err.to_string() })
        };
        let diffs = if stored == fresh { Vec::new() } else { compare_json(&parse(&stored)?, &parse(&fresh)?) };
        out.push(FileOutcome { file: e.file, byte_identical: stored == fresh, diffs, missing: false });
    }
    Ok(out)
}

/// Paths at which two JSON documents differ; numbers match within
/// [`FLOAT_TOLERANCE`] relative to `max(1, |expected|)`.
pub fn compare_json(expected: &Value, actual: &Value) -> Vec<String> {
    let mut diffs = Vec::new();
    walk("$", expected, actual, &mut diffs);
    diffs
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.to_string().parse().ok(),
        _ => None,
    }
}

fn walk(path: &str, a: &Value, b: &Value, diffs: &mut Vec<String>) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            for (k, va) in x {
                match y.get(k) {
                    Some(vb) => walk(&format!("{path}.{k}"), va, vb, diffs),
                    None => diffs.push(format!("{path}.{k}: missing")),
                }
            }
            for k in y.keys().filter(|k| !x.contains_key(*k)) {
                diffs.push(format!("{path}.{k}: unexpected"));
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                diffs.push(format!("{path}: length {} != {}", x.len(), y.len()));
                return;
            }
            for (i, (va, vb)) in x.iter().zip(y).enumerate() {
                walk(&format!("{path}[{i}]"), va, vb, diffs);
            }
        }
        (Value::Number(_), Value::Number(_)) => {
            let (p, q) = (number(a).unwrap_or(f64::NAN), number(b).unwrap_or(f64::NAN));
            if !((p - q).abs() <= FLOAT_TOLERANCE * p.abs().max(1.0)) {
                diffs.push(format!("{path}: {a} != {b}"));
            }
        }
        _ => {
            if a != b {
                diffs.push(format!("{path}: {a} != {b}"));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinned_files_are_unique() {
        let p = pinned();
        let mut names: Vec<&str> = p.iter().map(|e| e.file.as_str()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), p.len());
        assert!(names.contains(&"hopf.para_hyperhermitian.n100.seed1.tol=1e-8.json"));
        assert!(names.contains(&"inoue_s_plus.inoue_invariance.n20.seed1.t2=1.json"));
    }

    #[test]
    fn comparison_reports_paths() {
        let a: Value = serde_json::from_str(r#"{"x": [1.0, 2.0], "s": "a", "y": 1}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"x": [1.0, 2.0000000000001], "s": "b", "z": 1}"#).unwrap();
        let d = compare_json(&a, &b);
        assert_eq!(d.len(), 3, "{d:?}");
        assert!(d[0].starts_with("$.s"));
        assert_eq!(d[1], "$.y: missing");
        assert_eq!(d[2], "$.z: unexpected");
        let c: Value = serde_json::from_str(r#"{"x": [1.0, 2.1], "s": "a", "y": 1}"#).unwrap();
        assert_eq!(compare_json(&a, &c), vec!["$.x[1]: 2.0 != 2.1".to_string()]);
    }
}
