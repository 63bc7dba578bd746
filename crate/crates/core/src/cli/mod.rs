//! Command-line front end: suite runs, listings and the golden corpus.

mod args;
pub mod golden;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exprdsl::{parse_geometry, Params};
use crate::models::{self, ModelBundle, BUILTIN_NAMES};
use crate::report::{CheckReport, Real, Tolerances, Verdict};
use crate::suites::{self, SuiteError, SuiteInput, SUITE_NAMES};

pub use args::{main_with_args, Cli, Command};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_SAMPLES: usize = 100;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_RESOLUTION: i32 = 2;
pub const EXIT_EVALUATION: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSource {
    Given,
    /// Drawn from OS entropy because no seed was supplied.
    Entropy,
}

/// A fully resolved request to run one suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub suite: String,
    /// Builtin model name or path to a geometry file.
    pub geometry: String,
    pub params: BTreeMap<String, Real>,
    pub samples: usize,
    pub seed: u64,
    pub seed_source: SeedSource,
    pub tolerances: Tolerances,
}

impl SuiteSpec {
    pub fn new(suite: &str, geometry: &str, samples: usize, seed: u64) -> Self {
        SuiteSpec {
            suite: suite.to_string(),
            geometry: geometry.to_string(),
            params: BTreeMap::new(),
            samples,
            seed,
            seed_source: SeedSource::Given,
            tolerances: Tolerances::default(),
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), Real(value));
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub spec: SuiteSpec,
    pub model: String,
    pub checks: Vec<CheckReport>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<Real>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.verdict == Verdict::Fail {
            EXIT_FAIL
        } else {
            EXIT_PASS
        }
    }

    pub fn failing(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Canonical JSON: fixed field order, 17-digit reals, no wall time.
    pub fn canonical_json(&self) -> String {
        let mut r = self.clone();
        r.wall_time_seconds = None;
        let mut s = serde_json::to_string_pretty(&r).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Resolve(String),
    #[error(transparent)]
    Suite(#[from] SuiteError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Resolve(_) => EXIT_RESOLUTION,
            RunError::Suite(e) => e.exit_code(),
        }
    }
}

/// Loads a builtin model by name, otherwise reads the geometry file.
pub fn resolve_geometry(geometry: &str, params: &BTreeMap<String, Real>) -> Result<ModelBundle, RunError> {
    let p: Params = params.iter().map(|(k, v)| (k.clone(), v.0)).collect();
    if BUILTIN_NAMES.contains(&geometry) {
        return models::builtin(geometry, &p).map_err(|e| RunError::Resolve(format!("model {geometry}: {e}")));
    }
    let path = Path::new(geometry);
    if !path.is_file() {
        return Err(RunError::Resolve(format!(
            "`{geometry}` is neither a builtin model ({}) nor a readable file",
            BUILTIN_NAMES.join(", ")
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Resolve(format!("{geometry}: {e}")))?;
    let doc = parse_geometry(&text).map_err(|e| RunError::Resolve(format!("{geometry}: {e}")))?;
    models::from_document(doc, &p).map_err(|e| RunError::Resolve(format!("{geometry}: {e}")))
}

pub fn run(spec: &SuiteSpec) -> Result<RunReport, RunError> {
    if !SUITE_NAMES.contains(&spec.suite.as_str()) {
        return Err(SuiteError::Unknown(spec.suite.clone()).into());
    }
    let start = Instant::now();
    let bundle = resolve_geometry(&spec.geometry, &spec.params)?;
    let input = SuiteInput { bundle: &bundle, samples: spec.samples, seed: spec.seed, tol: spec.tolerances };
    let checks = suites::run_suite(&spec.suite, &input)?;
    let verdict = if checks.iter().all(|c| c.passed()) { Verdict::Pass } else { Verdict::Fail };
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        spec: spec.clone(),
        model: bundle.name.clone(),
        checks,
        verdict,
        wall_time_seconds: Some(Real(start.elapsed().as_secs_f64())),
    })
}

pub fn write_text(out: &mut dyn Write, report: &RunReport) -> std::io::Result<()> {
    let s = &report.spec;
    writeln!(out, "suite {} on {} ({} samples, seed {})", s.suite, report.model, s.samples, s.seed)?;
    if s.seed_source == SeedSource::Entropy {
        writeln!(out, "seed drawn from entropy; pass --seed {} to reproduce", s.seed)?;
    }
    for c in &report.checks {
        writeln!(out, "{c}")?;
    }
    let tag = match report.verdict {
        Verdict::Fail => "FAIL",
        _ => "PASS",
    };
    let failed = report.failing().count();
    write!(out, "{tag}: {} checks, {failed} failed", report.checks.len())?;
    if let Some(t) = report.wall_time_seconds {
        write!(out, ", {:.3}s", t.0)?;
    }
    writeln!(out)
}

pub fn write_list(out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "suites:")?;
    for s in SUITE_NAMES {
        writeln!(out, "  {s:<20} {}", suites::description(s).unwrap_or(""))?;
    }
    writeln!(out, "models:")?;
    for m in BUILTIN_NAMES {
        let b = models::builtin(m, &Params::new()).map_err(std::io::Error::other)?;
        writeln!(out, "  {m:<20} {}", b.summary)?;
        for p in &b.params {
            writeln!(out, "      --param {}=<value>  default {}  {}", p.name, p.default, p.doc)?;
        }
        for (k, v) in &b.geometry.params {
            if !b.params.iter().any(|p| p.name == k) {
                writeln!(out, "      --param {k}=<value>  default {v}")?;
            }
        }
    }
    Ok(())
}
