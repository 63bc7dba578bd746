//! Named check suites run against a model bundle.
//!
//! Every suite samples its points from the bundle's domain with the given
//! seed and returns one [`CheckReport`] per clause, named `suite/clause`.

mod curvature;
mod fields;
mod inoue;
mod oracle;
mod structure;

use std::fmt::Display;

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::linalg::Vec4;
use crate::geometry::sample;
use crate::models::ModelBundle;
use crate::report::{CheckReport, Tolerances};

pub use oracle::{finite_difference_jet, HOPF_ATTEMPTS, HOPF_CONTROL_ATTEMPTS};

pub const SUITE_NAMES: [&str; 10] = [
    "signature",
    "curvature",
    "weyl_split",
    "para_hyperhermitian",
    "killing_pair",
    "david",
    "lee",
    "inoue_invariance",
    "hopf_remark",
    "ad_oracle",
];

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown suite `{0}`")]
    Unknown(String),
    #[error("suite `{suite}` does not apply to geometry `{geometry}`")]
    NotApplicable { suite: String, geometry: String },
    #[error("{operation}: {message}")]
    Eval { operation: String, message: String },
}

pub type SuiteResult<T> = Result<T, SuiteError>;

impl SuiteError {
    /// 2 for resolution problems, 3 for evaluation failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            SuiteError::Unknown(_) | SuiteError::NotApplicable { .. } => 2,
            SuiteError::Eval { .. } => 3,
        }
    }
}

#[derive(Clone, Copy)]
pub struct SuiteInput<'a> {
    pub bundle: &'a ModelBundle,
    pub samples: usize,
    pub seed: u64,
    pub tol: Tolerances,
}

impl SuiteInput<'_> {
    pub fn points(&self) -> Vec<Vec4> {
        sample::sample_points(&self.bundle.geometry.domain, self.samples, self.seed)
    }

    /// The bundle's name if it is a shipped model.
    pub fn model(&self) -> Option<&str> {
        self.bundle.builtin.then_some(self.bundle.name.as_str())
    }
}

pub fn description(name: &str) -> Option<&'static str> {
    Some(match name {
        "signature" => "metric has signature (2,2) at every sample",
        "curvature" => "Levi-Civita connection, Riemann symmetries, Bianchi, model curvature values",
        "weyl_split" => "Weyl halves on the Hodge eigenbivectors; vanishing half under the structure orientation",
        "para_hyperhermitian" => "null-pair construction of (I, S, T) and the integrability relations",
        "killing_pair" => "distinguished pair null, orthogonal, independent and Killing",
        "david" => "gated clauses on orthogonal null conformal Killing pairs",
        "lee" => "Lee forms: equality, closedness and model values",
        "inoue_invariance" => "coframe identities and invariance under the deck generators",
        "hopf_remark" => "multi-start search for commuting null Killing pairs on S^1 x SU(2)",
        "ad_oracle" => "jets of every document expression against Richardson finite differences",
        _ => return None,
    })
}

const NEEDS_PAIR: [&str; 4] = ["para_hyperhermitian", "killing_pair", "david", "lee"];

pub fn run_suite(name: &str, input: &SuiteInput) -> SuiteResult<Vec<CheckReport>> {
    if NEEDS_PAIR.contains(&name) && !input.bundle.pair_declared {
        return Err(not_applicable(name, input));
    }
    match name {
        "signature" => curvature::signature(input),
        "curvature" => curvature::curvature(input),
        "weyl_split" => curvature::weyl_split(input),
        "para_hyperhermitian" => structure::para_hyperhermitian(input),
        "killing_pair" => fields::killing_pair(input),
        "david" => fields::david(input),
        "lee" => structure::lee(input),
        "inoue_invariance" => inoue::inoue_invariance(input),
        "hopf_remark" => oracle::hopf_remark(input),
        "ad_oracle" => oracle::ad_oracle(input),
        other => Err(SuiteError::Unknown(other.to_string())),
    }
}

pub(crate) fn eval_err<E: Display>(operation: &str) -> impl Fn(E) -> SuiteError + '_ {
    move |e| SuiteError::Eval { operation: operation.to_string(), message: e.to_string() }
}

/// Evaluates `f` at every point in parallel, keeping point order.
pub(crate) fn per_point<T, E, F>(points: &[Vec4], operation: &str, f: F) -> SuiteResult<Vec<T>>
where
    T: Send,
    E: Display,
    F: Fn(&Vec4) -> Result<T, E> + Sync,
{
    points
        .par_iter()
        .map(|p| {
            f(p).map_err(|e| SuiteError::Eval { operation: operation.to_string(), message: format!("at {p:?}: {e}") })
        })
        .collect()
}

pub(crate) fn not_applicable(suite: &str, input: &SuiteInput) -> SuiteError {
    SuiteError::NotApplicable { suite: suite.to_string(), geometry: input.bundle.name.clone() }
}

pub(crate) fn prefixed(suite: &str, mut r: CheckReport) -> CheckReport {
    if !r.name.starts_with(&format!("{suite}/")) {
        r.name = format!("{suite}/{}", r.name);
    }
    r
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(*x))
}

/// `(ok, note)` for a hypothesis whose residuals must stay below `tol`.
pub(crate) fn gate(what: &str, residuals: &[f64], tol: f64) -> (bool, String) {
    let worst = max_of(residuals);
    if worst <= tol && residuals.iter().all(|r| r.is_finite()) {
        (true, format!("hypothesis holds: {what} (max residual {worst:e})"))
    } else {
        (false, format!("hypothesis fails: {what} (max residual {worst:e})"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::Params;
    use crate::models::builtin;

    #[test]
    fn registry_descriptions_cover_all_suites() {
        for s in SUITE_NAMES {
            assert!(description(s).is_some(), "{s}");
        }
        assert!(description("nope").is_none());
    }

    #[test]
    fn unknown_suite_is_resolution_error() {
        let b = builtin("flat_neutral", &Params::new()).unwrap();
        let input = SuiteInput { bundle: &b, samples: 2, seed: 1, tol: Tolerances::default() };
        let e = run_suite("nope", &input).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn manifests_use_registered_suites() {
        for n in crate::models::BUILTIN_NAMES {
            let b = builtin(n, &Params::new()).unwrap();
            for s in &b.manifest {
                assert!(SUITE_NAMES.contains(s), "{n}: {s}");
            }
        }
    }

    #[test]
    fn flat_manifest_passes() {
        let b = builtin("flat_neutral", &Params::new()).unwrap();
        let input = SuiteInput { bundle: &b, samples: 5, seed: 3, tol: Tolerances::default() };
        for s in &b.manifest {
            for r in run_suite(s, &input).unwrap() {
                assert!(r.passed(), "{r}");
                assert!(r.name.starts_with(&format!("{s}/")), "{}", r.name);
            }
        }
    }

    #[test]
    fn inapplicable_suites_are_rejected() {
        let b = builtin("flat_neutral", &Params::new()).unwrap();
        let input = SuiteInput { bundle: &b, samples: 2, seed: 1, tol: Tolerances::default() };
        for s in ["inoue_invariance", "hopf_remark"] {
            assert_eq!(run_suite(s, &input).unwrap_err().exit_code(), 2);
        }
    }
}
