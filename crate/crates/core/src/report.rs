//! Check reports and their canonical JSON encoding.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::geometry::linalg::Vec4;

/// Real number serialized with 17 significant digits.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Real(pub f64);

impl Real {
    pub fn canonical(v: f64) -> String {
        if v.is_nan() {
            "NaN".into()
        } else if v.is_infinite() {
            if v > 0.0 { "inf".into() } else { "-inf".into() }
        } else {
            format!("{v:.16e}")
        }
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let text = Real::canonical(self.0);
        if self.0.is_finite() {
            let n: serde_json::Number = text.parse().map_err(serde::ser::Error::custom)?;
            n.serialize(s)
        } else {
            s.serialize_str(&text)
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::Number(n) => n
                .to_string()
                .parse::<f64>()
                .map(Real)
                .map_err(serde::de::Error::custom),
            serde_json::Value::String(s) => match s.as_str() {
                "NaN" => Ok(Real(f64::NAN)),
                "inf" => Ok(Real(f64::INFINITY)),
                "-inf" => Ok(Real(f64::NEG_INFINITY)),
                _ => Err(serde::de::Error::custom(format!("not a real: {s}"))),
            },
            other => Err(serde::de::Error::custom(format!("not a real: {other}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The clause's hypothesis did not hold, so nothing was asserted.
    Vacuous,
}

/// Whether residuals are expected to vanish or to stay away from zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Zero,
    NonZero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub expectation: Expectation,
    pub tolerance: Real,
    pub verdict: Verdict,
    pub max_residual: Real,
    pub min_residual: Real,
    pub points: Vec<[Real; 4]>,
    pub residuals: Vec<Real>,
    pub violations: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    pub fn new(
        name: impl Into<String>,
        expectation: Expectation,
        tolerance: f64,
        points: &[Vec4],
        residuals: Vec<f64>,
    ) -> Self {
        let violations: Vec<usize> = residuals
            .iter()
            .enumerate()
            .filter(|(_, r)| match expectation {
                Expectation::Zero => !(r.is_finite() && **r <= tolerance),
                Expectation::NonZero => !(r.is_finite() && **r > tolerance),
            })
            .map(|(i, _)| i)
            .collect();
        let max = residuals.iter().fold(0.0_f64, |m, r| if r.is_nan() { f64::NAN } else { m.max(*r) });
        let min = residuals.iter().fold(f64::INFINITY, |m, r| m.min(*r));
        let verdict = if residuals.is_empty() {
            Verdict::Vacuous
        } else if violations.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        CheckReport {
            name: name.into(),
            expectation,
            tolerance: Real(tolerance),
            verdict,
            max_residual: Real(max),
            min_residual: Real(if residuals.is_empty() { 0.0 } else { min }),
            points: points.iter().map(|p| p.map(Real)).collect(),
            residuals: residuals.into_iter().map(Real).collect(),
            violations,
            note: None,
        }
    }

    pub fn zero(name: impl Into<String>, tolerance: f64, points: &[Vec4], residuals: Vec<f64>) -> Self {
        CheckReport::new(name, Expectation::Zero, tolerance, points, residuals)
    }

    pub fn nonzero(
        name: impl Into<String>,
        tolerance: f64,
        points: &[Vec4],
        residuals: Vec<f64>,
    ) -> Self {
        CheckReport::new(name, Expectation::NonZero, tolerance, points, residuals)
    }

    /// A clause whose hypothesis failed; no residuals are asserted.
    pub fn vacuous(name: impl Into<String>, tolerance: f64, note: impl Into<String>) -> Self {
        let mut r = CheckReport::zero(name, tolerance, &[], Vec::new());
        r.note = Some(note.into());
        r
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Marks a check failed regardless of residuals.
    pub fn forced_fail(mut self, note: impl Into<String>) -> Self {
        self.verdict = Verdict::Fail;
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

/// Tolerance ladder by differentiation order of the identity checked.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub algebraic: Real,
    pub first: Real,
    pub curvature: Real,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { algebraic: Real(1e-10), first: Real(1e-9), curvature: Real(1e-8) }
    }
}

impl Tolerances {
    /// Every tier set to `t`.
    pub fn uniform(t: f64) -> Self {
        Tolerances { algebraic: Real(t), first: Real(t), curvature: Real(t) }
    }

    pub fn algebraic(&self) -> f64 {
        self.algebraic.0
    }

    pub fn first(&self) -> f64 {
        self.first.0
    }

    pub fn curvature(&self) -> f64 {
        self.curvature.0
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Vacuous => "SKIP",
        };
        let (stat, rel) = match self.expectation {
            Expectation::Zero => ("max", "<="),
            Expectation::NonZero => ("min", ">"),
        };
        let value = match self.expectation {
            Expectation::Zero => self.max_residual.0,
            Expectation::NonZero => self.min_residual.0,
        };
        write!(
            f,
            "{tag} {:<48} {stat} {value:.3e} (want {rel} {:.1e}, {} pts",
            self.name,
            self.tolerance.0,
            self.residuals.len()
        )?;
        if !self.violations.is_empty() {
            write!(f, ", {} violations", self.violations.len())?;
        }
        write!(f, ")")?;
        if let Some(n) = &self.note {
            write!(f, " [{n}]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_use_seventeen_digits() {
        let s = serde_json::to_string(&Real(0.1)).unwrap();
        assert_eq!(s, "1.0000000000000001e-1");
        let back: Real = serde_json::from_str(&s).unwrap();
        assert_eq!(back.0, 0.1);
        let nan = serde_json::to_string(&Real(f64::NAN)).unwrap();
        assert_eq!(nan, "\"NaN\"");
    }

    #[test]
    fn verdicts_follow_expectation() {
        let pts = [[0.0; 4]; 2];
        assert_eq!(CheckReport::zero("a", 1e-3, &pts, vec![0.0, 1e-4]).verdict, Verdict::Pass);
        let r = CheckReport::zero("a", 1e-3, &pts, vec![0.0, 1e-2]);
        assert_eq!((r.verdict, r.violations.clone()), (Verdict::Fail, vec![1]));
        assert_eq!(CheckReport::nonzero("b", 1e-3, &pts, vec![1.0, 0.5]).verdict, Verdict::Pass);
        assert_eq!(CheckReport::nonzero("b", 1e-3, &pts, vec![1.0, 0.0]).verdict, Verdict::Fail);
        assert_eq!(CheckReport::zero("c", 1e-3, &pts, vec![f64::NAN, 0.0]).verdict, Verdict::Fail);
        assert_eq!(CheckReport::vacuous("d", 1e-3, "n/a").verdict, Verdict::Vacuous);
    }
}
