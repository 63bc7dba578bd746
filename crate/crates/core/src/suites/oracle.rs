use crate::exprdsl::{evaluate_jet2, Env, EvalError, Expr};
use crate::geometry::linalg::Vec4;
use crate::models::hopf::{abelian_control_search, hopf_remark_search};
use crate::report::CheckReport;

use super::{not_applicable, per_point, SuiteInput, SuiteResult};

pub const HOPF_ATTEMPTS: usize = 200;
pub const HOPF_CONTROL_ATTEMPTS: usize = 20;
pub const HOPF_THRESHOLD: f64 = 1e-4;
pub const CONTROL_THRESHOLD: f64 = 1e-8;

pub fn hopf_remark(input: &SuiteInput) -> SuiteResult<Vec<CheckReport>> {
    if input.model() != Some("hopf") {
        return Err(not_applicable("hopf_remark", input));
    }
    let search = hopf_remark_search(HOPF_ATTEMPTS, input.seed, HOPF_THRESHOLD);
    let control = abelian_control_search(HOPF_CONTROL_ATTEMPTS, input.seed, CONTROL_THRESHOLD);
    let best: Vec<f64> = search.best_residuals.iter().map(|r| r.0).collect();
    Ok(vec![
        CheckReport::nonzero("hopf_remark/no commuting null Killing pair found", HOPF_THRESHOLD, &[], best)
            .with_note(format!("{} attempts: {}", search.attempts, search.conclusion)),
        CheckReport::zero(
            "hopf_remark/abelian control finds a pair",
            CONTROL_THRESHOLD,
            &[],
            vec![control.min_residual.0],
        )
        .with_note(format!("{} attempts: {}", control.attempts, control.conclusion)),
    ])
}

const GRAD_STEP: f64 = 1e-4;
const HESS_STEP: f64 = 1e-3;
pub const AD_TOLERANCE: f64 = 1e-6;

fn shifted(p: &Vec4, moves: &[(usize, f64)]) -> Vec4 {
    let mut q = *p;
    for (i, d) in moves {
        q[*i] += d;
    }
    q
}

fn richardson(coarse: f64, fine: f64) -> f64 {
    (100.0 * fine - coarse) / 99.0
}

/// Richardson-extrapolated central differences: gradient and packed
/// hessian in the order `(0,0), (0,1), …, (3,3)`.
pub fn finite_difference_jet(e: &Expr, p: &Vec4, env: &Env) -> Result<([f64; 4], Vec<f64>), EvalError> {
    let f = |q: Vec4| e.eval::<f64>(&q, env);
    let f0 = f(*p)?;
    let mut grad = [0.0; 4];
    for i in 0..4 {
        let d = |h: f64| -> Result<f64, EvalError> { Ok((f(shifted(p, &[(i, h)]))? - f(shifted(p, &[(i, -h)]))?) / (2.0 * h)) };
        grad[i] = richardson(d(GRAD_STEP)?, d(GRAD_STEP / 10.0)?);
    }
    let mut hess = Vec::with_capacity(10);
    for i in 0..4 {
        for j in i..4 {
            let d = |h: f64| -> Result<f64, EvalError> {
                if i == j {
                    Ok((f(shifted(p, &[(i, h)]))? - 2.0 * f0 + f(shifted(p, &[(i, -h)]))?) / (h * h))
                } else {
                    let pp = f(shifted(p, &[(i, h), (j, h)]))?;
                    let pm = f(shifted(p, &[(i, h), (j, -h)]))?;
                    let mp = f(shifted(p, &[(i, -h), (j, h)]))?;
                    let mm = f(shifted(p, &[(i, -h), (j, -h)]))?;
                    Ok((pp - pm - mp + mm) / (4.0 * h * h))
                }
            };
            hess.push(richardson(d(HESS_STEP)?, d(HESS_STEP / 10.0)?));
        }
    }
    Ok((grad, hess))
}

fn rel(exact: f64, approx: f64) -> f64 {
    (exact - approx).abs() / exact.abs().max(1.0)
}

pub fn ad_oracle(input: &SuiteInput) -> SuiteResult<Vec<CheckReport>> {
    let b = input.bundle;
    let geom = &b.geometry;
    let env = geom.env();
    let exprs = b.document.expressions();
    let points = input.points();
    let data = per_point(&points, "ad oracle", |p| {
        let mut worst_g = (0.0_f64, String::new());
        let mut worst_h = (0.0_f64, String::new());
        for (name, e) in &exprs {
            let jet = evaluate_jet2(e, p, &env)?;
            let (grad, hess) = finite_difference_jet(e, p, &env)?;
            let eg = (0..4).map(|i| rel(jet.grad[i], grad[i])).fold(0.0, f64::max);
            let mut eh = 0.0_f64;
            let mut k = 0;
            for i in 0..4 {
                for j in i..4 {
                    eh = eh.max(rel(jet.hessian(i, j), hess[k]));
                    k += 1;
                }
            }
            if eg > worst_g.0 || worst_g.1.is_empty() {
                worst_g = (eg, name.clone());
            }
            if eh > worst_h.0 || worst_h.1.is_empty() {
                worst_h = (eh, name.clone());
            }
        }
        Ok::<_, EvalError>((worst_g, worst_h))
    })?;
    let worst = |sel: &dyn Fn(&((f64, String), (f64, String))) -> &(f64, String)| -> String {
        data.iter()
            .map(sel)
            .fold(None::<&(f64, String)>, |m, x| match m {
                Some(y) if y.0 >= x.0 => Some(y),
                _ => Some(x),
            })
            .map(|(v, n)| format!("{} expressions; worst {n} ({v:e})", exprs.len()))
            .unwrap_or_default()
    };
    Ok(vec![
        CheckReport::zero(
            "ad_oracle/gradient",
            AD_TOLERANCE,
            &points,
            data.iter().map(|d| d.0 .0).collect(),
        )
        .with_note(worst(&|d| &d.0)),
        CheckReport::zero("ad_oracle/hessian", AD_TOLERANCE, &points, data.iter().map(|d| d.1 .0).collect())
            .with_note(worst(&|d| &d.1)),
    ])
}
