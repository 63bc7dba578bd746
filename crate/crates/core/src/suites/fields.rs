use rand::Rng;

use crate::exprdsl::{Backend, Expr};
use crate::geometry::linalg::{self, Vec4};
use crate::geometry::{sample, GeometrySpec, VectorField};
use crate::killing::{self, david_checks, field_pair_report, holomorphy_residual_jet};
use crate::models::inoue::OMEGA_F_CHOICES;
use crate::models::inoue_omega_f;
use crate::report::CheckReport;
use crate::tensor;

use super::{eval_err, per_point, SuiteInput, SuiteResult};

/// Seeded field with quadratic components; not conformal Killing for
/// generic coefficients.
pub fn random_quadratic_field(seed: u64) -> VectorField {
    let mut rng = sample::rng(seed);
    let comps: [Expr; 4] = std::array::from_fn(|_| {
        let mut e = Expr::cst(2.0 * rng.gen::<f64>() - 1.0);
        for j in 0..4 {
            let c = 2.0 * rng.gen::<f64>() - 1.0;
            e = Expr::add(e, Expr::mul(Expr::cst(c), Expr::mul(Expr::Coord(j), Expr::Coord(j))));
        }
        e
    });
    VectorField::from_exprs("W", Backend::Coordinate, comps)
}

fn pair_reports(
    geom: &GeometrySpec,
    prefix: &str,
    x: &VectorField,
    y: &VectorField,
    points: &[Vec4],
    input: &SuiteInput,
) -> SuiteResult<Vec<CheckReport>> {
    let tol = input.tol;
    let rep = field_pair_report(geom, x, y, points).map_err(eval_err("field pair"))?;
    let null: Vec<f64> = rep.entries.iter().map(|e| e.kk.0.max(e.ll.0).max(e.kl.0)).collect();
    Ok(vec![
        CheckReport::zero(format!("{prefix}X, Y null and orthogonal"), tol.algebraic(), points, null),
        CheckReport::nonzero(format!("{prefix}X, Y independent"), 1e-8, points, rep.column(|e| e.independence)),
        CheckReport::zero(format!("{prefix}X Killing"), tol.first(), points, rep.column(|e| e.killing_k)),
        CheckReport::zero(format!("{prefix}Y Killing"), tol.first(), points, rep.column(|e| e.killing_l)),
    ])
}

pub fn killing_pair(input: &SuiteInput) -> SuiteResult<Vec<CheckReport>> {
    let b = input.bundle;
    let geom = &b.geometry;
    let tol = input.tol;
    let points = input.points();
    let mut out = pair_reports(geom, "killing_pair/", &b.x, &b.y, &points, input)?;

    let div = per_point(&points, "divergence", |p| {
        let ginv = geom.inverse_metric_at(p).map_err(killing::KillingError::from)?;
        let mut worst = 0.0_f64;
        for f in [&b.x, &b.y] {
            let l = killing::killing_residual(geom, f, p)?;
            let tr: f64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| ginv[i][j] * l[i][j]).sum();
            let d = tensor::divergence(geom, f, p)?;
            worst = worst.max((0.5 * tr - d).abs() / d.abs().max(1.0));
        }
        Ok::<_, killing::KillingError>(worst)
    })?;
    out.push(CheckReport::zero("killing_pair/div = trace(L g)/2", tol.algebraic(), &points, div));

    if geom.backend == Backend::Coordinate {
        let w = random_quadratic_field(input.seed);
        let res = per_point(&points, "random field", |p| {
            killing::conformal_killing_residual(geom, &w, p).map(|m| linalg::max_abs(&m))
        })?;
        out.push(
            CheckReport::nonzero("killing_pair/random quadratic field not conformal Killing", 1e-3, &points, res)
                .with_note(format!("field seeded with {}", input.seed)),
        );
    }

    match (input.model(), &b.inoue) {
        (Some("inoue_s_plus"), Some(c)) => {
            for (k, f) in OMEGA_F_CHOICES.iter().enumerate() {
                let gf = inoue_omega_f(c, f).map_err(eval_err("omega_f geometry"))?;
                let x = gf.field("X").map_err(eval_err("field X"))?.clone();
                let y = gf.field("Y").map_err(eval_err("field Y"))?.clone();
                let reps = pair_reports(&gf, &format!("killing_pair/omega_f[{k}]/"), &x, &y, &points, input)?;
                out.extend(reps.into_iter().map(|r| r.with_note(format!("metric of ω_f, f = {f}"))));
            }
        }
        (Some("hopf"), _) => {
            let triple = b.triple();
            for k in 0..4 {
                let e: Vec4 = std::array::from_fn(|i| if i == k { 1.0 } else { 0.0 });
                let f = VectorField::constant(&format!("X{}", k + 1), Backend::Frame, e);
                let res = per_point(&points, "frame field Killing residual", |p| {
                    killing::killing_residual(geom, &f, p).map(|m| linalg::max_abs(&m))
                })?;
                out.push(CheckReport::zero(format!("killing_pair/frame field X{} Killing", k + 1), tol.first(), &points, res));
            }
            let x3 = VectorField::constant("X3", Backend::Frame, [0.0, 0.0, 1.0, 0.0]);
            let res = per_point(&points, "L_X3 I", |p| {
                let at = triple.at(geom, p).map_err(killing::KillingError::from)?;
                holomorphy_residual_jet(geom, &x3, &at.endo[0], p).map(|m| linalg::max_abs(&m))
            })?;
            out.push(CheckReport::nonzero("killing_pair/L_X3 I != 0", tol.first(), &points, res));
        }
        _ => {}
    }
    Ok(out)
}

pub fn david(input: &SuiteInput) -> SuiteResult<Vec<CheckReport>> {
    let b = input.bundle;
    let points = input.points();
    david_checks(&b.geometry, &b.x, &b.y, &points, input.tol.first()).map_err(eval_err("david"))
}
