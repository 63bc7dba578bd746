use crate::geometry::linalg::{self, Mat4, Vec4};
use crate::geometry::{sample, DiffeoMap, GeometrySpec};
use crate::report::CheckReport;
use crate::tensor::{self, forms};

use super::{eval_err, not_applicable, per_point, SuiteInput, SuiteResult};

fn rel(d: f64, scale: f64) -> f64 {
    d.abs() / scale.abs().max(1.0)
}

/// Points whose images under every generator stay in the domain.
fn invariance_points(geom: &GeometrySpec, generators: &[DiffeoMap], input: &SuiteInput) -> Vec<Vec4> {
    sample::sample_points_where(&geom.domain, input.samples, input.seed, |p| {
        generators.iter().all(|phi| phi.apply(p, &geom.env()).map(|q| geom.in_domain(&q)).unwrap_or(false))
    })
}

fn metric_invariance(
    geom: &GeometrySpec,
    generators: &[DiffeoMap],
    points: &[Vec4],
    tol: f64,
) -> SuiteResult<Vec<CheckReport>> {
    let mut out = Vec::new();
    for phi in generators {
        let res = per_point(points, "metric pullback", |p| {
            let g = geom.metric_at(p)?;
            let d = linalg::mat_sub(&geom.pullback_metric(phi, p)?, &g);
            Ok::<_, crate::geometry::GeometryError>(linalg::max_abs(&d) / linalg::max_abs(&g).max(1.0))
        })?;
        out.push(CheckReport::zero(format!("inoue_invariance/{}* g = g", phi.name), tol, points, res));
    }
    Ok(out)
}

pub fn inoue_invariance(input: &SuiteInput) -> SuiteResult<Vec<CheckReport>> {
    let b = input.bundle;
    let geom = &b.geometry;
    let tol = input.tol;
    match (input.model(), &b.inoue, b.kodaira_gamma) {
        (Some("kodaira"), _, Some(gamma)) => {
            let points = invariance_points(geom, &b.generators, input);
            let note = format!("gamma = {:.16e} + {:.16e} i", gamma.0, gamma.1);
            Ok(metric_invariance(geom, &b.generators, &points, tol.algebraic())?
                .into_iter()
                .map(|r| r.with_note(note.clone()))
                .collect())
        }
        (Some("inoue_s_plus"), Some(c), _) => inoue_checks(input, c),
        _ => Err(not_applicable("inoue_invariance", input)),
    }
}

fn inoue_checks(input: &SuiteInput, c: &crate::models::InoueConstants) -> SuiteResult<Vec<CheckReport>> {
    let geom = &input.bundle.geometry;
    let tol = input.tol;
    let points = input.points();
    let field = |n: &str| geom.field(n).cloned().map_err(eval_err("field lookup"));
    let form = |n: &str| geom.form(n).cloned().map_err(eval_err("form lookup"));
    let xs = [field("X1")?, field("X2")?, field("X3")?, field("X4")?];
    let al = [form("a1")?, form("a2")?, form("a3")?, form("a4")?];
    let om = [
        geom.two_form("Omega1").cloned().map_err(eval_err("two-form lookup"))?,
        geom.two_form("Omega2").cloned().map_err(eval_err("two-form lookup"))?,
        geom.two_form("Omega3").cloned().map_err(eval_err("two-form lookup"))?,
    ];
    let t2 = geom.param("t2").unwrap_or(0.0);
    let lnalpha = geom.param("lnalpha").unwrap_or(c.alpha.ln());
    let mut out = Vec::new();

    let duality = per_point(&points, "coframe duality", |p| {
        let mut worst = 0.0_f64;
        for (i, a) in al.iter().enumerate() {
            let av = geom.one_form_at(a, p)?;
            for (j, x) in xs.iter().enumerate() {
                let xv = geom.vector_at(x, p)?;
                let v: f64 = (0..4).map(|k| av[k] * xv[k]).sum();
                worst = worst.max((v - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        Ok::<_, crate::geometry::GeometryError>(worst)
    })?;
    out.push(CheckReport::zero("inoue_invariance/a_i(X_j) = δ_ij", tol.algebraic(), &points, duality));

    let names = ["da1 = a3∧a2 - (t2/ln α) a3∧a4", "da2 = a4∧a2", "da3 = a3∧a4", "da4 = 0"];
    let d_res = per_point(&points, "coframe differentials", |p| {
        let v: Vec<Vec4> = al.iter().map(|a| geom.one_form_at(a, p)).collect::<Result<_, _>>()?;
        let w = forms::wedge11;
        let expected: [Mat4; 4] = [
            linalg::mat_sub(&w(&v[2], &v[1]), &linalg::mat_scale(&w(&v[2], &v[3]), t2 / lnalpha)),
            w(&v[3], &v[1]),
            w(&v[2], &v[3]),
            [[0.0; 4]; 4],
        ];
        let mut res = [0.0; 4];
        for k in 0..4 {
            let d = tensor::exterior_derivative_1(geom, &al[k], p)?;
            res[k] = linalg::max_abs(&linalg::mat_sub(&d, &expected[k])) / linalg::max_abs(&expected[k]).max(1.0);
        }
        Ok::<_, tensor::TensorError>(res)
    })?;
    for (k, n) in names.iter().enumerate() {
        out.push(
            CheckReport::zero(format!("inoue_invariance/{n}"), tol.first(), &points, d_res.iter().map(|r| r[k]).collect())
                .with_note(format!("t2 = {t2}")),
        );
    }

    // [X2,X3] = X1, [X2,X4] = X2, [X3,X4] = -X3 + (t2/ln α) X1, all others zero
    let k = t2 / lnalpha;
    let table: [(usize, usize, [f64; 4]); 6] = [
        (0, 1, [0.0; 4]),
        (0, 2, [0.0; 4]),
        (0, 3, [0.0; 4]),
        (1, 2, [1.0, 0.0, 0.0, 0.0]),
        (1, 3, [0.0, 1.0, 0.0, 0.0]),
        (2, 3, [k, 0.0, -1.0, 0.0]),
    ];
    let brackets: Vec<_> = table
        .iter()
        .map(|(i, j, _)| geom.lie_bracket(&xs[*i], &xs[*j]).map_err(eval_err("bracket")))
        .collect::<SuiteResult<_>>()?;
    let br = per_point(&points, "bracket table", |p| {
        let x: Vec<Vec4> = xs.iter().map(|f| geom.vector_at(f, p)).collect::<Result<_, _>>()?;
        let mut worst = 0.0_f64;
        for ((_, _, coef), b) in table.iter().zip(&brackets) {
            let v = geom.vector_at(b, p)?;
            let e: Vec4 = std::array::from_fn(|k| (0..4).map(|m| coef[m] * x[m][k]).sum());
            worst = worst.max(linalg::vec_max_abs(&linalg::vec_sub(&v, &e)) / linalg::vec_max_abs(&e).max(1.0));
        }
        Ok::<_, crate::geometry::GeometryError>(worst)
    })?;
    out.push(CheckReport::zero("inoue_invariance/bracket table", tol.algebraic(), &points, br).with_note(format!("t2 = {t2}")));

    let vol = per_point(&points, "volume identity", |p| {
        let v: Vec<Vec4> = al.iter().map(|a| geom.one_form_at(a, p)).collect::<Result<_, _>>()?;
        let vol2 = 2.0 * forms::wedge4(&v[0], &v[1], &v[2], &v[3]);
        let sq: Vec<f64> = om
            .iter()
            .map(|w| geom.two_form_jet(w, p).map(|m| linalg::values(&m)).map(|m| forms::wedge22(&m, &m)))
            .collect::<Result<_, _>>()?;
        Ok::<_, crate::geometry::GeometryError>(
            rel(-sq[0] - vol2, vol2).max(rel(sq[1] - vol2, vol2)).max(rel(sq[2] - vol2, vol2)),
        )
    })?;
    out.push(CheckReport::zero("inoue_invariance/-Ω1² = Ω2² = Ω3² = 2 a1∧a2∧a3∧a4", tol.algebraic(), &points, vol));

    let gens = &input.bundle.generators;
    let inv_points = invariance_points(geom, gens, input);
    for phi in gens {
        let res = per_point(&inv_points, "coframe pullback", |p| {
            let mut worst = 0.0_f64;
            for a in &al {
                let v = geom.one_form_at(a, p)?;
                let d = linalg::vec_sub(&geom.pullback_oneform(a, phi, p)?, &v);
                worst = worst.max(linalg::vec_max_abs(&d) / linalg::vec_max_abs(&v).max(1.0));
            }
            Ok::<_, crate::geometry::GeometryError>(worst)
        })?;
        out.push(CheckReport::zero(format!("inoue_invariance/{}* a_i = a_i", phi.name), tol.algebraic(), &inv_points, res));
    }
    out.extend(metric_invariance(geom, gens, &inv_points, tol.algebraic())?);
    out.push(
        CheckReport::zero("inoue_invariance/lattice constants", tol.algebraic(), &[], vec![c.cc_residual()])
            .with_note(format!("alpha = {:.16e}, c = {:?}", c.alpha, c.c)),
    );
    out.push(CheckReport::zero("inoue_invariance/eigenvector equations", 1e-12, &[], vec![c.eigen_residual()]));
    Ok(out)
}
