use rand::Rng;

use crate::geometry::linalg::{self, Mat4, Vec4};
use crate::geometry::{sample, GeometrySpec};
use crate::killing;
use crate::models::inoue::OMEGA_F_CHOICES;
use crate::models::{inoue_omega_f, InoueConstants, ModelBundle};
use crate::report::{CheckReport, Tolerances};
use crate::structures::construct::{complex_structure_from_frame, involution_nullity, null_frame};
use crate::structures::plane::{classify_plane, duality_residuals, plane_distance, PlaneClass};
use crate::structures::{
    build_from_omega_pair, lee_form_differential, lee_forms, lie_derivative_endo, verify_para_hyperhermitian,
    StructureTriple,
};
use crate::tensor::forms::{self, wedge12};
use crate::tensor::{self, connection::max_abs3};

use super::{eval_err, gate, per_point, SuiteError, SuiteInput, SuiteResult};

const JITTERS: usize = 3;
const ETA: [f64; 4] = [1.0, 1.0, -1.0, -1.0];

fn rel_vec(a: &Vec4, b: &Vec4) -> f64 {
    linalg::vec_max_abs(&linalg::vec_sub(a, b)) / linalg::vec_max_abs(b).max(1.0)
}

fn rel_mat(a: &Mat4, b: &Mat4) -> f64 {
    linalg::max_abs(&linalg::mat_sub(a, b)) / linalg::max_abs(b).max(1.0)
}

fn point_seed(seed: u64, p: &Vec4) -> u64 {
    p.iter().fold(seed, |h, c| h.rotate_left(13) ^ c.to_bits())
}

#[derive(Default)]
struct ConstructionPoint {
    j_square: f64,
    j_compatible: f64,
    jx_is_y: f64,
    pairings: f64,
    frame: f64,
    jitter: f64,
    xu: f64,
    uu: f64,
    jxu: f64,
    alpha_dual: f64,
    beta_dual: f64,
    classes: f64,
    independence: f64,
    exhaustive: f64,
    eigenplanes: f64,
    nullity: f64,
    trace_s: f64,
    killing_x: f64,
    conformal_x: f64,
    conformal_y: f64,
    bracket: f64,
    lie_x_i: f64,
    lie_y_i: f64,
    lie_x_s: f64,
}

fn construction_point(geom: &GeometrySpec, b: &ModelBundle, seed: u64, p: &Vec4) -> Result<ConstructionPoint, SuiteError> {
    let triple = b.triple();
    let at = triple.at(geom, p).map_err(eval_err("null-pair triple"))?;
    let null = at.null.as_ref().expect("null-pair triple carries its frame");
    let g = linalg::values(&at.g);
    let ginv = geom.inverse_metric_at(p).map_err(eval_err("inverse metric"))?;
    let j = linalg::values(&at.endo[0]);
    let s = linalg::values(&at.endo[1]);
    let (x, y, z, t, u) = (null.x, null.y, null.z, null.t, null.u);
    let jx = linalg::mat_vec(&j, &x);
    let ju = linalg::mat_vec(&j, &u);
    let gs = linalg::max_abs(&g).max(1.0);
    let mut r = ConstructionPoint::default();

    let jj = linalg::mat_mul(&j, &j);
    r.j_square = rel_mat(&linalg::mat_scale(&jj, -1.0), &linalg::identity());
    r.j_compatible = rel_mat(&linalg::mat_mul(&linalg::mat_mul(&linalg::transpose(&j), &g), &j), &g);
    r.jx_is_y = rel_vec(&jx, &y);
    let bl = |a: &Vec4, c: &Vec4| linalg::bilinear(&g, a, c);
    r.pairings = [(bl(&x, &z) - 1.0).abs(), bl(&y, &z).abs(), bl(&x, &t).abs(), (bl(&y, &t) - 1.0).abs()]
        .into_iter()
        .fold(0.0, f64::max)
        / gs;
    for a in 0..4 {
        for c in 0..4 {
            let target = if a == c { ETA[a] } else { 0.0 };
            r.frame = r.frame.max((bl(&null.frame[a], &null.frame[c]) - target).abs() / gs);
        }
    }
    let mut rng = sample::rng(point_seed(seed, p));
    for _ in 0..JITTERS {
        let mut k = || 2.0 * rng.gen::<f64>() - 1.0;
        let (ka, kb, kc, kd) = (k(), k(), k(), k());
        let z2: Vec4 = std::array::from_fn(|i| z[i] + ka * x[i] + kb * y[i]);
        let t2: Vec4 = std::array::from_fn(|i| t[i] + kc * x[i] + kd * y[i]);
        let j2 = complex_structure_from_frame(&g, &null_frame(&g, &x, &y, &z2, &t2));
        r.jitter = r.jitter.max(rel_mat(&j2, &j));
    }

    r.xu = bl(&x, &u).abs() / gs;
    r.uu = bl(&u, &u).abs() / gs;
    r.jxu = (bl(&jx, &u) - 2.0).abs() / gs;
    let o = at.orientation;
    r.alpha_dual = duality_residuals(&g, &ginv, o, &x, &jx).0;
    r.beta_dual = duality_residuals(&g, &ginv, o, &x, &u).1.max(duality_residuals(&g, &ginv, o, &jx, &ju).1);
    let ok = classify_plane(&g, &ginv, o, &x, &jx) == PlaneClass::Alpha
        && classify_plane(&g, &ginv, o, &x, &u) == PlaneClass::Beta
        && classify_plane(&g, &ginv, o, &jx, &ju) == PlaneClass::Beta;
    r.classes = if ok { 0.0 } else { 1.0 };
    let n = linalg::euclid(&x) * linalg::euclid(&u) * linalg::euclid(&jx) * linalg::euclid(&ju);
    r.independence = forms::wedge4(&x, &u, &jx, &ju).abs() / n.max(1e-300);
    // W = aX + bJX + cU is isotropic with X iff bc = 0
    let mut bad = 0.0_f64;
    for family in 0..3 {
        let a = 2.0 * rng.gen::<f64>() - 1.0;
        let mut coef = || (0.5 + rng.gen::<f64>()) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let (bb, cc) = match family {
            0 => (coef(), 0.0),
            1 => (0.0, coef()),
            _ => (coef(), coef()),
        };
        let w: Vec4 = std::array::from_fn(|i| a * x[i] + bb * jx[i] + cc * u[i]);
        let class = classify_plane(&g, &ginv, o, &x, &w);
        let good = match family {
            0 => class == PlaneClass::Alpha && plane_distance((&x, &w), (&x, &jx)) < 1e-6,
            1 => class == PlaneClass::Beta && plane_distance((&x, &w), (&x, &u)) < 1e-6,
            _ => class == PlaneClass::NotIsotropic,
        };
        if !good {
            bad = 1.0;
        }
    }
    r.exhaustive = bad;

    let ns = linalg::max_abs(&s).max(1.0);
    let sv = |v: &Vec4| linalg::mat_vec(&s, v);
    r.eigenplanes = [
        linalg::vec_sub(&sv(&x), &x),
        linalg::vec_sub(&sv(&u), &u),
        linalg::vec_add(&sv(&jx), &jx),
        linalg::vec_add(&sv(&ju), &ju),
    ]
    .iter()
    .zip([&x, &u, &jx, &ju])
    .map(|(d, v)| linalg::vec_max_abs(d) / (ns * linalg::vec_max_abs(v)).max(1.0))
    .fold(0.0, f64::max);
    r.nullity = involution_nullity(&g, &j, &x) as f64;
    r.trace_s = (0..4).map(|i| s[i][i]).sum::<f64>().abs() / ns;

    let bx = geom.vector_jet(&b.x, p).map_err(eval_err("field X"))?;
    let by = geom.vector_jet(&b.y, p).map_err(eval_err("field Y"))?;
    r.lie_x_i = linalg::max_abs(&lie_derivative_endo(&geom.structure, &bx, &at.endo[0]));
    r.lie_y_i = linalg::max_abs(&lie_derivative_endo(&geom.structure, &by, &at.endo[0]));
    r.lie_x_s = linalg::max_abs(&lie_derivative_endo(&geom.structure, &bx, &at.endo[1]));
    r.killing_x = linalg::max_abs(&killing::killing_residual(geom, &b.x, p).map_err(eval_err("Killing residual"))?);
    r.conformal_x =
        linalg::max_abs(&killing::conformal_killing_residual(geom, &b.x, p).map_err(eval_err("conformal residual"))?);
    r.conformal_y =
        linalg::max_abs(&killing::conformal_killing_residual(geom, &b.y, p).map_err(eval_err("conformal residual"))?);
    let br = geom.lie_bracket(&b.x, &b.y).map_err(eval_err("bracket"))?;
    r.bracket = linalg::vec_max_abs(&geom.vector_at(&br, p).map_err(eval_err("bracket"))?);
    Ok(r)
}

fn renamed(reports: Vec<CheckReport>, from: &str, to: &str) -> Vec<CheckReport> {
    reports
        .into_iter()
        .map(|mut r| {
            r.name = r.name.replacen(from, to, 1);
            r
        })
        .collect()
}

/// Triple from `(ω, Re Ω, Im Ω)` and its comparison with the null-pair triple.
fn omega_pair_checks(
    geom: &GeometrySpec,
    b: &ModelBundle,
    omega: &str,
    re: &str,
    im: &str,
    label: &str,
    compare: Option<&StructureTriple>,
    points: &[Vec4],
    tol: &Tolerances,
) -> SuiteResult<Vec<CheckReport>> {
    let form = |n: &str| geom.two_form(n).cloned().map_err(eval_err("two-form lookup"));
    let (w, wr, wi) = (form(omega)?, form(re)?, form(im)?);
    let prefix = format!("para_hyperhermitian/{label}");
    let triple = match build_from_omega_pair(geom, &b.complex_structure, &wr, &wi, &w, points) {
        Ok(t) => t,
        Err(e) => {
            return Ok(vec![CheckReport::zero(format!("{prefix}/admissible"), tol.curvature(), points, vec![f64::NAN])
                .forced_fail(e.to_string())])
        }
    };
    let mut out = vec![CheckReport::zero(format!("{prefix}/admissible"), tol.curvature(), points, vec![0.0; points.len()])];
    out.extend(renamed(verify_para_hyperhermitian(geom, &triple, points, tol), "para_hyperhermitian", &prefix));
    if let Some(reference) = compare {
        let agree = per_point(points, "triple comparison", |p| {
            let a = triple.at(geom, p)?;
            let c = reference.at(geom, p)?;
            let di = rel_mat(&linalg::values(&a.endo[0]), &linalg::values(&c.endo[0]));
            let dw = rel_mat(&linalg::values(&a.omega[0]), &linalg::values(&c.omega[0]));
            Ok::<_, crate::structures::StructureError>(di.max(dw))
        })?;
        out.push(CheckReport::zero(
            format!("{prefix}/I and Ω1 agree with the null-pair triple"),
            tol.algebraic(),
            points,
            agree,
        ));
    }
    Ok(out)
}

fn omega_f_checks(c: &InoueConstants, b: &ModelBundle, points: &[Vec4], tol: &Tolerances) -> SuiteResult<Vec<CheckReport>> {
    let mut out = Vec::new();
    for (k, f) in OMEGA_F_CHOICES.iter().enumerate() {
        let gf = inoue_omega_f(c, f).map_err(eval_err("omega_f geometry"))?;
        let label = format!("omega_f[{k}]");
        out.extend(omega_pair_checks(&gf, b, "omega_f", "Omega2", "Omega3", &label, None, points, tol)?);
        let wf = gf.two_form("omega_f").map_err(eval_err("omega_f"))?.clone();
        let a4 = gf.form("a4").map_err(eval_err("a4"))?.clone();
        let res = per_point(points, "d omega_f", |p| {
            let dw = tensor::exterior_derivative_2(&gf, &wf, p)?;
            let a = linalg::vec_scale(&gf.one_form_at(&a4, p)?, -1.0);
            let w = linalg::values(&gf.two_form_jet(&wf, p)?);
            let e = wedge12(&a, &w);
            let diff: [[[f64; 4]; 4]; 4] =
                std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|l| dw[i][j][l] - e[i][j][l])));
            Ok::<_, tensor::TensorError>(max_abs3(&diff))
        })?;
        out.push(
            CheckReport::zero(format!("para_hyperhermitian/{label}/dω_f = -a4 ∧ ω_f"), tol.curvature(), points, res)
                .with_note(format!("f = {f}")),
        );
    }
    Ok(out)
}

pub fn para_hyperhermitian(input: &SuiteInput) -> SuiteResult<Vec<CheckReport>> {
    let b = input.bundle;
    let geom = &b.geometry;
    let tol = input.tol;
    let points = input.points();
    let triple = b.triple();
    let mut out = verify_para_hyperhermitian(geom, &triple, &points, &tol);
    let data = per_point(&points, "null-pair construction", |p| construction_point(geom, b, input.seed, p))?;
    let col = |f: &dyn Fn(&ConstructionPoint) -> f64| -> Vec<f64> { data.iter().map(f).collect() };
    let (a, first, curv) = (tol.algebraic(), tol.first(), tol.curvature());
    let z = |name: &str, t: f64, v: Vec<f64>| CheckReport::zero(format!("para_hyperhermitian/{name}"), t, &points, v);
    out.extend([
        z("construction/J^2 = -Id", a, col(&|d| d.j_square)),
        z("construction/g(J., J.) = g", a, col(&|d| d.j_compatible)),
        z("construction/JX = Y", a, col(&|d| d.jx_is_y)),
        z("construction/Z, T pairings", a, col(&|d| d.pairings)),
        z("construction/null frame orthonormal", a, col(&|d| d.frame)),
        z("construction/independent of the completion", first, col(&|d| d.jitter)),
        z("null planes/g(X,U) = 0", a, col(&|d| d.xu)),
        z("null planes/g(U,U) = 0", a, col(&|d| d.uu)),
        z("null planes/g(JX,U) = 2", a, col(&|d| d.jxu)),
        z("null planes/span{X,JX} self-dual", first, col(&|d| d.alpha_dual)),
        z("null planes/span{X,U}, span{JX,JU} anti-self-dual", first, col(&|d| d.beta_dual)),
        z("null planes/classification", 0.5, col(&|d| d.classes)),
        CheckReport::nonzero(
            "para_hyperhermitian/null planes/X, U, JX, JU independent",
            first,
            &points,
            col(&|d| d.independence),
        ),
        z("null planes/isotropic planes through X are exhausted", 0.5, col(&|d| d.exhaustive)),
        z("involution/S eigenplanes", a, col(&|d| d.eigenplanes)),
        z("involution/nullity of the defining system", 0.0, col(&|d| d.nullity)),
        z("involution/trace S = 0", a, col(&|d| d.trace_s)),
    ]);

    let (ok_remark, note_remark) = {
        let (k, nk) = gate("X Killing", &col(&|d| d.killing_x), first);
        let (h, nh) = gate("L_X I = 0", &col(&|d| d.lie_x_i), curv);
        (k && h, format!("{nk}; {nh}"))
    };
    let name = "para_hyperhermitian/holomorphy/L_X S = 0";
    out.push(if ok_remark {
        z("holomorphy/L_X S = 0", curv, col(&|d| d.lie_x_s)).with_note(note_remark)
    } else {
        CheckReport::vacuous(name, curv, note_remark)
    });
    let (ok7, note7) = {
        let (cx, n1) = gate("X conformal Killing", &col(&|d| d.conformal_x), first);
        let (cy, n2) = gate("Y conformal Killing", &col(&|d| d.conformal_y), first);
        let (br, n3) = gate("[X,Y] = 0", &col(&|d| d.bracket), a);
        (cx && cy && br, format!("{n1}; {n2}; {n3}"))
    };
    let name = "para_hyperhermitian/holomorphy/L_X I = L_Y I = 0";
    out.push(if ok7 {
        z("holomorphy/L_X I = L_Y I = 0", curv, col(&|d| d.lie_x_i.max(d.lie_y_i))).with_note(note7)
    } else {
        CheckReport::vacuous(name, curv, note7)
    });

    if let Some(pair) = &b.omega_pair {
        out.extend(omega_pair_checks(geom, b, &pair.omega, &pair.re, &pair.im, "omega pair", Some(&triple), &points, &tol)?);
    }
    if let (Some(c), true) = (&b.inoue, b.builtin) {
        out.extend(omega_f_checks(c, b, &points, &tol)?);
    }
    Ok(out)
}

pub fn lee(input: &SuiteInput) -> SuiteResult<Vec<CheckReport>> {
    let b = input.bundle;
    let geom = &b.geometry;
    let tol = input.tol;
    let points = input.points();
    let triple = b.triple();
    let data = per_point(&points, "Lee forms", |p| {
        let th = lee_forms(geom, &triple, p)?;
        let d = lee_form_differential(geom, &triple, p)?;
        Ok::<_, crate::structures::StructureError>((th, d))
    })?;
    let mut out = vec![
        CheckReport::zero(
            "lee/θ1 = θ2 = θ3",
            tol.first(),
            &points,
            data.iter()
                .map(|(t, _)| {
                    linalg::vec_max_abs(&linalg::vec_sub(&t[0], &t[1]))
                        .max(linalg::vec_max_abs(&linalg::vec_sub(&t[0], &t[2])))
                })
                .collect(),
        ),
        CheckReport::zero("lee/dθ = 0", tol.curvature(), &points, data.iter().map(|(_, d)| linalg::max_abs(d)).collect()),
    ];
    let against = |form: &str, sign: f64| -> SuiteResult<Vec<f64>> {
        let a = geom.form(form).map_err(eval_err("one-form lookup"))?;
        points
            .iter()
            .zip(&data)
            .map(|(p, (t, _))| {
                let v = linalg::vec_scale(&geom.one_form_at(a, p).map_err(eval_err("one-form"))?, sign);
                Ok(linalg::vec_max_abs(&linalg::vec_sub(&t[0], &v)))
            })
            .collect()
    };
    match input.model() {
        Some("flat_neutral" | "petean_torus" | "kodaira") => out.push(CheckReport::zero(
            "lee/θ = 0",
            tol.first(),
            &points,
            data.iter().map(|(t, _)| linalg::vec_max_abs(&t[0])).collect(),
        )),
        Some("sl2r_r") => out.push(
            CheckReport::zero("lee/θ = +theta", tol.first(), &points, against("theta", 1.0)?)
                .with_note("dΩ_l = θ∧Ω_l holds with the positive sign of the coframe form theta"),
        ),
        Some("inoue_s_plus") => {
            out.push(CheckReport::zero("lee/θ = -a4", tol.first(), &points, against("a4", -1.0)?))
        }
        _ => {}
    }
    Ok(out)
}
