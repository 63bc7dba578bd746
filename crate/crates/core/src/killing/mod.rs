//! Killing, conformal Killing and holomorphy residuals, and the clauses
//! for commuting orthogonal null pairs.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exprdsl::Jet2;
use crate::geometry::linalg::{self, Mat4, Vec4};
use crate::geometry::{bracket_jet, GeometryError, GeometrySpec, VectorField};
use crate::report::{CheckReport, Real};
use crate::structures::construct::independence;
use crate::structures::{lie_derivative_endo, EndomorphismField, JMat, StructureError};
use crate::tensor::{ConnectionJet, TensorError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KillingError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

pub type KillingResult<T> = Result<T, KillingError>;

/// `(L_K g)(e_a, e_b) = g(∇_a K, e_b) + g(∇_b K, e_a)`.
pub fn lie_derivative_metric(conn: &ConnectionJet, k: &[Jet2; 4]) -> Mat4 {
    let n = conn.covariant_derivative(k);
    let g = conn.metric();
    let low: Mat4 = std::array::from_fn(|a| linalg::lower(&g, &n[a]));
    std::array::from_fn(|a| std::array::from_fn(|b| low[a][b] + low[b][a]))
}

fn jets(geom: &GeometrySpec, k: &VectorField, p: &Vec4) -> KillingResult<(ConnectionJet, [Jet2; 4])> {
    let conn = ConnectionJet::new(&geom.local(p)?)?;
    Ok((conn, geom.vector_jet(k, p)?))
}

pub fn killing_residual(geom: &GeometrySpec, k: &VectorField, p: &Vec4) -> KillingResult<Mat4> {
    let (conn, kj) = jets(geom, k, p)?;
    Ok(lie_derivative_metric(&conn, &kj))
}

/// `L_K g − ½ div(K) g`.
pub fn conformal_killing_residual(geom: &GeometrySpec, k: &VectorField, p: &Vec4) -> KillingResult<Mat4> {
    let (conn, kj) = jets(geom, k, p)?;
    Ok(conformal_part(&conn, &kj))
}

fn conformal_part(conn: &ConnectionJet, k: &[Jet2; 4]) -> Mat4 {
    let l = lie_derivative_metric(conn, k);
    let div = conn.divergence(k);
    linalg::mat_sub(&l, &linalg::mat_scale(&conn.metric(), 0.5 * div))
}

/// `(L_K J)(e_b) = [K, J e_b] − J[K, e_b]`.
pub fn holomorphy_residual(
    geom: &GeometrySpec,
    k: &VectorField,
    j: &EndomorphismField,
    p: &Vec4,
) -> KillingResult<Mat4> {
    holomorphy_residual_jet(geom, k, &j.jet_at(geom, p)?, p)
}

/// As [`holomorphy_residual`] for an endomorphism given by its jets at `p`.
pub fn holomorphy_residual_jet(geom: &GeometrySpec, k: &VectorField, j: &JMat, p: &Vec4) -> KillingResult<Mat4> {
    Ok(lie_derivative_endo(&geom.structure, &geom.vector_jet(k, p)?, j))
}

/// Residuals of one sampled point; every entry is non-negative.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldPairPoint {
    pub kk: Real,
    pub ll: Real,
    pub kl: Real,
    /// `‖K∧L‖∞ / (|K||L|)`.
    pub independence: Real,
    pub killing_k: Real,
    pub killing_l: Real,
    pub conformal_k: Real,
    pub conformal_l: Real,
    pub bracket: Real,
    pub nabla_k_l: Real,
    pub nabla_l_k: Real,
    /// Largest `|g(∇_A B, C)|` for `A, B, C ∈ {K, L}`.
    pub projection_defect: Real,
    /// Largest `|g(∇_{e_a} B, C)|` for `B, C ∈ {K, L}` and basis `e_a`.
    pub span_defect: Real,
    pub div_k: Real,
    pub div_l: Real,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldPairReport {
    pub points: Vec<[Real; 4]>,
    pub entries: Vec<FieldPairPoint>,
}

impl FieldPairReport {
    pub fn column(&self, f: impl Fn(&FieldPairPoint) -> Real) -> Vec<f64> {
        self.entries.iter().map(|e| f(e).0).collect()
    }

    pub fn max(&self, f: impl Fn(&FieldPairPoint) -> Real) -> f64 {
        self.column(f).into_iter().fold(0.0, f64::max)
    }
}

fn directional(n: &Mat4, dir: &Vec4) -> Vec4 {
    std::array::from_fn(|k| (0..4).map(|a| dir[a] * n[a][k]).sum())
}

fn pair_point(geom: &GeometrySpec, k: &VectorField, l: &VectorField, p: &Vec4) -> KillingResult<FieldPairPoint> {
    let conn = ConnectionJet::new(&geom.local(p)?)?;
    let kj = geom.vector_jet(k, p)?;
    let lj = geom.vector_jet(l, p)?;
    let g = conn.metric();
    let kv = linalg::vec_values(&kj);
    let lv = linalg::vec_values(&lj);
    let nk = conn.covariant_derivative(&kj);
    let nl = conn.covariant_derivative(&lj);
    let span = [kv, lv];
    let mut projection = 0.0_f64;
    for a in &span {
        for n in [&nk, &nl] {
            let w = directional(n, a);
            for c in &span {
                projection = projection.max(linalg::bilinear(&g, &w, c).abs());
            }
        }
    }
    let mut span_defect = 0.0_f64;
    for a in 0..4 {
        for n in [&nk, &nl] {
            for c in &span {
                span_defect = span_defect.max(linalg::bilinear(&g, &n[a], c).abs());
            }
        }
    }
    Ok(FieldPairPoint {
        kk: Real(linalg::bilinear(&g, &kv, &kv).abs()),
        ll: Real(linalg::bilinear(&g, &lv, &lv).abs()),
        kl: Real(linalg::bilinear(&g, &kv, &lv).abs()),
        independence: Real(independence(&kv, &lv)),
        killing_k: Real(linalg::max_abs(&lie_derivative_metric(&conn, &kj))),
        killing_l: Real(linalg::max_abs(&lie_derivative_metric(&conn, &lj))),
        conformal_k: Real(linalg::max_abs(&conformal_part(&conn, &kj))),
        conformal_l: Real(linalg::max_abs(&conformal_part(&conn, &lj))),
        bracket: Real(linalg::vec_max_abs(&bracket_jet(&geom.structure, &kj, &lj))),
        nabla_k_l: Real(linalg::vec_max_abs(&directional(&nl, &kv))),
        nabla_l_k: Real(linalg::vec_max_abs(&directional(&nk, &lv))),
        projection_defect: Real(projection),
        span_defect: Real(span_defect),
        div_k: Real(conn.divergence(&kj).abs()),
        div_l: Real(conn.divergence(&lj).abs()),
    })
}

pub fn field_pair_report(
    geom: &GeometrySpec,
    k: &VectorField,
    l: &VectorField,
    points: &[Vec4],
) -> KillingResult<FieldPairReport> {
    let entries = points.par_iter().map(|p| pair_point(geom, k, l, p)).collect::<KillingResult<Vec<_>>>()?;
    Ok(FieldPairReport { points: points.iter().map(|p| p.map(Real)).collect(), entries })
}

fn gate(what: &str, worst: f64, tol: f64) -> (bool, String) {
    if worst <= tol {
        (true, format!("hypothesis holds: {what} (max residual {worst:e})"))
    } else {
        (false, format!("hypothesis fails: {what} (max residual {worst:e})"))
    }
}

/// The three clauses on orthogonal null pairs, each gated on
/// its hypothesis. A clause whose hypothesis fails is reported vacuous.
pub fn david_checks(
    geom: &GeometrySpec,
    k: &VectorField,
    l: &VectorField,
    points: &[Vec4],
    tol: f64,
) -> KillingResult<Vec<CheckReport>> {
    let rep = field_pair_report(geom, k, l, points)?;
    let mut out = Vec::new();
    let null: Vec<f64> = rep.entries.iter().map(|e| e.kk.0.max(e.ll.0).max(e.kl.0)).collect();
    out.push(CheckReport::zero("david/K, L null and orthogonal", tol, points, null));
    out.push(CheckReport::nonzero("david/K, L independent", 1e-8, points, rep.column(|e| e.independence)));

    let (ok, note) = gate("K conformal Killing", rep.max(|e| e.conformal_k), tol);
    out.push(if ok {
        CheckReport::zero("david/(i) ∇_A B ∈ span{K,L}", tol, points, rep.column(|e| e.projection_defect)).with_note(note)
    } else {
        let c = rep.max(|e| e.projection_defect);
        CheckReport::vacuous("david/(i) ∇_A B ∈ span{K,L}", tol, format!("{note}; conclusion residual {c:e}"))
    });

    let hyp = rep.max(|e| e.conformal_k).max(rep.max(|e| e.conformal_l)).max(rep.max(|e| e.bracket));
    let (ok, note) = gate("K, L conformal Killing and [K,L] = 0", hyp, tol);
    out.push(if ok {
        let r: Vec<f64> = rep.entries.iter().map(|e| e.nabla_k_l.0.max(e.nabla_l_k.0).max(e.span_defect.0)).collect();
        CheckReport::zero("david/(ii) span{K,L} parallel, ∇_K L = ∇_L K = 0", tol, points, r).with_note(note)
    } else {
        let c = rep.max(|e| e.nabla_k_l).max(rep.max(|e| e.nabla_l_k)).max(rep.max(|e| e.span_defect));
        CheckReport::vacuous(
            "david/(ii) span{K,L} parallel, ∇_K L = ∇_L K = 0",
            tol,
            format!("{note}; conclusion residual {c:e}"),
        )
    });

    let hyp = rep.max(|e| e.conformal_k).max(rep.max(|e| e.conformal_l)).max(rep.max(|e| e.span_defect));
    let (ok, note) = gate("K, L conformal Killing and span{K,L} parallel", hyp, tol);
    out.push(if ok {
        let r: Vec<f64> = rep
            .entries
            .iter()
            .map(|e| e.div_k.0.max(e.div_l.0).max(e.bracket.0).max(e.killing_k.0).max(e.killing_l.0))
            .collect();
        CheckReport::zero("david/(iii) K, L Killing and commuting", tol, points, r).with_note(note)
    } else {
        let c = rep
            .max(|e| e.div_k)
            .max(rep.max(|e| e.div_l))
            .max(rep.max(|e| e.bracket))
            .max(rep.max(|e| e.killing_k))
            .max(rep.max(|e| e.killing_l));
        CheckReport::vacuous("david/(iii) K, L Killing and commuting", tol, format!("{note}; conclusion residual {c:e}"))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::{parse_geometry, Params};
    use crate::geometry::sample::sample_points;
    use crate::models::{builtin, STANDARD_I};
    use crate::report::Verdict;
    use crate::structures::EndoKind;

    fn flat() -> GeometrySpec {
        builtin("flat_neutral", &Params::new()).unwrap().geometry
    }

    fn coordinate_lie_derivative(geom: &GeometrySpec, k: &VectorField, p: &Vec4) -> Mat4 {
        // (L_K g)_ab = K^c ∂_c g_ab + g_cb ∂_a K^c + g_ac ∂_b K^c
        let g = geom.metric_jet(p).unwrap();
        let kj = geom.vector_jet(k, p).unwrap();
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let mut s = 0.0;
                for c in 0..4 {
                    s += kj[c].value * g[a][b].grad[c]
                        + g[c][b].value * kj[c].grad[a]
                        + g[a][c].value * kj[c].grad[b];
                }
                s
            })
        })
    }

    #[test]
    fn translation_is_killing() {
        let g = flat();
        let k = VectorField::constant("K", g.backend, [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(linalg::max_abs(&killing_residual(&g, &k, &[0.1, 0.2, 0.3, 0.4]).unwrap()), 0.0);
    }

    #[test]
    fn euler_field_is_conformal() {
        let g = flat();
        let e = g.field("E").unwrap();
        let p = [0.3, -1.0, 2.0, 0.5];
        assert!((crate::tensor::divergence(&g, e, &p).unwrap() - 4.0).abs() < 1e-14);
        assert!(linalg::max_abs(&conformal_killing_residual(&g, e, &p).unwrap()) < 1e-14);
        assert!(linalg::max_abs(&killing_residual(&g, e, &p).unwrap()) > 1.0);
    }

    #[test]
    fn lie_derivative_matches_coordinate_formula() {
        let doc = parse_geometry(
            r#"geometry "w" { backend coordinate; coords x y u v;
               metric { [0][0] = "2 + cos(x)"; [1][1] = "2 + cos(x)"; [0][2] = "1"; [1][3] = "1"; };
               field W = ("x*y", "sin(u)", "v^2", "1/(2 + cos(x))"); }"#,
        )
        .unwrap();
        let g = GeometrySpec::from_document(&doc, &Params::new()).unwrap();
        let w = g.field("W").unwrap();
        for p in sample_points(&g.domain, 20, 3) {
            let a = killing_residual(&g, w, &p).unwrap();
            let b = coordinate_lie_derivative(&g, w, &p);
            assert!(linalg::max_abs(&linalg::mat_sub(&a, &b)) < 1e-10);
        }
    }

    #[test]
    fn killing_residual_is_linear() {
        let b = builtin("petean_torus", &Params::new()).unwrap();
        let g = &b.geometry;
        let w = VectorField::from_exprs(
            "W",
            g.backend,
            ["x*y", "sin(u)", "v", "1"].map(|s| {
                crate::exprdsl::parse_expression(s, &crate::exprdsl::SymbolTable::new(&["x", "y", "u", "v"], &[]))
                    .unwrap()
            }),
        );
        let sum = w.combine(2.0, &b.x, -3.0, "S");
        for p in sample_points(&g.domain, 10, 5) {
            let lw = killing_residual(g, &w, &p).unwrap();
            let lx = killing_residual(g, &b.x, &p).unwrap();
            let ls = killing_residual(g, &sum, &p).unwrap();
            let expect = linalg::mat_add(&linalg::mat_scale(&lw, 2.0), &linalg::mat_scale(&lx, -3.0));
            assert!(linalg::max_abs(&linalg::mat_sub(&ls, &expect)) < 1e-12);
        }
    }

    #[test]
    fn constant_j_translation_holomorphic() {
        let g = flat();
        let j = EndomorphismField::constant("J", EndoKind::Complex, &STANDARD_I);
        let k = VectorField::constant("K", g.backend, [1.0, 0.0, 1.0, 0.0]);
        assert_eq!(linalg::max_abs(&holomorphy_residual(&g, &k, &j, &[0.0; 4]).unwrap()), 0.0);
    }

    #[test]
    fn flat_pair_passes_all_clauses() {
        let b = builtin("flat_neutral", &Params::new()).unwrap();
        let pts = sample_points(&b.geometry.domain, 10, 1);
        let reps = david_checks(&b.geometry, &b.x, &b.y, &pts, 1e-12).unwrap();
        assert_eq!(reps.len(), 5);
        for r in &reps {
            assert_eq!(r.verdict, Verdict::Pass, "{}", r.name);
        }
    }

    #[test]
    fn non_conformal_k_makes_clauses_vacuous() {
        let g = flat();
        use crate::exprdsl::Expr;
        let x2 = Expr::mul(Expr::Coord(0), Expr::Coord(0));
        let k = VectorField::from_exprs("K", g.backend, [x2.clone(), Expr::cst(0.0), x2, Expr::cst(0.0)]);
        let l = VectorField::constant("L", g.backend, [0.0, 1.0, 0.0, 1.0]);
        let reps = david_checks(&g, &k, &l, &[[1.0, 0.0, 1.0, 0.0]], 1e-9).unwrap();
        assert!(reps.iter().any(|r| r.verdict == Verdict::Vacuous));
    }
}
