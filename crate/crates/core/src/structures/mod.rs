//! Compatible complex and para-complex structures built from null fields.
//!
//! Endomorphisms are matrices `A[k][i] = A^k_i` (so `A e_i = Σ_k A[k][i] e_k`).
//! Fundamental forms are `Ω_A(X,Y) = g(AX,Y)`, i.e. `Ω_A = Aᵀ g`.

pub mod construct;
pub mod plane;

use rayon::prelude::*;
use thiserror::Error;

use crate::exprdsl::{Expr, Jet1, Jet2, Scalar};
use crate::geometry::linalg::{self, Mat4, Vec4};
use crate::geometry::{bracket_jet, GeometryError, GeometrySpec, Structure, TwoFormField, VectorField};
use crate::report::{CheckReport, Tolerances};
use crate::tensor::connection::Tensor3;
use crate::tensor::forms::{self, d1, d2, wedge12, wedge22};
use crate::tensor::{ConnectionJet, TensorError};

pub use construct::{
    companion_null_field, complete_null_pair, construct_complex_structure, construct_involution_s,
    involution_nullity, null_frame, null_pair_precondition,
};
pub use plane::{classify_plane, duality_residuals, plane_distance, PlaneClass};

pub type JMat = [[Jet2; 4]; 4];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StructureError {
    #[error("precondition failed: {condition} (residual {residual:e})")]
    Precondition { condition: &'static str, residual: f64 },
    #[error("forms not admissible: {relation} fails (residual {residual:e})")]
    NotAdmissible { relation: &'static str, residual: f64 },
    #[error("{what} is singular at {point:?}")]
    Singular { what: &'static str, point: Vec4 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

pub type StructureResult<T> = Result<T, StructureError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndoKind {
    /// `A² = −Id`.
    Complex,
    /// `A² = +Id`.
    Product,
}

impl EndoKind {
    pub fn sign(self) -> f64 {
        match self {
            EndoKind::Complex => -1.0,
            EndoKind::Product => 1.0,
        }
    }
}

/// Endomorphism field given by closed-form components `m[k][i] = A^k_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct EndomorphismField {
    pub name: String,
    pub kind: EndoKind,
    pub components: [[Expr; 4]; 4],
}

impl EndomorphismField {
    pub fn constant(name: &str, kind: EndoKind, m: &Mat4) -> Self {
        EndomorphismField {
            name: name.to_string(),
            kind,
            components: std::array::from_fn(|k| std::array::from_fn(|i| Expr::cst(m[k][i]))),
        }
    }

    pub fn jet_at(&self, geom: &GeometrySpec, p: &Vec4) -> StructureResult<JMat> {
        let seed = Jet2::seed(p);
        let env = geom.env();
        let mut out = [[Jet2::default(); 4]; 4];
        for k in 0..4 {
            for i in 0..4 {
                out[k][i] = self.components[k][i].eval(&seed, &env).map_err(|source| GeometryError::Eval {
                    context: format!("{}[{k}][{i}]", self.name),
                    source,
                })?;
            }
        }
        Ok(out)
    }
}

pub fn fundamental_form<S: Scalar>(a: &[[S; 4]; 4], g: &[[S; 4]; 4]) -> [[S; 4]; 4] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut s = S::zero();
            for k in 0..4 {
                s = s + a[k][i] * g[k][j];
            }
            s
        })
    })
}

/// `N_A(e_a, e_b)^k` as `n[a][b][k]`.
pub fn nijenhuis_jet(a: &JMat, c: &Structure) -> Tensor3 {
    let av = linalg::values(a);
    let col = |i: usize| -> [Jet2; 4] { std::array::from_fn(|k| a[k][i]) };
    let unit = |i: usize| -> [Jet2; 4] { std::array::from_fn(|k| Jet2::constant(if k == i { 1.0 } else { 0.0 })) };
    let a2 = linalg::mat_mul(&av, &av);
    let mut n = [[[0.0; 4]; 4]; 4];
    for x in 0..4 {
        for y in 0..4 {
            let term1 = linalg::mat_vec(&a2, &c[x][y]);
            let term2 = bracket_jet(c, &col(x), &col(y));
            let term3 = linalg::mat_vec(&av, &bracket_jet(c, &col(x), &unit(y)));
            let term4 = linalg::mat_vec(&av, &bracket_jet(c, &unit(x), &col(y)));
            for k in 0..4 {
                n[x][y][k] = term1[k] + term2[k] - term3[k] - term4[k];
            }
        }
    }
    n
}

pub fn nijenhuis(geom: &GeometrySpec, a: &EndomorphismField, p: &Vec4) -> StructureResult<Tensor3> {
    Ok(nijenhuis_jet(&a.jet_at(geom, p)?, &geom.structure))
}

/// `(L_K A)(e_b) = [K, A e_b] − A[K, e_b]` as a matrix `m[k][b]`.
pub fn lie_derivative_endo(c: &Structure, k: &[Jet2; 4], a: &JMat) -> Mat4 {
    let av = linalg::values(a);
    let mut out = [[0.0; 4]; 4];
    for b in 0..4 {
        let col: [Jet2; 4] = std::array::from_fn(|m| a[m][b]);
        let unit: [Jet2; 4] = std::array::from_fn(|m| Jet2::constant(if m == b { 1.0 } else { 0.0 }));
        let first = bracket_jet(c, k, &col);
        let second = linalg::mat_vec(&av, &bracket_jet(c, k, &unit));
        for m in 0..4 {
            out[m][b] = first[m] - second[m];
        }
    }
    out
}

/// Where a triple comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum TripleSource {
    /// `I` from the null pair, `S` with `SX = X`, `T = IS`.
    NullPair { x: VectorField, y: VectorField },
    /// `(I, S, T)` recovered from `Ω₁, Ω₂, Ω₃`.
    Forms { omega: [TwoFormField; 3] },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructureTriple {
    pub name: String,
    pub source: TripleSource,
    /// Flips the sign of `S` (and hence `T`, `Ω₂`, `Ω₃`).
    pub negate_s: bool,
}

/// Null-frame data of a null-pair triple at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct NullData {
    pub x: Vec4,
    pub y: Vec4,
    pub z: Vec4,
    pub t: Vec4,
    pub u: Vec4,
    pub frame: [Vec4; 4],
}

#[derive(Clone, Debug)]
pub struct TripleAtPoint {
    pub point: Vec4,
    pub g: JMat,
    /// `[I, S, T]`.
    pub endo: [JMat; 3],
    pub omega: [JMat; 3],
    pub null: Option<NullData>,
    /// Orientation sign of the structure, `−sign(Ω₁∧Ω₁)` relative to the basis.
    pub orientation: f64,
}

pub const ENDO_NAMES: [&str; 3] = ["I", "S", "T"];

impl StructureTriple {
    pub fn from_null_pair(name: &str, x: &VectorField, y: &VectorField) -> Self {
        StructureTriple {
            name: name.to_string(),
            source: TripleSource::NullPair { x: x.clone(), y: y.clone() },
            negate_s: false,
        }
    }

    pub fn from_forms(name: &str, omega: [TwoFormField; 3]) -> Self {
        StructureTriple { name: name.to_string(), source: TripleSource::Forms { omega }, negate_s: false }
    }

    /// The mutant with `S` replaced by `−S`.
    pub fn with_negated_s(&self) -> Self {
        StructureTriple { name: format!("{} (S negated)", self.name), negate_s: !self.negate_s, ..self.clone() }
    }

    pub fn distinguished(&self) -> Option<&VectorField> {
        match &self.source {
            TripleSource::NullPair { x, .. } => Some(x),
            TripleSource::Forms { .. } => None,
        }
    }

    pub fn at(&self, geom: &GeometrySpec, p: &Vec4) -> StructureResult<TripleAtPoint> {
        let g = geom.metric_jet(p)?;
        let (i, mut s, null) = match &self.source {
            TripleSource::NullPair { x, y } => {
                let xj = geom.vector_jet(x, p)?;
                let yj = geom.vector_jet(y, p)?;
                null_pair_precondition(&linalg::values(&g), &linalg::vec_values(&xj), &linalg::vec_values(&yj))?;
                let (zj, tj) = complete_null_pair(&g, &xj, &yj);
                let e = null_frame(&g, &xj, &yj, &zj, &tj);
                let i = construct::complex_structure_from_frame(&g, &e);
                let uj = companion_null_field(&g, &xj, &yj, &tj);
                let s = construct_involution_s(&i, &xj, &uj)
                    .ok_or(StructureError::Singular { what: "frame (X, U, JX, JU)", point: *p })?;
                let null = NullData {
                    x: linalg::vec_values(&xj),
                    y: linalg::vec_values(&yj),
                    z: linalg::vec_values(&zj),
                    t: linalg::vec_values(&tj),
                    u: linalg::vec_values(&uj),
                    frame: e.map(|v| linalg::vec_values(&v)),
                };
                (i, s, Some(null))
            }
            TripleSource::Forms { omega } => {
                let w: [JMat; 3] = [
                    geom.two_form_jet(&omega[0], p)?,
                    geom.two_form_jet(&omega[1], p)?,
                    geom.two_form_jet(&omega[2], p)?,
                ];
                let vals = w.clone().map(|m| linalg::values(&m));
                check_admissible(&vals[0], &vals[1], &vals[2])?;
                let (i, s, _) = recover_jets(&w, p)?;
                (i, s, None)
            }
        };
        if self.negate_s {
            s = linalg::mat_scale(&s, -1.0);
        }
        let t = linalg::mat_mul(&i, &s);
        let omega = [fundamental_form(&i, &g), fundamental_form(&s, &g), fundamental_form(&t, &g)];
        let w1 = linalg::values(&omega[0]);
        let orientation = -wedge22(&w1, &w1).signum();
        Ok(TripleAtPoint { point: *p, g, endo: [i, s, t], omega, null, orientation })
    }
}

fn recover_jets(w: &[JMat; 3], p: &Vec4) -> StructureResult<(JMat, JMat, JMat)> {
    let inv = |m: &JMat, what: &'static str| linalg::inverse(m).ok_or(StructureError::Singular { what, point: *p });
    let i = linalg::mat_mul(&inv(&w[2], "Ω₃")?, &w[1]);
    let s = linalg::mat_mul(&inv(&w[0], "Ω₁")?, &w[2]);
    let t = linalg::mat_scale(&linalg::mat_mul(&inv(&w[1], "Ω₂")?, &w[0]), -1.0);
    Ok((i, s, t))
}

/// Largest violation of `−Ω₁² = Ω₂² = Ω₃²`, relative to `|Ω₁²|`.
pub fn square_residual(w: &[Mat4; 3]) -> f64 {
    let q = w.map(|m| wedge22(&m, &m));
    let n = q[0].abs().max(1e-300);
    ((q[0] + q[1]).abs().max((q[1] - q[2]).abs())) / n
}

/// Largest `|Ω_l∧Ω_m|`, `l ≠ m`, relative to `|Ω₁²|`.
pub fn cross_residual(w: &[Mat4; 3]) -> f64 {
    let n = wedge22(&w[0], &w[0]).abs().max(1e-300);
    let mut worst = 0.0_f64;
    for l in 0..3 {
        for m in (l + 1)..3 {
            worst = worst.max(wedge22(&w[l], &w[m]).abs());
        }
    }
    worst / n
}

fn check_admissible(w1: &Mat4, w2: &Mat4, w3: &Mat4) -> StructureResult<()> {
    let w = [*w1, *w2, *w3];
    if wedge22(w1, w1).abs() < 1e-12 * linalg::max_abs(w1).powi(2) {
        return Err(StructureError::NotAdmissible { relation: "Ω₁ non-degenerate", residual: wedge22(w1, w1) });
    }
    let sq = square_residual(&w);
    if !(sq < 1e-8) {
        return Err(StructureError::NotAdmissible { relation: "−Ω₁² = Ω₂² = Ω₃²", residual: sq });
    }
    let cr = cross_residual(&w);
    if !(cr < 1e-8) {
        return Err(StructureError::NotAdmissible { relation: "Ω_l∧Ω_m = 0", residual: cr });
    }
    Ok(())
}

/// Recovered structure at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveredStructure {
    pub i: Mat4,
    pub s: Mat4,
    pub t: Mat4,
    pub g: Mat4,
}

/// `I = Ω₃⁻¹Ω₂`, `S = Ω₁⁻¹Ω₃`, `T = −Ω₂⁻¹Ω₁`, `g = Ω₁ I`.
pub fn recover_structure_from_forms(w1: &Mat4, w2: &Mat4, w3: &Mat4, p: &Vec4) -> StructureResult<RecoveredStructure> {
    check_admissible(w1, w2, w3)?;
    let inv = |m: &Mat4, what: &'static str| linalg::inverse(m).ok_or(StructureError::Singular { what, point: *p });
    let i = linalg::mat_mul(&inv(w3, "Ω₃")?, w2);
    let s = linalg::mat_mul(&inv(w1, "Ω₁")?, w3);
    let t = linalg::mat_scale(&linalg::mat_mul(&inv(w2, "Ω₂")?, w1), -1.0);
    let g = linalg::mat_mul(w1, &i);
    Ok(RecoveredStructure { i, s, t, g })
}

/// Triple with `Ω₁ = ω`, `Ω₂ = Re Ω`, `Ω₃ = Im Ω`, after checking the pair
/// against `I` at the given points.
pub fn build_from_omega_pair(
    geom: &GeometrySpec,
    i: &EndomorphismField,
    re: &TwoFormField,
    im: &TwoFormField,
    omega: &TwoFormField,
    points: &[Vec4],
) -> StructureResult<StructureTriple> {
    let tol = 1e-8;
    for p in points {
        let iv = linalg::values(&i.jet_at(geom, p)?);
        let w1 = geom_two_form(geom, omega, p)?;
        let w2 = geom_two_form(geom, re, p)?;
        let w3 = geom_two_form(geom, im, p)?;
        let n = wedge22(&w1, &w1).abs().max(1e-300);
        let checks: [(&'static str, f64); 5] = [
            ("Ω∧Ω̄ = −2ω²", (wedge22(&w2, &w2) + wedge22(&w3, &w3) + 2.0 * wedge22(&w1, &w1)).abs() / n),
            ("Ω∧ω = 0", wedge22(&w2, &w1).abs().max(wedge22(&w3, &w1).abs()) / n),
            ("Ω∧Ω = 0", (wedge22(&w2, &w2) - wedge22(&w3, &w3)).abs().max(wedge22(&w2, &w3).abs()) / n),
            ("ω of type (1,1)", rel(&linalg::mat_sub(&conj(&iv, &w1), &w1), &w1)),
            ("Ω of type (2,0)", rel(&linalg::mat_add(&linalg::mat_mul(&linalg::transpose(&iv), &w2), &w3), &w2)),
        ];
        for (relation, residual) in checks {
            if !(residual < tol) {
                return Err(StructureError::NotAdmissible { relation, residual });
            }
        }
        let rec = recover_structure_from_forms(&w1, &w2, &w3, p)?;
        let d = rel(&linalg::mat_sub(&rec.i, &iv), &iv);
        if !(d < tol) {
            return Err(StructureError::NotAdmissible { relation: "recovered I equals the given I", residual: d });
        }
    }
    Ok(StructureTriple::from_forms(
        &format!("({}, {} + i{})", omega.name, re.name, im.name),
        [omega.clone(), re.clone(), im.clone()],
    ))
}

fn geom_two_form(geom: &GeometrySpec, w: &TwoFormField, p: &Vec4) -> StructureResult<Mat4> {
    Ok(linalg::values(&geom.two_form_jet(w, p)?))
}

/// `ω(I·, I·)` as a matrix.
fn conj(i: &Mat4, w: &Mat4) -> Mat4 {
    linalg::mat_mul(&linalg::mat_mul(&linalg::transpose(i), w), i)
}

fn rel(diff: &Mat4, reference: &Mat4) -> f64 {
    linalg::max_abs(diff) / linalg::max_abs(reference).max(1.0)
}

/// Lee forms `θ_A = δΩ_A ∘ A⁻¹` with first derivatives: `−δΩ₁ ∘ I` for
/// `I`, and `δΩ_A ∘ A` for the product structures `S`, `T`.
pub fn lee_forms_jet(conn: &ConnectionJet, at: &TripleAtPoint) -> [[Jet1; 4]; 3] {
    std::array::from_fn(|k| {
        let delta = conn.codifferential_jet(&at.omega[k]);
        let a = &at.endo[k];
        let sign = if k == 0 { -1.0 } else { 1.0 };
        std::array::from_fn(|cc| {
            let mut s = Jet1::default();
            for m in 0..4 {
                s = s + delta[m] * a[m][cc].lower() * Jet1::constant(sign);
            }
            s
        })
    })
}

pub fn lee_forms(geom: &GeometrySpec, triple: &StructureTriple, p: &Vec4) -> StructureResult<[Vec4; 3]> {
    let at = triple.at(geom, p)?;
    let conn = ConnectionJet::new(&geom.local(p)?)?;
    Ok(lee_forms_jet(&conn, &at).map(|t| forms::vec_form_values(&t)))
}

/// Per-point residuals of every clause of the para-hyperhermitian conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct TripleResiduals {
    pub square: [f64; 3],
    pub anticommute: f64,
    pub product: f64,
    pub skew: f64,
    pub fixes_x: Option<f64>,
    pub metric: Option<f64>,
    pub form_squares: f64,
    pub form_cross: f64,
    pub type_20: f64,
    pub nijenhuis: [f64; 3],
    pub lee_equal: f64,
    pub d_omega: f64,
    pub theta: Vec4,
    pub orientation: f64,
}

fn endo_rel_square(a: &Mat4, sign: f64) -> f64 {
    let sq = linalg::mat_mul(a, a);
    let target = linalg::mat_scale(&linalg::identity(), sign);
    linalg::max_abs(&linalg::mat_sub(&sq, &target)) / linalg::max_abs(a).powi(2).max(1.0)
}

pub fn triple_residuals(geom: &GeometrySpec, triple: &StructureTriple, p: &Vec4) -> StructureResult<TripleResiduals> {
    let at = triple.at(geom, p)?;
    let conn = ConnectionJet::new(&geom.local(p)?)?;
    let g = linalg::values(&at.g);
    let [i, s, t] = at.endo.clone().map(|m| linalg::values(&m));
    let w = at.omega.clone().map(|m| linalg::values(&m));
    let ni = linalg::max_abs(&i);
    let ns = linalg::max_abs(&s);
    let scale_is = (ni * ns).max(1.0);
    let square = [endo_rel_square(&i, -1.0), endo_rel_square(&s, 1.0), endo_rel_square(&t, 1.0)];
    let is = linalg::mat_mul(&i, &s);
    let si = linalg::mat_mul(&s, &i);
    let anticommute = linalg::max_abs(&linalg::mat_add(&is, &si)) / scale_is;
    let product = linalg::max_abs(&linalg::mat_sub(&t, &is)) / scale_is;
    let mut skew = 0.0_f64;
    for a in [&i, &s, &t] {
        let m = linalg::mat_mul(&linalg::transpose(a), &g);
        let sym = linalg::mat_add(&m, &linalg::transpose(&m));
        skew = skew.max(linalg::max_abs(&sym) / (linalg::max_abs(a) * linalg::max_abs(&g)).max(1.0));
    }
    let fixes_x = at.null.as_ref().map(|n| {
        let sx = linalg::mat_vec(&s, &n.x);
        linalg::vec_max_abs(&linalg::vec_sub(&sx, &n.x)) / (ns * linalg::vec_max_abs(&n.x)).max(1.0)
    });
    let metric = match at.null {
        Some(_) => None,
        None => Some(rel(&linalg::mat_sub(&linalg::mat_mul(&w[0], &i), &g), &g)),
    };
    let form_squares = square_residual(&w);
    let form_cross = cross_residual(&w);
    let type_20 = rel(&linalg::mat_sub(&w[1], &linalg::mat_mul(&w[2], &i)), &w[1]);
    let nijenhuis = std::array::from_fn(|k| forms::max_abs3(&nijenhuis_jet(&at.endo[k], &geom.structure)));
    let lee = lee_forms_jet(&conn, &at);
    let theta_v = lee.map(|t| forms::vec_form_values(&t));
    let lee_equal = linalg::vec_max_abs(&linalg::vec_sub(&theta_v[0], &theta_v[1]))
        .max(linalg::vec_max_abs(&linalg::vec_sub(&theta_v[0], &theta_v[2])));
    let mut d_omega = 0.0_f64;
    for l in 0..3 {
        let dw = d2(&at.omega[l], &geom.structure);
        let tw = wedge12(&theta_v[0], &w[l]);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    d_omega = d_omega.max((dw[a][b][c] - tw[a][b][c]).abs());
                }
            }
        }
    }
    Ok(TripleResiduals {
        square,
        anticommute,
        product,
        skew,
        fixes_x,
        metric,
        form_squares,
        form_cross,
        type_20,
        nijenhuis,
        lee_equal,
        d_omega,
        theta: theta_v[0],
        orientation: at.orientation,
    })
}

/// `dθ` of the first Lee form.
pub fn lee_form_differential(geom: &GeometrySpec, triple: &StructureTriple, p: &Vec4) -> StructureResult<Mat4> {
    let at = triple.at(geom, p)?;
    let conn = ConnectionJet::new(&geom.local(p)?)?;
    Ok(d1(&lee_forms_jet(&conn, &at)[0], &geom.structure))
}

/// One report per clause, named `para_hyperhermitian/<clause>`.
pub fn verify_para_hyperhermitian(
    geom: &GeometrySpec,
    triple: &StructureTriple,
    points: &[Vec4],
    tol: &Tolerances,
) -> Vec<CheckReport> {
    let results: Vec<StructureResult<TripleResiduals>> = points.par_iter().map(|p| triple_residuals(geom, triple, p)).collect();
    let first_error = results.iter().find_map(|r| r.as_ref().err().map(|e| e.to_string()));
    let column = |f: &dyn Fn(&TripleResiduals) -> Option<f64>| -> Vec<f64> {
        results.iter().map(|r| r.as_ref().ok().and_then(f).unwrap_or(f64::NAN)).collect()
    };
    let mut clauses: Vec<(&str, f64, Vec<f64>)> = vec![
        ("I^2 = -Id", tol.algebraic(), column(&|r| Some(r.square[0]))),
        ("S^2 = Id", tol.algebraic(), column(&|r| Some(r.square[1]))),
        ("T^2 = Id", tol.algebraic(), column(&|r| Some(r.square[2]))),
        ("IS = -SI", tol.algebraic(), column(&|r| Some(r.anticommute))),
        ("T = IS", tol.algebraic(), column(&|r| Some(r.product))),
        ("g-skew I, S, T", tol.algebraic(), column(&|r| Some(r.skew))),
    ];
    if triple.distinguished().is_some() {
        clauses.push(("SX = X", tol.algebraic(), column(&|r| r.fixes_x)));
    } else {
        clauses.push(("g = Ω1(., I.)", tol.algebraic(), column(&|r| r.metric)));
    }
    clauses.extend([
        ("-Ω1^2 = Ω2^2 = Ω3^2", tol.first(), column(&|r| Some(r.form_squares))),
        ("Ω_l ∧ Ω_m = 0", tol.first(), column(&|r| Some(r.form_cross))),
        ("Ω2(X,Y) = Ω3(X,IY)", tol.first(), column(&|r| Some(r.type_20))),
        ("N_I = 0", tol.first(), column(&|r| Some(r.nijenhuis[0]))),
        ("N_S = 0", tol.first(), column(&|r| Some(r.nijenhuis[1]))),
        ("N_T = 0", tol.first(), column(&|r| Some(r.nijenhuis[2]))),
        ("θ1 = θ2 = θ3", tol.first(), column(&|r| Some(r.lee_equal))),
        ("dΩ_l = θ ∧ Ω_l", tol.curvature(), column(&|r| Some(r.d_omega))),
    ]);
    clauses
        .into_iter()
        .map(|(name, t, res)| {
            let r = CheckReport::zero(format!("para_hyperhermitian/{name}"), t, points, res);
            match &first_error {
                Some(e) => r.with_note(e.clone()),
                None => r,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::{parse_geometry, Backend, Params};

    fn spec(src: &str) -> GeometrySpec {
        GeometrySpec::from_document(&parse_geometry(src).unwrap(), &Params::new()).unwrap()
    }

    fn flat() -> GeometrySpec {
        spec(r#"geometry "flat" { backend coordinate; coords x y u v; metric diag(1, 1, -1, -1); }"#)
    }

    fn flat_triple() -> StructureTriple {
        let x = VectorField::constant("X", Backend::Coordinate, [1.0, 0.0, 1.0, 0.0]);
        let y = VectorField::constant("Y", Backend::Coordinate, [0.0, 1.0, 0.0, 1.0]);
        StructureTriple::from_null_pair("flat", &x, &y)
    }

    #[test]
    fn flat_triple_is_standard_and_passes() {
        let g = flat();
        let at = flat_triple().at(&g, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        let i = linalg::values(&at.endo[0]);
        assert_eq!(linalg::mat_vec(&i, &[1.0, 0.0, 0.0, 0.0]), [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(at.orientation, 1.0);
        let pts = crate::geometry::sample::sample_points(&g.domain, 5, 3);
        for r in verify_para_hyperhermitian(&g, &flat_triple(), &pts, &Tolerances::default()) {
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn negated_s_fails_only_the_fixed_vector_clause() {
        let g = flat();
        let pts = crate::geometry::sample::sample_points(&g.domain, 3, 4);
        let reports = verify_para_hyperhermitian(&g, &flat_triple().with_negated_s(), &pts, &Tolerances::default());
        let failing: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect();
        assert_eq!(failing, vec!["para_hyperhermitian/SX = X"]);
    }

    #[test]
    fn forms_round_trip() {
        let g = flat();
        let p = [0.0; 4];
        let at = flat_triple().at(&g, &p).unwrap();
        let w = at.omega.clone().map(|m| linalg::values(&m));
        let rec = recover_structure_from_forms(&w[0], &w[1], &w[2], &p).unwrap();
        for (a, b) in [(&rec.i, &at.endo[0]), (&rec.s, &at.endo[1]), (&rec.t, &at.endo[2])] {
            assert!(linalg::max_abs(&linalg::mat_sub(a, &linalg::values(b))) < 1e-14);
        }
        assert!(linalg::max_abs(&linalg::mat_sub(&rec.g, &g.metric_at(&p).unwrap())) < 1e-14);
        let doubled = linalg::mat_scale(&w[1], 2.0);
        let err = recover_structure_from_forms(&w[0], &doubled, &w[2], &p).unwrap_err();
        assert!(matches!(err, StructureError::NotAdmissible { relation: "−Ω₁² = Ω₂² = Ω₃²", .. }));
    }

    #[test]
    fn constant_structure_is_integrable() {
        let g = flat();
        let j = [[0.0, -1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, -1.0], [0.0, 0.0, 1.0, 0.0]];
        let n = nijenhuis(&g, &EndomorphismField::constant("J", EndoKind::Complex, &j), &[0.5; 4]).unwrap();
        assert_eq!(forms::max_abs3(&n), 0.0);
    }

    #[test]
    fn nijenhuis_detects_non_integrable_structure() {
        // J e_0 = e^u e_1 with u transverse to the J-invariant plane
        let g = flat();
        let text = |s: &str| crate::exprdsl::parse_expression(s, &crate::exprdsl::SymbolTable::new(&["x", "y", "u", "v"], &[])).unwrap();
        let f = text("exp(u)");
        let finv = text("exp(-u)");
        let z = Expr::cst(0.0);
        let comps = [
            [z.clone(), Expr::neg(finv.clone()), z.clone(), z.clone()],
            [f.clone(), z.clone(), z.clone(), z.clone()],
            [z.clone(), z.clone(), z.clone(), Expr::cst(-1.0)],
            [z.clone(), z.clone(), Expr::cst(1.0), z.clone()],
        ];
        let a = EndomorphismField { name: "J".into(), kind: EndoKind::Complex, components: comps };
        let jv = linalg::values(&a.jet_at(&g, &[0.0, 0.0, 0.3, 0.0]).unwrap());
        assert!(endo_rel_square(&jv, -1.0) < 1e-15);
        let n = nijenhuis(&g, &a, &[0.0, 0.0, 0.3, 0.0]).unwrap();
        assert!(forms::max_abs3(&n) > 0.1);
        for x in 0..4 {
            for y in 0..4 {
                for k in 0..4 {
                    assert!((n[x][y][k] + n[y][x][k]).abs() < 1e-14);
                }
            }
        }
    }
}
