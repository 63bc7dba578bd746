//! Uniform backend over coordinate charts and invariant frames.
//!
//! Both backends work in a basis `e_a` with `[e_a, e_b] = c_ab^k e_k` and
//! directional derivatives `e_a(f) = ∂_a f`. A chart has `c = 0`; a frame has
//! constant `c` and constant components, so every derivative of a component
//! vanishes.

pub mod linalg;
pub mod sample;

use indexmap::IndexMap;
use nalgebra::{Matrix4, SymmetricEigen};
use thiserror::Error;

pub use crate::exprdsl::Structure;
use crate::exprdsl::{Backend, Env, EvalError, Expr, GeometryDocument, Jet2, Params};
use crate::report::CheckReport;
use linalg::{Mat4, Vec4};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("{context}: {source}")]
    Eval { context: String, source: EvalError },
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("{what} must be constant in the frame backend")]
    NotConstant { what: String },
    #[error("Jacobi identity fails with residual {residual:e}")]
    Jacobi { residual: f64 },
    #[error("structure constants are not antisymmetric in their lower indices")]
    StructureNotAntisymmetric,
    #[error("metric is singular at {point:?} (condition estimate {condition:e})")]
    SingularMetric { point: Vec4, condition: f64 },
    #[error("fields from different backends")]
    BackendMismatch,
    #[error("point {point:?} lies outside the domain box")]
    OutOfDomain { point: Vec4 },
    #[error("map Jacobian is singular at {point:?} (|det| = {det:e})")]
    SingularJacobian { point: Vec4, det: f64 },
}

pub type Result<T> = std::result::Result<T, GeometryError>;

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub name: String,
    pub backend: Backend,
    pub components: [Expr; 4],
}

impl VectorField {
    pub fn constant(name: &str, backend: Backend, c: Vec4) -> Self {
        VectorField { name: name.to_string(), backend, components: c.map(Expr::cst) }
    }

    pub fn from_exprs(name: &str, backend: Backend, components: [Expr; 4]) -> Self {
        VectorField { name: name.to_string(), backend, components }
    }

    /// `a·self + b·other` built symbolically.
    pub fn combine(&self, a: f64, other: &VectorField, b: f64, name: &str) -> VectorField {
        let components = std::array::from_fn(|i| {
            Expr::add(
                Expr::mul(Expr::cst(a), self.components[i].clone()),
                Expr::mul(Expr::cst(b), other.components[i].clone()),
            )
        });
        VectorField { name: name.to_string(), backend: self.backend, components }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OneFormField {
    pub name: String,
    pub components: [Expr; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoFormField {
    pub name: String,
    pub components: [[Expr; 4]; 4],
}

/// Coordinate map `p ↦ φ(p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffeoMap {
    pub name: String,
    pub components: [Expr; 4],
}

impl DiffeoMap {
    pub fn identity() -> Self {
        DiffeoMap { name: "id".into(), components: std::array::from_fn(Expr::Coord) }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &DiffeoMap) -> DiffeoMap {
        DiffeoMap {
            name: format!("{}∘{}", self.name, inner.name),
            components: std::array::from_fn(|i| self.components[i].substitute_coords(&inner.components)),
        }
    }

    pub fn apply(&self, p: &Vec4, env: &Env) -> Result<Vec4> {
        let mut out = [0.0; 4];
        for (o, e) in out.iter_mut().zip(&self.components) {
            *o = e.eval(p, env).map_err(|source| GeometryError::Eval {
                context: format!("map {}", self.name),
                source,
            })?;
        }
        Ok(out)
    }

    /// Image point and Jacobian `J[k][i] = ∂_i φ^k`.
    pub fn jacobian(&self, p: &Vec4, env: &Env) -> Result<(Vec4, Mat4)> {
        let seed = Jet2::seed(p);
        let mut image = [0.0; 4];
        let mut jac = [[0.0; 4]; 4];
        for k in 0..4 {
            let j = self.components[k].eval(&seed, env).map_err(|source| GeometryError::Eval {
                context: format!("map {}", self.name),
                source,
            })?;
            image[k] = j.value;
            jac[k] = j.grad;
        }
        Ok((image, jac))
    }
}

/// Metric jets and structure constants at one point.
#[derive(Clone, Debug)]
pub struct Local {
    pub point: Vec4,
    pub g: [[Jet2; 4]; 4],
    pub c: Structure,
}

#[derive(Clone, Debug)]
pub struct GeometrySpec {
    pub name: String,
    pub backend: Backend,
    pub basis: [String; 4],
    pub domain: [(f64, f64); 4],
    pub params: Params,
    pub metric: [[Expr; 4]; 4],
    pub structure: Structure,
    pub fields: IndexMap<String, VectorField>,
    pub forms: IndexMap<String, OneFormField>,
    pub two_forms: IndexMap<String, TwoFormField>,
}

fn constant_check(e: &Expr, what: String) -> Result<()> {
    if e.coords_used().iter().any(|u| *u) {
        return Err(GeometryError::NotConstant { what });
    }
    Ok(())
}

impl GeometrySpec {
    pub fn from_document(doc: &GeometryDocument, overrides: &Params) -> Result<Self> {
        for k in overrides.keys() {
            if !doc.params.contains_key(k) {
                return Err(GeometryError::UnknownParam(k.clone()));
            }
        }
        let mut params = Params::new();
        for (name, e) in &doc.params {
            let v = match overrides.get(name) {
                Some(v) => *v,
                None => e
                    .eval(&[0.0; 4], &Env { params: &params, coords: &doc.basis })
                    .map_err(|source| GeometryError::Eval {
                        context: format!("param {name}"),
                        source,
                    })?,
            };
            params.insert(name.clone(), v);
        }
        if doc.backend == Backend::Frame {
            for i in 0..4 {
                for j in 0..4 {
                    constant_check(&doc.metric[i][j], format!("metric[{i}][{j}]"))?;
                }
            }
            for (n, c) in &doc.fields {
                for e in c {
                    constant_check(e, format!("field {n}"))?;
                }
            }
        }
        let spec = GeometrySpec {
            name: doc.name.clone(),
            backend: doc.backend,
            basis: doc.basis.clone(),
            domain: doc.domain,
            params,
            metric: doc.metric.clone(),
            structure: doc.structure,
            fields: doc
                .fields
                .iter()
                .map(|(n, c)| (n.clone(), VectorField::from_exprs(n, doc.backend, c.clone())))
                .collect(),
            forms: doc
                .forms
                .iter()
                .map(|(n, c)| (n.clone(), OneFormField { name: n.clone(), components: c.clone() }))
                .collect(),
            two_forms: doc
                .two_forms
                .iter()
                .map(|(n, c)| (n.clone(), TwoFormField { name: n.clone(), components: c.clone() }))
                .collect(),
        };
        spec.check_structure()?;
        Ok(spec)
    }

    pub fn env(&self) -> Env<'_> {
        Env { params: &self.params, coords: &self.basis }
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    fn check_structure(&self) -> Result<()> {
        let c = &self.structure;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    if c[i][j][k] != -c[j][i][k] {
                        return Err(GeometryError::StructureNotAntisymmetric);
                    }
                }
            }
        }
        let r = jacobi_residual(c);
        if r > 1e-12 {
            return Err(GeometryError::Jacobi { residual: r });
        }
        Ok(())
    }

    pub fn in_domain(&self, p: &Vec4) -> bool {
        self.backend == Backend::Frame
            || p.iter().zip(&self.domain).all(|(x, (lo, hi))| x > lo && x < hi)
    }

    pub fn field(&self, name: &str) -> Result<&VectorField> {
        self.fields
            .get(name)
            .ok_or_else(|| GeometryError::Unknown { kind: "field", name: name.to_string() })
    }

    pub fn form(&self, name: &str) -> Result<&OneFormField> {
        self.forms
            .get(name)
            .ok_or_else(|| GeometryError::Unknown { kind: "form", name: name.to_string() })
    }

    pub fn two_form(&self, name: &str) -> Result<&TwoFormField> {
        self.two_forms
            .get(name)
            .ok_or_else(|| GeometryError::Unknown { kind: "two-form", name: name.to_string() })
    }

    fn eval_jet(&self, e: &Expr, seed: &[Jet2; 4], context: impl Fn() -> String) -> Result<Jet2> {
        e.eval(seed, &self.env()).map_err(|source| GeometryError::Eval { context: context(), source })
    }

    pub fn metric_jet(&self, p: &Vec4) -> Result<[[Jet2; 4]; 4]> {
        let seed = Jet2::seed(p);
        let mut g = [[Jet2::default(); 4]; 4];
        for i in 0..4 {
            for j in i..4 {
                let v = self.eval_jet(&self.metric[i][j], &seed, || format!("metric[{i}][{j}]"))?;
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        Ok(g)
    }

    pub fn local(&self, p: &Vec4) -> Result<Local> {
        Ok(Local { point: *p, g: self.metric_jet(p)?, c: self.structure })
    }

    pub fn metric_at(&self, p: &Vec4) -> Result<Mat4> {
        let mut g = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in i..4 {
                let v = self.metric[i][j].eval(p, &self.env()).map_err(|source| {
                    GeometryError::Eval { context: format!("metric[{i}][{j}]"), source }
                })?;
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        Ok(g)
    }

    pub fn inverse_metric_at(&self, p: &Vec4) -> Result<Mat4> {
        let g = self.metric_at(p)?;
        invert_metric(&g, p)
    }

    pub fn vector_jet(&self, x: &VectorField, p: &Vec4) -> Result<[Jet2; 4]> {
        let seed = Jet2::seed(p);
        let mut out = [Jet2::default(); 4];
        for (o, (i, e)) in out.iter_mut().zip(x.components.iter().enumerate()) {
            *o = self.eval_jet(e, &seed, || format!("field {}[{i}]", x.name))?;
        }
        Ok(out)
    }

    pub fn vector_at(&self, x: &VectorField, p: &Vec4) -> Result<Vec4> {
        let mut out = [0.0; 4];
        for (o, (i, e)) in out.iter_mut().zip(x.components.iter().enumerate()) {
            *o = e.eval(p, &self.env()).map_err(|source| GeometryError::Eval {
                context: format!("field {}[{i}]", x.name),
                source,
            })?;
        }
        Ok(out)
    }

    pub fn one_form_jet(&self, a: &OneFormField, p: &Vec4) -> Result<[Jet2; 4]> {
        let seed = Jet2::seed(p);
        let mut out = [Jet2::default(); 4];
        for (o, (i, e)) in out.iter_mut().zip(a.components.iter().enumerate()) {
            *o = self.eval_jet(e, &seed, || format!("form {}[{i}]", a.name))?;
        }
        Ok(out)
    }

    pub fn two_form_jet(&self, w: &TwoFormField, p: &Vec4) -> Result<[[Jet2; 4]; 4]> {
        let seed = Jet2::seed(p);
        let mut out = [[Jet2::default(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] =
                    self.eval_jet(&w.components[i][j], &seed, || format!("form2 {}[{i}][{j}]", w.name))?;
            }
        }
        Ok(out)
    }

    /// `[X, Y]` as a new field with exact symbolic components.
    pub fn lie_bracket(&self, x: &VectorField, y: &VectorField) -> Result<VectorField> {
        if x.backend != self.backend || y.backend != self.backend {
            return Err(GeometryError::BackendMismatch);
        }
        let name = format!("[{},{}]", x.name, y.name);
        let mut comps: [Expr; 4] = std::array::from_fn(|_| Expr::Const(0.0));
        if self.backend == Backend::Coordinate {
            for (k, c) in comps.iter_mut().enumerate() {
                let mut acc = Expr::Const(0.0);
                for i in 0..4 {
                    acc = Expr::add(
                        acc,
                        Expr::mul(x.components[i].clone(), y.components[k].derivative(i)),
                    );
                    acc = Expr::sub(
                        acc,
                        Expr::mul(y.components[i].clone(), x.components[k].derivative(i)),
                    );
                }
                *c = acc;
            }
        }
        for (k, c) in comps.iter_mut().enumerate() {
            for i in 0..4 {
                for j in 0..4 {
                    let s = self.structure[i][j][k];
                    if s != 0.0 {
                        let term = Expr::mul(
                            Expr::cst(s),
                            Expr::mul(x.components[i].clone(), y.components[j].clone()),
                        );
                        *c = Expr::add(std::mem::replace(c, Expr::Const(0.0)), term);
                    }
                }
            }
        }
        Ok(VectorField { name, backend: self.backend, components: comps })
    }

    /// Eigenvalue counts (positive, negative, near-zero) of the metric at `p`.
    pub fn signature_at(&self, p: &Vec4) -> Result<(usize, usize, usize)> {
        Ok(signature_of(&self.metric_at(p)?, 1e-10))
    }

    fn image_checked(&self, phi: &DiffeoMap, p: &Vec4) -> Result<(Vec4, Mat4)> {
        let (q, jac) = phi.jacobian(p, &self.env())?;
        if !self.in_domain(&q) {
            return Err(GeometryError::OutOfDomain { point: q });
        }
        let d = linalg::det(&jac);
        if d.abs() <= 1e-12 {
            return Err(GeometryError::SingularJacobian { point: *p, det: d });
        }
        Ok((q, jac))
    }

    /// `(φ*g)_ij(p) = g_kl(φ(p)) ∂_iφ^k ∂_jφ^l`.
    pub fn pullback_metric(&self, phi: &DiffeoMap, p: &Vec4) -> Result<Mat4> {
        let (q, jac) = self.image_checked(phi, p)?;
        let g = self.metric_at(&q)?;
        Ok(pull_bilinear(&g, &jac))
    }

    pub fn pullback_oneform(&self, a: &OneFormField, phi: &DiffeoMap, p: &Vec4) -> Result<Vec4> {
        let (q, jac) = self.image_checked(phi, p)?;
        let mut vals = [0.0; 4];
        for (v, (i, e)) in vals.iter_mut().zip(a.components.iter().enumerate()) {
            *v = e.eval(&q, &self.env()).map_err(|source| GeometryError::Eval {
                context: format!("form {}[{i}]", a.name),
                source,
            })?;
        }
        Ok(std::array::from_fn(|i| (0..4).map(|k| vals[k] * jac[k][i]).sum()))
    }

    pub fn one_form_at(&self, a: &OneFormField, p: &Vec4) -> Result<Vec4> {
        let mut vals = [0.0; 4];
        for (v, (i, e)) in vals.iter_mut().zip(a.components.iter().enumerate()) {
            *v = e.eval(p, &self.env()).map_err(|source| GeometryError::Eval {
                context: format!("form {}[{i}]", a.name),
                source,
            })?;
        }
        Ok(vals)
    }

    pub fn check_signature(&self, samples: usize, seed: u64) -> CheckReport {
        let pts = sample::sample_points(&self.domain, samples.max(1), seed);
        self.check_signature_at(&pts)
    }

    pub fn check_signature_at(&self, pts: &[Vec4]) -> CheckReport {
        let mut first_bad: Option<String> = None;
        let residuals: Vec<f64> = pts
            .iter()
            .map(|p| match self.signature_at(p) {
                Ok((2, 2, 0)) => 0.0,
                Ok((pos, neg, zero)) => {
                    first_bad.get_or_insert_with(|| {
                        if zero > 0 {
                            format!("signature ({pos},{neg}) with {zero} null eigenvalue(s) at {p:?}")
                        } else {
                            format!("signature ({pos},{neg}) at {p:?}")
                        }
                    });
                    1.0
                }
                Err(e) => {
                    first_bad.get_or_insert_with(|| e.to_string());
                    f64::NAN
                }
            })
            .collect();
        let r = CheckReport::zero("signature (2,2)", 0.5, pts, residuals);
        match first_bad {
            Some(n) => r.with_note(n),
            None => r,
        }
    }
}

pub fn pull_bilinear(g: &Mat4, jac: &Mat4) -> Mat4 {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut s = 0.0;
            for k in 0..4 {
                for l in 0..4 {
                    s += g[k][l] * jac[k][i] * jac[l][j];
                }
            }
            s
        })
    })
}

pub fn invert_metric(g: &Mat4, p: &Vec4) -> Result<Mat4> {
    match linalg::inverse(g) {
        Some(inv) => {
            let condition = linalg::norm_inf(g) * linalg::norm_inf(&inv);
            if !condition.is_finite() || condition > 1e14 {
                return Err(GeometryError::SingularMetric { point: *p, condition });
            }
            Ok(inv)
        }
        None => Err(GeometryError::SingularMetric { point: *p, condition: f64::INFINITY }),
    }
}

pub fn signature_of(g: &Mat4, threshold: f64) -> (usize, usize, usize) {
    let m = Matrix4::from_fn(|i, j| g[i][j]);
    let eig = SymmetricEigen::new(m);
    let mut counts = (0, 0, 0);
    for l in eig.eigenvalues.iter() {
        if *l > threshold {
            counts.0 += 1;
        } else if *l < -threshold {
            counts.1 += 1;
        } else {
            counts.2 += 1;
        }
    }
    counts
}

/// Largest Jacobi-identity defect `Σ_cyc c_ij^m c_mk^n`.
pub fn jacobi_residual(c: &Structure) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for n in 0..4 {
                    let mut s = 0.0;
                    for m in 0..4 {
                        s += c[i][j][m] * c[m][k][n] + c[j][k][m] * c[m][i][n] + c[k][i][m] * c[m][j][n];
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    worst
}

/// Bracket of two jet-valued fields at a point; needs only first derivatives.
pub fn bracket_jet<A: crate::exprdsl::FirstOrder, B: crate::exprdsl::FirstOrder>(
    c: &Structure,
    x: &[A; 4],
    y: &[B; 4],
) -> Vec4 {
    std::array::from_fn(|k| {
        let mut s = 0.0;
        for a in 0..4 {
            s += x[a].val() * y[k].d(a) - y[a].val() * x[k].d(a);
            for b in 0..4 {
                s += c[a][b][k] * x[a].val() * y[b].val();
            }
        }
        s
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::parse_geometry;

    fn petean_like() -> GeometrySpec {
        let doc = parse_geometry(
            r#"geometry "p" { backend coordinate; coords x y u v;
               param c = 2;
               metric { [0][0] = "c + cos(x)"; [1][1] = "c + cos(x)"; [0][2] = "1"; [1][3] = "1"; };
               field K = (0, 0, 1, 0);
               field W = ("x*y", "sin(u)", "v^2", "1/(2 + cos(x))"); }"#,
        )
        .unwrap();
        GeometrySpec::from_document(&doc, &Params::new()).unwrap()
    }

    #[test]
    fn metric_substitution() {
        let g = petean_like();
        let m = g.metric_at(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m[0][0], 3.0);
        assert_eq!(m[1][1], 3.0);
        assert_eq!(m[0][2], 1.0);
        assert_eq!(m[2][0], 1.0);
        assert_eq!(m[2][2], 0.0);
    }

    #[test]
    fn inverse_metric_closed_form() {
        let g = petean_like();
        let p = [0.7, -1.0, 2.0, 3.0];
        let inv = g.inverse_metric_at(&p).unwrap();
        let alpha = 2.0 + 0.7_f64.cos();
        assert!((inv[2][2] + alpha).abs() < 1e-12);
        assert!((inv[3][3] + alpha).abs() < 1e-12);
        assert!((inv[0][2] - 1.0).abs() < 1e-12);
        assert!(inv[0][0].abs() < 1e-12);
        let prod = linalg::mat_mul(&inv, &g.metric_at(&p).unwrap());
        assert!(linalg::max_abs(&linalg::mat_sub(&prod, &linalg::identity())) < 1e-12);
    }

    #[test]
    fn overrides_must_exist() {
        let doc = parse_geometry(r#"geometry "p" { backend coordinate; coords x y u v; metric diag(1,1,-1,-1); }"#)
            .unwrap();
        let mut o = Params::new();
        o.insert("zz".into(), 1.0);
        assert_eq!(
            GeometrySpec::from_document(&doc, &o).unwrap_err(),
            GeometryError::UnknownParam("zz".into())
        );
    }

    #[test]
    fn jacobi_rejects_bad_structure() {
        let doc = parse_geometry(
            r#"geometry "bad" { backend frame; frame A B C D;
               bracket [A,B] = B; bracket [A,C] = D; bracket [B,C] = A; metric diag(1,1,-1,-1); }"#,
        )
        .unwrap();
        assert!(matches!(
            GeometrySpec::from_document(&doc, &Params::new()),
            Err(GeometryError::Jacobi { .. })
        ));
    }

    #[test]
    fn symbolic_bracket_matches_jet_bracket() {
        let g = petean_like();
        let k = g.field("K").unwrap();
        let w = g.field("W").unwrap();
        let b = g.lie_bracket(k, w).unwrap();
        let p = [0.3, 0.4, -0.5, 1.2];
        let sym = g.vector_at(&b, &p).unwrap();
        let jet = bracket_jet(&g.structure, &g.vector_jet(k, &p).unwrap(), &g.vector_jet(w, &p).unwrap());
        for i in 0..4 {
            assert!((sym[i] - jet[i]).abs() < 1e-14);
        }
        assert!((sym[1] - (-0.5_f64).cos()).abs() < 1e-14);
        let self_bracket = g.lie_bracket(w, w).unwrap();
        assert!(g.vector_at(&self_bracket, &p).unwrap().iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn pullback_under_periodic_translation() {
        let g = petean_like();
        let mut comps = DiffeoMap::identity().components;
        comps[0] = Expr::add(Expr::Coord(0), Expr::cst(2.0 * std::f64::consts::PI));
        let phi = DiffeoMap { name: "t".into(), components: comps };
        let p = [-3.0, 1.0, 0.0, 2.0];
        let a = g.pullback_metric(&phi, &p).unwrap();
        let b = g.metric_at(&p).unwrap();
        assert!(linalg::max_abs(&linalg::mat_sub(&a, &b)) < 1e-12);
        let id = g.pullback_metric(&DiffeoMap::identity(), &p).unwrap();
        assert_eq!(id, b);
    }

    #[test]
    fn out_of_domain_image_rejected() {
        let g = petean_like();
        let mut comps = DiffeoMap::identity().components;
        comps[3] = Expr::add(Expr::Coord(3), Expr::cst(50.0));
        let phi = DiffeoMap { name: "far".into(), components: comps };
        assert!(matches!(
            g.pullback_metric(&phi, &[0.0; 4]),
            Err(GeometryError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn counterexample_signature_reported() {
        let doc = parse_geometry(r#"geometry "b" { backend coordinate; coords x y u v; metric diag(1,1,1,-1); }"#)
            .unwrap();
        let g = GeometrySpec::from_document(&doc, &Params::new()).unwrap();
        let r = g.check_signature(10, 1);
        assert!(!r.passed());
        assert!(r.note.unwrap().contains("(3,1)"));
    }
}
