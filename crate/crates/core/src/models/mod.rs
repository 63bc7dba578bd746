//! Shipped model geometries and their distinguished objects.

pub mod hopf;
pub mod inoue;
pub mod kodaira;

use thiserror::Error;

use crate::exprdsl::{parse_expression, parse_geometry, DslError, ExprError, GeometryDocument, Params, SymbolTable};
use crate::geometry::{DiffeoMap, GeometryError, GeometrySpec, VectorField};
use crate::structures::{EndoKind, EndomorphismField, StructureTriple};

pub use hopf::{hopf_remark_search, HopfSearchReport};
pub use inoue::{inoue_constants, inoue_generators, InoueConstants, STANDARD_I};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("unknown model `{0}`")]
    Unknown(String),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: String, reason: String },
    #[error("N has complex eigenvalues (trace {trace})")]
    ComplexEigenvalues { trace: f64 },
    #[error("translation system is singular: ε = {eps} is an eigenvalue of N")]
    SingularSystem { eps: f64 },
    #[error("invariance solve failed: {0}")]
    Solve(String),
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type ModelResult<T> = Result<T, ModelError>;

pub const BUILTIN_NAMES: [&str; 6] = ["flat_neutral", "petean_torus", "kodaira", "sl2r_r", "inoue_s_plus", "hopf"];

pub const FLAT_NEUTRAL_SRC: &str = include_str!("../../models/flat_neutral.geom");
pub const PETEAN_TORUS_SRC: &str = include_str!("../../models/petean_torus.geom");
pub const KODAIRA_SRC: &str = include_str!("../../models/kodaira.geom");
pub const SL2R_R_SRC: &str = include_str!("../../models/sl2r_r.geom");
pub const INOUE_S_PLUS_SRC: &str = include_str!("../../models/inoue_s_plus.geom");
pub const HOPF_SRC: &str = include_str!("../../models/hopf.geom");

#[derive(Clone, Debug, PartialEq)]
pub struct ParamDoc {
    pub name: &'static str,
    pub default: String,
    pub doc: &'static str,
}

/// Names of the real/imaginary parts of a (2,0)-form and of the real form
/// it pairs with.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaPair {
    pub omega: String,
    pub re: String,
    pub im: String,
}

#[derive(Clone, Debug)]
pub struct ModelBundle {
    pub name: String,
    pub document: GeometryDocument,
    pub geometry: GeometrySpec,
    pub x: VectorField,
    pub y: VectorField,
    /// The complex structure in closed form.
    pub complex_structure: EndomorphismField,
    pub omega_pair: Option<OmegaPair>,
    /// Maps under which metric (and shipped forms) are invariant.
    pub generators: Vec<DiffeoMap>,
    pub inoue: Option<InoueConstants>,
    pub kodaira_gamma: Option<(f64, f64)>,
    /// Suites expected to pass.
    pub manifest: Vec<&'static str>,
    pub params: Vec<ParamDoc>,
    pub summary: &'static str,
    /// Shipped model, as opposed to a user document.
    pub builtin: bool,
    /// False when a user document declares no `X`, `Y` fields; the pair is
    /// then zero.
    pub pair_declared: bool,
}

impl ModelBundle {
    pub fn triple(&self) -> StructureTriple {
        StructureTriple::from_null_pair(&self.name, &self.x, &self.y)
    }
}

const COMMON: [&str; 8] =
    ["signature", "curvature", "weyl_split", "para_hyperhermitian", "killing_pair", "david", "lee", "ad_oracle"];

fn manifest(extra: &[&'static str]) -> Vec<&'static str> {
    let mut m = COMMON.to_vec();
    m.extend_from_slice(extra);
    m
}

fn take_int(params: &mut Params, name: &str, default: i64) -> ModelResult<i64> {
    match params.remove(name) {
        None => Ok(default),
        Some(v) if v.fract() == 0.0 && v.abs() < 1e15 => Ok(v as i64),
        Some(v) => Err(ModelError::InvalidParam { name: name.into(), reason: format!("{v} is not an integer") }),
    }
}

fn bundle_from_doc(
    name: &str,
    document: GeometryDocument,
    overrides: &Params,
    manifest: Vec<&'static str>,
    params: Vec<ParamDoc>,
    summary: &'static str,
) -> ModelResult<ModelBundle> {
    let geometry = GeometrySpec::from_document(&document, overrides)?;
    let x = geometry.field("X")?.clone();
    let y = geometry.field("Y")?.clone();
    Ok(ModelBundle {
        pair_declared: true,
        name: name.to_string(),
        document,
        geometry,
        x,
        y,
        complex_structure: EndomorphismField::constant("I", EndoKind::Complex, &STANDARD_I),
        omega_pair: None,
        generators: Vec::new(),
        inoue: None,
        kodaira_gamma: None,
        manifest,
        params,
        summary,
        builtin: true,
    })
}

/// Loads a shipped model. `params` may contain model parameters (listed by
/// [`describe`]) and overrides of document parameters.
pub fn builtin(name: &str, params: &Params) -> ModelResult<ModelBundle> {
    let mut params = params.clone();
    match name {
        "flat_neutral" => bundle_from_doc(
            name,
            parse_geometry(FLAT_NEUTRAL_SRC)?,
            &params,
            manifest(&[]),
            Vec::new(),
            "flat metric diag(1,1,-1,-1); X = E1+E3, Y = E2+E4",
        ),
        "petean_torus" => bundle_from_doc(
            name,
            parse_geometry(PETEAN_TORUS_SRC)?,
            &params,
            manifest(&[]),
            vec![ParamDoc { name: "c", default: "2".into(), doc: "constant in a = c + cos(x)" }],
            "Kaehler Ricci-flat a dz dz* + 2Re(dz dw*); X = d/du, Y = IX = d/dv",
        ),
        "kodaira" => {
            let doc = parse_geometry(KODAIRA_SRC)?;
            let gamma = kodaira::solve_gamma(&doc)?;
            let mut over = params.clone();
            over.insert("gr".into(), gamma.0);
            over.insert("gi".into(), gamma.1);
            let mut b = bundle_from_doc(
                name,
                doc,
                &over,
                manifest(&["inoue_invariance"]),
                vec![
                    ParamDoc { name: "gr", default: "solved".into(), doc: "Re gamma, fixed by lattice invariance" },
                    ParamDoc { name: "gi", default: "solved".into(), doc: "Im gamma, fixed by lattice invariance" },
                ],
                "a = cos(x) - 2Re(gamma z) with the metric invariant under (z,w) -> (z+a, w + conj(a) z + b)",
            )?;
            b.generators = kodaira::generators().to_vec();
            b.kodaira_gamma = Some(gamma);
            Ok(b)
        }
        "sl2r_r" => {
            let mut b = bundle_from_doc(
                name,
                parse_geometry(SL2R_R_SRC)?,
                &params,
                manifest(&[]),
                Vec::new(),
                "bi-invariant metric on SL(2,R) x R; X = V+B, Y = A+C; IV = A, IB = C",
            )?;
            b.omega_pair = Some(OmegaPair { omega: "omega".into(), re: "re_Omega".into(), im: "im_Omega".into() });
            Ok(b)
        }
        "hopf" => bundle_from_doc(
            name,
            parse_geometry(HOPF_SRC)?,
            &params,
            manifest(&["hopf_remark"]),
            Vec::new(),
            "S^1 x SU(2), frame metric diag(1,1,-1,-1); X = X1+X3, Y = X2+X4",
        ),
        "inoue_s_plus" => {
            let n = [
                [take_int(&mut params, "n11", 2)?, take_int(&mut params, "n12", 1)?],
                [take_int(&mut params, "n21", 1)?, take_int(&mut params, "n22", 1)?],
            ];
            let p = take_int(&mut params, "p", 0)?;
            let q = take_int(&mut params, "q", 0)?;
            let r = take_int(&mut params, "r", 1)?;
            let t = (params.remove("t1").unwrap_or(0.0), params.remove("t2").unwrap_or(0.0));
            let eps = params.remove("eps").unwrap_or(1.0);
            let c = inoue_constants(n, p, q, r, t, eps)?;
            let default = c == InoueConstants::default_s_plus();
            let doc = if default { parse_geometry(INOUE_S_PLUS_SRC)? } else { inoue::inoue_document(&c) };
            let mut b = bundle_from_doc(
                name,
                doc,
                &params,
                manifest(&["inoue_invariance"]),
                inoue_param_docs(),
                "Inoue S+ cover C x H; frame X1..X4 dual to a1..a4; metric from Omega1 and I; X = X1, Y = X2",
            )?;
            b.generators = inoue_generators(&c).to_vec();
            b.inoue = Some(c);
            b.omega_pair = Some(OmegaPair { omega: "Omega1".into(), re: "Omega2".into(), im: "Omega3".into() });
            Ok(b)
        }
        other => Err(ModelError::Unknown(other.to_string())),
    }
}

/// Bundle for a user document declaring fields `X` and `Y`; its manifest is
/// empty.
pub fn from_document(document: GeometryDocument, params: &Params) -> ModelResult<ModelBundle> {
    let name = document.name.clone();
    let geometry = GeometrySpec::from_document(&document, params)?;
    if geometry.field("X").is_err() || geometry.field("Y").is_err() {
        let zero = |n: &str| VectorField::constant(n, geometry.backend, [0.0; 4]);
        let (x, y) = (zero("X"), zero("Y"));
        return Ok(ModelBundle {
            name,
            document,
            geometry,
            x,
            y,
            complex_structure: EndomorphismField::constant("I", EndoKind::Complex, &STANDARD_I),
            omega_pair: None,
            generators: Vec::new(),
            inoue: None,
            kodaira_gamma: None,
            manifest: Vec::new(),
            params: Vec::new(),
            summary: "user geometry",
            builtin: false,
            pair_declared: false,
        });
    }
    let mut b = bundle_from_doc(&name, document, params, Vec::new(), Vec::new(), "user geometry")?;
    b.builtin = false;
    Ok(b)
}

fn inoue_param_docs() -> Vec<ParamDoc> {
    let d = |name, default: &str, doc| ParamDoc { name, default: default.to_string(), doc };
    vec![
        d("n11", "2", "N = [[n11, n12], [n21, n22]], integer, det 1, trace > 2"),
        d("n12", "1", ""),
        d("n21", "1", ""),
        d("n22", "1", ""),
        d("p", "0", "integer"),
        d("q", "0", "integer"),
        d("r", "1", "nonzero integer"),
        d("t1", "0", "Re t"),
        d("t2", "0", "Im t"),
        d("eps", "1", "sign ε"),
    ]
}

/// The `ω_f` variant of the Inoue cover for `f(u, v)` given as text.
pub fn inoue_omega_f(c: &InoueConstants, f: &str) -> ModelResult<GeometrySpec> {
    let table = SymbolTable::new(&["x", "y", "u", "v"], &[]);
    let fe = parse_expression(f, &table)?;
    let doc = inoue::inoue_omega_f_document(c, &fe)?;
    Ok(GeometrySpec::from_document(&doc, &Params::new())?)
}

/// Text listing of a model: summary, parameters and manifest.
pub fn describe(name: &str) -> ModelResult<String> {
    use std::fmt::Write;
    let b = builtin(name, &Params::new())?;
    let mut s = String::new();
    let _ = writeln!(s, "{}: {}", b.name, b.summary);
    let _ = writeln!(s, "backend: {}", b.geometry.backend.keyword());
    let _ = writeln!(s, "basis: {}", b.geometry.basis.join(" "));
    if b.params.is_empty() && b.geometry.params.is_empty() {
        let _ = writeln!(s, "parameters: none");
    } else {
        let _ = writeln!(s, "parameters:");
        for p in &b.params {
            let _ = writeln!(s, "  {} = {}  {}", p.name, p.default, p.doc);
        }
        for (k, v) in &b.geometry.params {
            if !b.params.iter().any(|p| p.name == k) {
                let _ = writeln!(s, "  {k} = {v:?}  (document)");
            }
        }
    }
    if let Some(c) = &b.inoue {
        let _ = writeln!(
            s,
            "constants: N = {:?}, p = {}, q = {}, r = {}, t = {} + {}i, eps = {}, alpha = {:?}, c = {:?}",
            c.n, c.p, c.q, c.r, c.t.0, c.t.1, c.eps, c.alpha, c.c
        );
    }
    let _ = writeln!(s, "suites: {}", b.manifest.join(", "));
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::linalg;
    use crate::geometry::sample::sample_points;

    #[test]
    fn all_builtins_load() {
        for n in BUILTIN_NAMES {
            let b = builtin(n, &Params::new()).unwrap();
            assert_eq!(b.name, n);
            assert!(describe(n).unwrap().contains(n));
        }
        assert!(matches!(builtin("nope", &Params::new()), Err(ModelError::Unknown(_))));
    }

    #[test]
    fn shipped_inoue_file_matches_generator() {
        let doc = inoue::inoue_document(&InoueConstants::default_s_plus());
        assert_eq!(doc.to_dsl(), INOUE_S_PLUS_SRC);
        assert_eq!(parse_geometry(INOUE_S_PLUS_SRC).unwrap().to_dsl(), INOUE_S_PLUS_SRC);
    }

    #[test]
    #[ignore = "rewrites models/inoue_s_plus.geom"]
    fn regenerate_inoue_file() {
        let doc = inoue::inoue_document(&InoueConstants::default_s_plus());
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/models/inoue_s_plus.geom");
        std::fs::write(path, doc.to_dsl()).unwrap();
    }

    #[test]
    fn hopf_x_is_null() {
        let b = builtin("hopf", &Params::new()).unwrap();
        let p = [0.0; 4];
        let g = b.geometry.metric_at(&p).unwrap();
        let x = b.geometry.vector_at(&b.x, &p).unwrap();
        assert_eq!(linalg::bilinear(&g, &x, &x), 0.0);
    }

    #[test]
    fn petean_determinant_is_one() {
        let b = builtin("petean_torus", &Params::new()).unwrap();
        for p in sample_points(&b.geometry.domain, 100, 11) {
            let d = linalg::det(&b.geometry.metric_at(&p).unwrap());
            assert!((d - 1.0).abs() < 1e-12, "{d}");
        }
    }

    #[test]
    fn inoue_frame_is_dual_to_coframe() {
        let b = builtin("inoue_s_plus", &Params::new()).unwrap();
        let g = &b.geometry;
        for p in sample_points(&g.domain, 100, 5) {
            for i in 0..4 {
                let a = g.one_form_at(g.form(&format!("a{}", i + 1)).unwrap(), &p).unwrap();
                for j in 0..4 {
                    let x = g.vector_at(g.field(&format!("X{}", j + 1)).unwrap(), &p).unwrap();
                    let d: f64 = (0..4).map(|k| a[k] * x[k]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((d - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn inoue_parameters_validated() {
        let mut p = Params::new();
        p.insert("n12".into(), 2.0);
        assert!(matches!(builtin("inoue_s_plus", &p), Err(ModelError::InvalidParam { .. })));
        p.insert("n12".into(), 0.5);
        assert!(matches!(builtin("inoue_s_plus", &p), Err(ModelError::InvalidParam { .. })));
    }
}
