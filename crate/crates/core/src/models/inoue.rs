//! Inoue surfaces of type S⁺ on the universal cover `C × H`.
//!
//! Real coordinates `z = x + iy`, `w = u + iv` with `v > 0`.

use indexmap::IndexMap;

use crate::exprdsl::{Backend, Expr, GeometryDocument, UnaryOp};
use crate::geometry::DiffeoMap;

use super::{ModelError, ModelResult};

/// Lattice data of an Inoue surface and the solved translation constants.
#[derive(Clone, Debug, PartialEq)]
pub struct InoueConstants {
    pub n: [[i64; 2]; 2],
    /// Eigenvalue `> 1`.
    pub alpha: f64,
    /// Eigenvector for `alpha`, first nonzero component 1.
    pub a: [f64; 2],
    /// Eigenvector for `1/alpha`.
    pub b: [f64; 2],
    pub p: i64,
    pub q: i64,
    pub r: i64,
    /// `(Re t, Im t)`.
    pub t: (f64, f64),
    pub eps: f64,
    pub e: [f64; 2],
    pub c: [f64; 2],
}

fn eigenvector(n: &[[f64; 2]; 2], lambda: f64) -> [f64; 2] {
    let v = if n[0][1] != 0.0 {
        [n[0][1], lambda - n[0][0]]
    } else {
        [lambda - n[1][1], n[1][0]]
    };
    let lead = if v[0] != 0.0 { v[0] } else { v[1] };
    [v[0] / lead, v[1] / lead]
}

pub fn inoue_constants(n: [[i64; 2]; 2], p: i64, q: i64, r: i64, t: (f64, f64), eps: f64) -> ModelResult<InoueConstants> {
    let det = n[0][0] * n[1][1] - n[0][1] * n[1][0];
    if det != 1 {
        return Err(ModelError::InvalidParam { name: "N".into(), reason: format!("det N = {det}, expected 1") });
    }
    if r == 0 {
        return Err(ModelError::InvalidParam { name: "r".into(), reason: "r must be nonzero".into() });
    }
    if eps != 1.0 && eps != -1.0 {
        return Err(ModelError::InvalidParam { name: "eps".into(), reason: format!("{eps} is not ±1") });
    }
    let nf = n.map(|row| row.map(|v| v as f64));
    let tr = nf[0][0] + nf[1][1];
    let disc = tr * tr - 4.0;
    if disc < 0.0 {
        return Err(ModelError::ComplexEigenvalues { trace: tr });
    }
    let alpha = (tr + disc.sqrt()) / 2.0;
    if !(alpha > 1.0) || tr <= 2.0 {
        return Err(ModelError::InvalidParam {
            name: "N".into(),
            reason: format!("no real eigenvalue > 1 with positive reciprocal (trace {tr})"),
        });
    }
    let a = eigenvector(&nf, alpha);
    let b = eigenvector(&nf, 1.0 / alpha);
    let e: [f64; 2] = std::array::from_fn(|k| {
        let (nk1, nk2) = (nf[k][0], nf[k][1]);
        0.5 * nk1 * (nk1 - 1.0) * a[0] * b[0] + 0.5 * nk2 * (nk2 - 1.0) * a[1] * b[1] + nk1 * nk2 * b[0] * a[1]
    });
    let k = (b[0] * a[1] - b[1] * a[0]) / r as f64;
    // (εI − N) cᵀ = (e + k(p,q))ᵀ
    let rhs = [e[0] + k * p as f64, e[1] + k * q as f64];
    let m = [[eps - nf[0][0], -nf[0][1]], [-nf[1][0], eps - nf[1][1]]];
    let dm = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if dm.abs() < 1e-12 {
        return Err(ModelError::SingularSystem { eps });
    }
    let c = [(rhs[0] * m[1][1] - m[0][1] * rhs[1]) / dm, (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / dm];
    Ok(InoueConstants { n, alpha, a, b, p, q, r, t, eps, e, c })
}

impl InoueConstants {
    pub fn default_s_plus() -> Self {
        inoue_constants([[2, 1], [1, 1]], 0, 0, 1, (0.0, 0.0), 1.0).expect("default Inoue data is valid")
    }

    fn nf(&self) -> [[f64; 2]; 2] {
        self.n.map(|row| row.map(|v| v as f64))
    }

    /// `(b₁a₂ − b₂a₁)/r`.
    pub fn shift(&self) -> f64 {
        (self.b[0] * self.a[1] - self.b[1] * self.a[0]) / self.r as f64
    }

    /// Largest residual of the translation-constant equation.
    pub fn cc_residual(&self) -> f64 {
        let n = self.nf();
        let k = self.shift();
        let pq = [self.p as f64, self.q as f64];
        (0..2)
            .map(|i| {
                let cn = self.c[0] * n[i][0] + self.c[1] * n[i][1];
                (self.eps * self.c[i] - cn - self.e[i] - k * pq[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest residual of the two eigenvector equations.
    pub fn eigen_residual(&self) -> f64 {
        let n = self.nf();
        let mut worst = 0.0_f64;
        for (v, l) in [(self.a, self.alpha), (self.b, 1.0 / self.alpha)] {
            for i in 0..2 {
                worst = worst.max((n[i][0] * v[0] + n[i][1] * v[1] - l * v[i]).abs());
            }
        }
        worst
    }
}

fn coord(i: usize) -> Expr {
    Expr::Coord(i)
}

/// The four generators `g₀, g₁, g₂, g₃` as maps of `(x, y, u, v)`.
pub fn inoue_generators(c: &InoueConstants) -> [DiffeoMap; 4] {
    let k = |v: f64| Expr::cst(v);
    let lin = |a: Expr, s: f64, b: Expr, off: f64| Expr::add(Expr::add(a, Expr::mul(k(s), b)), k(off));
    let half = 0.5 * (1.0 + c.eps);
    let g0 = DiffeoMap {
        name: "g0".into(),
        components: [
            Expr::add(Expr::mul(k(c.eps), coord(0)), k(half * c.t.0)),
            Expr::add(Expr::mul(k(c.eps), coord(1)), k(half * c.t.1)),
            Expr::mul(k(c.alpha), coord(2)),
            Expr::mul(k(c.alpha), coord(3)),
        ],
    };
    let gk = |i: usize| DiffeoMap {
        name: format!("g{}", i + 1),
        components: [
            lin(coord(0), c.b[i], coord(2), c.c[i]),
            lin(coord(1), c.b[i], coord(3), 0.0),
            Expr::add(coord(2), k(c.a[i])),
            coord(3),
        ],
    };
    let g3 = DiffeoMap {
        name: "g3".into(),
        components: [Expr::add(coord(0), k(c.shift())), coord(1), coord(2), coord(3)],
    };
    [g0, gk(0), gk(1), g3]
}

pub(crate) fn wedge(a: &[Expr; 4], b: &[Expr; 4]) -> [[Expr; 4]; 4] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            if i == j {
                Expr::cst(0.0)
            } else {
                Expr::sub(Expr::mul(a[i].clone(), b[j].clone()), Expr::mul(a[j].clone(), b[i].clone()))
            }
        })
    })
}

fn combine2(a: &[[Expr; 4]; 4], s: f64, b: &[[Expr; 4]; 4]) -> [[Expr; 4]; 4] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            if s > 0.0 {
                Expr::add(a[i][j].clone(), b[i][j].clone())
            } else {
                Expr::sub(a[i][j].clone(), b[i][j].clone())
            }
        })
    })
}

/// `I ∂x = ∂y`, `I ∂u = ∂v` (also the frame structure on every shipped model).
pub const STANDARD_I: [[f64; 4]; 4] =
    [[0.0, -1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, -1.0], [0.0, 0.0, 1.0, 0.0]];

/// `g(X,Y) = ω(X, IY)` assembled symbolically for constant `I`.
pub(crate) fn metric_from_form(w: &[[Expr; 4]; 4], i: &[[f64; 4]; 4]) -> [[Expr; 4]; 4] {
    let upper: [[Expr; 4]; 4] = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut s = Expr::cst(0.0);
            for k in 0..4 {
                if i[k][b] != 0.0 {
                    s = Expr::add(s, Expr::mul(w[a][k].clone(), Expr::cst(i[k][b])));
                }
            }
            s
        })
    });
    std::array::from_fn(|a| std::array::from_fn(|b| if a <= b { upper[a][b].clone() } else { upper[b][a].clone() }))
}

/// `h = y − t₂ ln v / ln α`.
fn h_expr() -> Expr {
    let log_v = Expr::unary(UnaryOp::Log, coord(3));
    Expr::sub(coord(1), Expr::div(Expr::mul(Expr::param("t2"), log_v), Expr::param("lnalpha")))
}

/// The coframe `α₁, …, α₄`.
pub fn inoue_coframe() -> [[Expr; 4]; 4] {
    let z = || Expr::cst(0.0);
    let hv = Expr::div(h_expr(), coord(3));
    let inv_v = Expr::div(Expr::cst(1.0), coord(3));
    [
        [Expr::cst(1.0), z(), Expr::neg(hv.clone()), z()],
        [z(), Expr::cst(1.0), z(), Expr::neg(hv)],
        [z(), z(), inv_v.clone(), z()],
        [z(), z(), z(), inv_v],
    ]
}

/// `(Ω₁, Ω₂, Ω₃)` built from the coframe.
pub fn inoue_fundamental_forms() -> [[[Expr; 4]; 4]; 3] {
    let a = inoue_coframe();
    let w13 = wedge(&a[0], &a[2]);
    let w24 = wedge(&a[1], &a[3]);
    let w14 = wedge(&a[0], &a[3]);
    let w23 = wedge(&a[1], &a[2]);
    [combine2(&w13, 1.0, &w24), combine2(&w13, -1.0, &w24), combine2(&w14, 1.0, &w23)]
}

fn base_document(name: &str, c: &InoueConstants) -> GeometryDocument {
    let basis = ["x", "y", "u", "v"].map(String::from);
    let mut params = IndexMap::new();
    params.insert("t2".to_string(), Expr::cst(c.t.1));
    params.insert("lnalpha".to_string(), Expr::cst(c.alpha.ln()));
    let a = inoue_coframe();
    let h = h_expr();
    let z = || Expr::cst(0.0);
    let one = || Expr::cst(1.0);
    let mut fields = IndexMap::new();
    fields.insert("X1".to_string(), [one(), z(), z(), z()]);
    fields.insert("X2".to_string(), [z(), one(), z(), z()]);
    fields.insert("X3".to_string(), [h.clone(), z(), coord(3), z()]);
    fields.insert("X4".to_string(), [z(), h, z(), coord(3)]);
    fields.insert("X".to_string(), [one(), z(), z(), z()]);
    fields.insert("Y".to_string(), [z(), one(), z(), z()]);
    let mut forms = IndexMap::new();
    for (k, f) in a.iter().enumerate() {
        forms.insert(format!("a{}", k + 1), f.clone());
    }
    let w = inoue_fundamental_forms();
    let mut two_forms = IndexMap::new();
    for (k, f) in w.iter().enumerate() {
        two_forms.insert(format!("Omega{}", k + 1), f.clone());
    }
    GeometryDocument {
        name: name.to_string(),
        backend: Backend::Coordinate,
        basis,
        domain: [(-10.0, 10.0), (-10.0, 10.0), (-10.0, 10.0), (0.1, 10.0)],
        params,
        metric: metric_from_form(&w[0], &STANDARD_I),
        structure: [[[0.0; 4]; 4]; 4],
        fields,
        forms,
        two_forms,
    }
}

/// Geometry on `C × H` with the metric recovered from `Ω₁` and `I`.
pub fn inoue_document(c: &InoueConstants) -> GeometryDocument {
    base_document("inoue_s_plus", c)
}

/// The same cover with `ω_f = Ω₁ + f α₃∧α₄` as fundamental form of `I`;
/// `f` is an expression in `(u, v)`.
pub fn inoue_omega_f_document(c: &InoueConstants, f: &Expr) -> ModelResult<GeometryDocument> {
    let used = f.coords_used();
    if used[0] || used[1] {
        return Err(ModelError::InvalidParam { name: "f".into(), reason: "f must not depend on x or y".into() });
    }
    let mut doc = base_document("inoue_omega_f", c);
    let a = inoue_coframe();
    let w34 = wedge(&a[2], &a[3]);
    let w1 = &doc.two_forms["Omega1"];
    let wf: [[Expr; 4]; 4] =
        std::array::from_fn(|i| std::array::from_fn(|j| Expr::add(w1[i][j].clone(), Expr::mul(f.clone(), w34[i][j].clone()))));
    doc.metric = metric_from_form(&wf, &STANDARD_I);
    doc.two_forms.insert("omega_f".to_string(), wf);
    Ok(doc)
}

/// Non-negative `f(u, v)` choices shipped for the `ω_f` family.
pub const OMEGA_F_CHOICES: [&str; 3] = ["1", "exp(-u*u)", "1 + 0.5*sin(u)*cos(log(v))"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_constants() {
        let c = InoueConstants::default_s_plus();
        let alpha = (3.0 + 5.0_f64.sqrt()) / 2.0;
        assert!((c.alpha - alpha).abs() < 1e-15);
        // characteristic polynomial λ² − 3λ + 1
        assert!((c.alpha * c.alpha - 3.0 * c.alpha + 1.0).abs() < 1e-14);
        assert_eq!(c.a[0], 1.0);
        assert_eq!(c.b[0], 1.0);
        assert!(c.eigen_residual() < 1e-12);
        assert!(c.cc_residual() < 1e-12);
    }

    #[test]
    fn nontrivial_pqr_solves_cc() {
        let c = inoue_constants([[3, 2], [1, 1]], 2, -1, 3, (0.5, 1.0), 1.0).unwrap();
        assert!(c.cc_residual() < 1e-12);
        let c = inoue_constants([[5, 2], [2, 1]], 1, 1, -2, (0.0, 0.0), -1.0).unwrap();
        assert!(c.cc_residual() < 1e-12);
    }

    #[test]
    fn rejects_bad_data() {
        assert!(matches!(
            inoue_constants([[0, 1], [-1, 0]], 0, 0, 1, (0.0, 0.0), 1.0),
            Err(ModelError::ComplexEigenvalues { .. })
        ));
        assert!(matches!(
            inoue_constants([[2, 1], [1, 2]], 0, 0, 1, (0.0, 0.0), 1.0),
            Err(ModelError::InvalidParam { .. })
        ));
        assert!(inoue_constants([[2, 1], [1, 1]], 0, 0, 0, (0.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn generators_act_as_written() {
        let c = InoueConstants::default_s_plus();
        let gens = inoue_generators(&c);
        let params = crate::exprdsl::Params::new();
        let names = ["x", "y", "u", "v"].map(String::from);
        let env = crate::exprdsl::Env { params: &params, coords: &names };
        let p = [0.3, -0.2, 1.5, 2.0];
        let q = gens[3].apply(&p, &env).unwrap();
        assert!((q[0] - p[0] - c.shift()).abs() < 1e-15);
        assert_eq!(&q[1..], &p[1..]);
        let q = gens[0].apply(&p, &env).unwrap();
        assert!((q[3] - c.alpha * p[3]).abs() < 1e-15 && q[3] > 0.0);
        for g in &gens[1..3] {
            assert_eq!(g.apply(&p, &env).unwrap()[3], p[3]);
        }
    }
}
