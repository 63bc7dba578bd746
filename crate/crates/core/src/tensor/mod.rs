//! Connection, curvature, Hodge star and the calculus of forms.

pub mod connection;
pub mod forms;
pub mod frame;

use thiserror::Error;

use crate::geometry::linalg::{self, Mat4, Vec4};
use crate::geometry::{GeometryError, GeometrySpec, OneFormField, TwoFormField, VectorField};

pub use connection::{Christoffel, ConnectionJet, CurvatureAtPoint, Tensor3, Tensor4};
pub use forms::hodge_star_2;
pub use frame::{build_orthonormal_frame, OrthonormalFrame};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("metric is singular at {point:?}")]
    SingularMetric { point: Vec4 },
    #[error("metric signature is ({pos},{neg}), not (2,2)")]
    Signature { pos: usize, neg: usize },
    #[error("degenerate subspace in Gram-Schmidt after {attempts} attempts")]
    DegenerateFrame { attempts: usize },
}

pub type TensorResult<T> = Result<T, TensorError>;

pub fn connection_at(geom: &GeometrySpec, p: &Vec4) -> TensorResult<ConnectionJet> {
    ConnectionJet::new(&geom.local(p)?)
}

pub fn christoffel_at(geom: &GeometrySpec, p: &Vec4) -> TensorResult<Christoffel> {
    Ok(connection_at(geom, p)?.christoffel())
}

/// `(∇_{e_a} X)^k` as `m[a][k]`.
pub fn covariant_derivative_vector(geom: &GeometrySpec, x: &VectorField, p: &Vec4) -> TensorResult<Mat4> {
    let conn = connection_at(geom, p)?;
    Ok(conn.covariant_derivative(&geom.vector_jet(x, p)?))
}

pub fn riemann_at(geom: &GeometrySpec, p: &Vec4) -> TensorResult<CurvatureAtPoint> {
    Ok(CurvatureAtPoint::from_connection(&connection_at(geom, p)?))
}

pub fn divergence(geom: &GeometrySpec, x: &VectorField, p: &Vec4) -> TensorResult<f64> {
    Ok(connection_at(geom, p)?.divergence(&geom.vector_jet(x, p)?))
}

pub fn codifferential_2(geom: &GeometrySpec, w: &TwoFormField, p: &Vec4) -> TensorResult<Vec4> {
    let conn = connection_at(geom, p)?;
    let j = conn.codifferential_jet(&geom.two_form_jet(w, p)?);
    Ok(forms::vec_form_values(&j))
}

pub fn exterior_derivative_1(geom: &GeometrySpec, a: &OneFormField, p: &Vec4) -> TensorResult<Mat4> {
    Ok(forms::d1(&geom.one_form_jet(a, p)?, &geom.structure))
}

pub fn exterior_derivative_2(geom: &GeometrySpec, w: &TwoFormField, p: &Vec4) -> TensorResult<Tensor3> {
    Ok(forms::d2(&geom.two_form_jet(w, p)?, &geom.structure))
}

/// The six bivectors `s_i^±` built from an oriented orthonormal frame, as
/// contravariant antisymmetric tensors.
pub fn eigen_bivectors(frame: &OrthonormalFrame) -> ([Mat4; 3], [Mat4; 3]) {
    let e = &frame.vectors;
    let bv = |a: usize, b: usize| -> Mat4 {
        std::array::from_fn(|i| std::array::from_fn(|j| e[a][i] * e[b][j] - e[b][i] * e[a][j]))
    };
    let add = |x: Mat4, y: Mat4, s: f64| linalg::mat_add(&x, &linalg::mat_scale(&y, s));
    let plus = [add(bv(0, 1), bv(2, 3), 1.0), add(bv(0, 2), bv(3, 1), -1.0), add(bv(0, 3), bv(1, 2), -1.0)];
    let minus = [add(bv(0, 1), bv(2, 3), -1.0), add(bv(0, 2), bv(3, 1), 1.0), add(bv(0, 3), bv(1, 2), 1.0)];
    (plus, minus)
}

/// Lowers both indices of a bivector.
pub fn lower_bivector(g: &Mat4, s: &Mat4) -> Mat4 {
    linalg::mat_mul(&linalg::mat_mul(g, s), g)
}

/// Weyl curvature restricted to the self-dual and anti-self-dual bivectors.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylSplit {
    /// `plus[i][j] = W(s_i^+, s_j^+)`.
    pub plus: [[f64; 3]; 3],
    pub minus: [[f64; 3]; 3],
    /// Largest `|W(s_i^+, s_j^-)|`; vanishes for a Weyl tensor.
    pub mixed: f64,
}

impl WeylSplit {
    pub fn plus_norm(&self) -> f64 {
        self.plus.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn minus_norm(&self) -> f64 {
        self.minus.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Operator trace; the bivectors have squared norms `(2, −2, −2)`.
    pub fn traces(&self) -> (f64, f64) {
        let t = |m: &[[f64; 3]; 3]| (m[0][0] - m[1][1] - m[2][2]) / 2.0;
        (t(&self.plus), t(&self.minus))
    }

    pub fn symmetry_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.plus[i][j] - self.plus[j][i]).abs());
                worst = worst.max((self.minus[i][j] - self.minus[j][i]).abs());
            }
        }
        worst
    }
}

pub fn weyl_split(weyl: &Tensor4, frame: &OrthonormalFrame) -> WeylSplit {
    let (plus_b, minus_b) = eigen_bivectors(frame);
    let pair = |s: &Mat4, t: &Mat4| -> f64 {
        let mut v = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                if s[a][b] == 0.0 {
                    continue;
                }
                for c in 0..4 {
                    for d in 0..4 {
                        v += weyl[a][b][c][d] * s[a][b] * t[c][d];
                    }
                }
            }
        }
        v / 4.0
    };
    let plus = std::array::from_fn(|i| std::array::from_fn(|j| pair(&plus_b[i], &plus_b[j])));
    let minus = std::array::from_fn(|i| std::array::from_fn(|j| pair(&minus_b[i], &minus_b[j])));
    let mut mixed = 0.0_f64;
    for s in &plus_b {
        for t in &minus_b {
            mixed = mixed.max(pair(s, t).abs());
        }
    }
    WeylSplit { plus, minus, mixed }
}

/// Weyl halves at `p` for the given orientation (`+1` = basis order).
pub fn weyl_split_at(geom: &GeometrySpec, p: &Vec4, orientation: f64) -> TensorResult<WeylSplit> {
    let conn = connection_at(geom, p)?;
    let curv = CurvatureAtPoint::from_connection(&conn);
    let frame = build_orthonormal_frame(&conn.metric(), None)?.oriented(orientation);
    Ok(weyl_split(&curv.weyl, &frame))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::{parse_geometry, Params};

    fn spec(src: &str) -> GeometrySpec {
        GeometrySpec::from_document(&parse_geometry(src).unwrap(), &Params::new()).unwrap()
    }

    /// Round 2-sphere times flat plane in coordinates (θ, φ, u, v) with the
    /// plane negative definite.
    fn sphere_plane() -> GeometrySpec {
        spec(
            r#"geometry "s2" { backend coordinate; coords t f u v; domain t (0.5, 2.5);
               metric { [0][0] = "1"; [1][1] = "sin(t)^2"; [2][2] = "-1"; [3][3] = "-1"; }; }"#,
        )
    }

    #[test]
    fn sphere_ricci_is_positive() {
        let g = sphere_plane();
        let c = riemann_at(&g, &[1.1, 0.3, 0.0, 0.0]).unwrap();
        assert!((c.ricci[0][0] - 1.0).abs() < 1e-12);
        assert!((c.ricci[1][1] - 1.1_f64.sin().powi(2)).abs() < 1e-12);
        assert!((c.scalar - 2.0).abs() < 1e-12);
        assert!(c.symmetry_residual() < 1e-12);
    }

    #[test]
    fn weyl_is_trace_free_and_commutes_with_star() {
        let g = sphere_plane();
        let p = [0.9, 0.1, 0.2, 0.3];
        let conn = connection_at(&g, &p).unwrap();
        let c = CurvatureAtPoint::from_connection(&conn);
        assert!(c.weyl_trace_residual(&conn.inverse_metric()) < 1e-12);
        let w = weyl_split_at(&g, &p, 1.0).unwrap();
        assert!(w.mixed < 1e-12);
        let (tp, tm) = w.traces();
        assert!(tp.abs() < 1e-12 && tm.abs() < 1e-12);
        assert!(w.symmetry_residual() < 1e-12);
    }

    #[test]
    fn frame_structure_constants_enter_connection() {
        let g = spec(
            r#"geometry "h" { backend frame; frame X1 X2 X3 X4;
               bracket [X2,X3] = X4; bracket [X3,X4] = X2; bracket [X4,X2] = X3;
               metric diag(1, 1, 1, 1); }"#,
        );
        let conn = connection_at(&g, &[0.0; 4]).unwrap();
        assert!(connection::torsion_residual(&conn) < 1e-15);
        assert!(connection::compatibility_residual(&conn) < 1e-15);
        let c = CurvatureAtPoint::from_connection(&conn);
        // bi-invariant metric on su(2): sectional curvature 1/4 ⇒ Ric = ½ g there
        assert!((c.ricci[1][1] - 0.5).abs() < 1e-14);
        assert!(c.ricci[0][0].abs() < 1e-14);
    }

    #[test]
    fn euler_field_divergence() {
        let g = spec(
            r#"geometry "f" { backend coordinate; coords x y u v; metric diag(1,1,-1,-1);
               field E = ("x", "y", "u", "v"); }"#,
        );
        let d = divergence(&g, g.field("E").unwrap(), &[0.4, 1.0, -2.0, 3.0]).unwrap();
        assert_eq!(d, 4.0);
    }
}
