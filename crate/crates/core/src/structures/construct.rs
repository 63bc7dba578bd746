//! Pointwise constructions from a pair of orthogonal null vectors.
//!
//! Generic over [`Scalar`]: run on jets they carry exact derivatives of the
//! constructed fields.

use nalgebra::DMatrix;

use crate::exprdsl::Scalar;
use crate::geometry::linalg::{self, Mat4, Vec4};

use super::{StructureError, StructureResult};

type V<S> = [S; 4];
type M<S> = [[S; 4]; 4];

/// Checks that `x`, `y` are null, orthogonal and independent.
pub fn null_pair_precondition(g: &Mat4, x: &Vec4, y: &Vec4) -> StructureResult<()> {
    let scale = linalg::max_abs(g).max(1.0);
    let nx = linalg::euclid(x);
    let ny = linalg::euclid(y);
    let tol = 1e-9;
    let xx = linalg::bilinear(g, x, x);
    if xx.abs() > tol * scale * nx * nx.max(1.0) {
        return Err(StructureError::Precondition { condition: "X not null", residual: xx });
    }
    let yy = linalg::bilinear(g, y, y);
    if yy.abs() > tol * scale * ny * ny.max(1.0) {
        return Err(StructureError::Precondition { condition: "Y not null", residual: yy });
    }
    let xy = linalg::bilinear(g, x, y);
    if xy.abs() > tol * scale * nx.max(1.0) * ny.max(1.0) {
        return Err(StructureError::Precondition { condition: "X, Y not orthogonal", residual: xy });
    }
    let wedge = independence(x, y);
    if wedge <= 1e-8 {
        return Err(StructureError::Precondition { condition: "X, Y dependent", residual: wedge });
    }
    Ok(())
}

/// `‖x∧y‖∞ / (|x||y|)`.
pub fn independence(x: &Vec4, y: &Vec4) -> f64 {
    let n = linalg::euclid(x) * linalg::euclid(y);
    if n == 0.0 {
        return 0.0;
    }
    let mut m = 0.0_f64;
    for i in 0..4 {
        for j in 0..4 {
            m = m.max((x[i] * y[j] - x[j] * y[i]).abs());
        }
    }
    m / n
}

/// Least-norm (chart-Euclidean) solution of `g(X,Z)=1, g(Y,Z)=0,
/// g(X,T)=0, g(Y,T)=1`.
pub fn complete_null_pair<S: Scalar>(g: &M<S>, x: &V<S>, y: &V<S>) -> (V<S>, V<S>) {
    let lx = linalg::lower(g, x);
    let ly = linalg::lower(g, y);
    let dot = |a: &V<S>, b: &V<S>| {
        let mut s = S::zero();
        for i in 0..4 {
            s = s + a[i] * b[i];
        }
        s
    };
    let a11 = dot(&lx, &lx);
    let a12 = dot(&lx, &ly);
    let a22 = dot(&ly, &ly);
    let inv_det = (a11 * a22 - a12 * a12).recip();
    let z = std::array::from_fn(|i| (a22 * lx[i] - a12 * ly[i]) * inv_det);
    let t = std::array::from_fn(|i| (a11 * ly[i] - a12 * lx[i]) * inv_det);
    (z, t)
}

/// Orthonormal frame `(E_1, …, E_4)` with norms `(1, 1, −1, −1)`.
pub fn null_frame<S: Scalar>(g: &M<S>, x: &V<S>, y: &V<S>, z: &V<S>, t: &V<S>) -> [V<S>; 4] {
    let a = linalg::bilinear(g, z, z);
    let b = linalg::bilinear(g, t, t);
    let c = linalg::bilinear(g, z, t);
    let half = |s: S| s.scale(0.5);
    let one = S::one();
    let e1 = std::array::from_fn(|i| half(one - a) * x[i] + z[i]);
    let e2 = std::array::from_fn(|i| half(one - b) * y[i] + t[i] - c * x[i]);
    let e3 = std::array::from_fn(|i| -half(one + a) * x[i] + z[i]);
    let e4 = std::array::from_fn(|i| -half(one + b) * y[i] + t[i] - c * x[i]);
    [e1, e2, e3, e4]
}

/// The compatible complex structure with `JE_1 = E_2`, `JE_3 = E_4`.
pub fn complex_structure_from_frame<S: Scalar>(g: &M<S>, e: &[V<S>; 4]) -> M<S> {
    let je = [e[1], e[0].map(|c| -c), e[3], e[2].map(|c| -c)];
    let eps = [1.0, 1.0, -1.0, -1.0];
    let low: [V<S>; 4] = std::array::from_fn(|i| linalg::lower(g, &e[i]));
    std::array::from_fn(|k| {
        std::array::from_fn(|j| {
            let mut s = S::zero();
            for i in 0..4 {
                s = s + (je[i][k] * low[i][j]).scale(eps[i]);
            }
            s
        })
    })
}

pub fn construct_complex_structure<S: Scalar>(g: &M<S>, x: &V<S>, y: &V<S>) -> M<S> {
    let (z, t) = complete_null_pair(g, x, y);
    complex_structure_from_frame(g, &null_frame(g, x, y, &z, &t))
}

/// `U = X − bY + 2T` with `b = g(T,T)`.
pub fn companion_null_field<S: Scalar>(g: &M<S>, x: &V<S>, y: &V<S>, t: &V<S>) -> V<S> {
    let b = linalg::bilinear(g, t, t);
    std::array::from_fn(|i| x[i] - b * y[i] + t[i].scale(2.0))
}

/// `S = +1` on span{X, U}, `−1` on span{JX, JU}.
pub fn construct_involution_s<S: Scalar>(j: &M<S>, x: &V<S>, u: &V<S>) -> Option<M<S>> {
    let jx = linalg::mat_vec(j, x);
    let ju = linalg::mat_vec(j, u);
    let p = linalg::from_columns(&[*x, *u, jx, ju]);
    let pinv = linalg::inverse(&p)?;
    let d: M<S> = std::array::from_fn(|i| {
        std::array::from_fn(|k| {
            if i != k {
                S::zero()
            } else if i < 2 {
                S::one()
            } else {
                -S::one()
            }
        })
    });
    Some(linalg::mat_mul(&linalg::mat_mul(&p, &d), &pinv))
}

/// Nullity of the homogeneous linear system defining `S`: `g`-skew,
/// anticommuting with `I`, and `SX = 0`.
pub fn involution_nullity(g: &Mat4, i: &Mat4, x: &Vec4) -> usize {
    let mut rows: Vec<[f64; 16]> = Vec::new();
    let idx = |r: usize, c: usize| 4 * r + c;
    // (g S)_ab + (g S)_ba = 0
    for a in 0..4 {
        for b in a..4 {
            let mut row = [0.0; 16];
            for k in 0..4 {
                row[idx(k, b)] += g[a][k];
                row[idx(k, a)] += g[b][k];
            }
            rows.push(row);
        }
    }
    // (S I + I S)_ab = 0
    for a in 0..4 {
        for b in 0..4 {
            let mut row = [0.0; 16];
            for k in 0..4 {
                row[idx(a, k)] += i[k][b];
                row[idx(k, b)] += i[a][k];
            }
            rows.push(row);
        }
    }
    for a in 0..4 {
        let mut row = [0.0; 16];
        for k in 0..4 {
            row[idx(a, k)] = x[k];
        }
        rows.push(row);
    }
    let m = DMatrix::from_fn(rows.len(), 16, |r, c| rows[r][c]);
    let svd = m.svd(false, false);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|s| **s > 1e-9 * smax.max(1.0)).count();
    16 - rank
}

#[cfg(test)]
mod tests {
    use super::*;

    const ETA: Mat4 = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, -1.0]];

    #[test]
    fn flat_completion_and_frame() {
        let x = [1.0, 0.0, 1.0, 0.0];
        let y = [0.0, 1.0, 0.0, 1.0];
        null_pair_precondition(&ETA, &x, &y).unwrap();
        let (z, t) = complete_null_pair(&ETA, &x, &y);
        assert_eq!(z, [0.5, 0.0, -0.5, 0.0]);
        assert_eq!(t, [0.0, 0.5, 0.0, -0.5]);
        let e = null_frame(&ETA, &x, &y, &z, &t);
        assert_eq!(e, [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, -1.0]]);
        let j = complex_structure_from_frame(&ETA, &e);
        assert_eq!(linalg::mat_vec(&j, &[1.0, 0.0, 0.0, 0.0]), [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(linalg::mat_vec(&j, &[0.0, 0.0, 1.0, 0.0]), [0.0, 0.0, 0.0, 1.0]);
        assert_eq!(linalg::mat_vec(&j, &x), y);
        let u = companion_null_field(&ETA, &x, &y, &t);
        let s = construct_involution_s(&j, &x, &u).unwrap();
        let sy = linalg::mat_vec(&s, &y);
        assert!(linalg::vec_max_abs(&linalg::vec_add(&sy, &y)) < 1e-15);
        assert_eq!(involution_nullity(&ETA, &j, &x), 0);
        let trace: f64 = (0..4).map(|i| s[i][i]).sum();
        assert!(trace.abs() < 1e-15);
    }

    #[test]
    fn precondition_names_failure() {
        let err = null_pair_precondition(&ETA, &[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 1.0]).unwrap_err();
        assert_eq!(err, StructureError::Precondition { condition: "X not null", residual: 1.0 });
        let err = null_pair_precondition(&ETA, &[1.0, 0.0, 1.0, 0.0], &[2.0, 0.0, 2.0, 0.0]).unwrap_err();
        assert!(matches!(err, StructureError::Precondition { condition: "X, Y dependent", .. }));
    }
}
