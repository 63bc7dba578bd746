//! Fixed-size 4×4 linear algebra, generic over [`Scalar`] so the same code
//! runs on reals and on jets.

use crate::exprdsl::Scalar;

pub type Vec4 = [f64; 4];
pub type Mat4 = [[f64; 4]; 4];

pub fn identity<S: Scalar>() -> [[S; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { S::one() } else { S::zero() }))
}

pub fn zeros<S: Scalar>() -> [[S; 4]; 4] {
    std::array::from_fn(|_| std::array::from_fn(|_| S::zero()))
}

pub fn mat_mul<S: Scalar>(a: &[[S; 4]; 4], b: &[[S; 4]; 4]) -> [[S; 4]; 4] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut s = a[i][0] * b[0][j];
            for k in 1..4 {
                s = s + a[i][k] * b[k][j];
            }
            s
        })
    })
}

pub fn mat_vec<S: Scalar>(a: &[[S; 4]; 4], v: &[S; 4]) -> [S; 4] {
    std::array::from_fn(|i| {
        let mut s = a[i][0] * v[0];
        for k in 1..4 {
            s = s + a[i][k] * v[k];
        }
        s
    })
}

pub fn transpose<S: Scalar>(a: &[[S; 4]; 4]) -> [[S; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i]))
}

pub fn mat_add<S: Scalar>(a: &[[S; 4]; 4], b: &[[S; 4]; 4]) -> [[S; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] + b[i][j]))
}

pub fn mat_sub<S: Scalar>(a: &[[S; 4]; 4], b: &[[S; 4]; 4]) -> [[S; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] - b[i][j]))
}

pub fn mat_scale<S: Scalar>(a: &[[S; 4]; 4], k: f64) -> [[S; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j].scale(k)))
}

pub fn vec_add<S: Scalar>(a: &[S; 4], b: &[S; 4]) -> [S; 4] {
    std::array::from_fn(|i| a[i] + b[i])
}

pub fn vec_sub<S: Scalar>(a: &[S; 4], b: &[S; 4]) -> [S; 4] {
    std::array::from_fn(|i| a[i] - b[i])
}

pub fn vec_scale<S: Scalar>(a: &[S; 4], k: S) -> [S; 4] {
    std::array::from_fn(|i| a[i] * k)
}

/// `g(a, b)` for a bilinear form given by its matrix.
pub fn bilinear<S: Scalar>(g: &[[S; 4]; 4], a: &[S; 4], b: &[S; 4]) -> S {
    let mut s = S::zero();
    for i in 0..4 {
        for j in 0..4 {
            s = s + g[i][j] * a[i] * b[j];
        }
    }
    s
}

/// Index-lowered vector `g(a, ·)`.
pub fn lower<S: Scalar>(g: &[[S; 4]; 4], a: &[S; 4]) -> [S; 4] {
    std::array::from_fn(|j| {
        let mut s = S::zero();
        for i in 0..4 {
            s = s + a[i] * g[i][j];
        }
        s
    })
}

/// Matrix whose columns are the given vectors.
pub fn from_columns<S: Scalar>(cols: &[[S; 4]; 4]) -> [[S; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| cols[j][i]))
}

pub fn column<S: Scalar>(a: &[[S; 4]; 4], j: usize) -> [S; 4] {
    std::array::from_fn(|i| a[i][j])
}

/// Gauss–Jordan inverse with partial pivoting on the value part.
pub fn inverse<S: Scalar>(a: &[[S; 4]; 4]) -> Option<[[S; 4]; 4]> {
    let mut m = *a;
    let mut inv = identity::<S>();
    for col in 0..4 {
        let mut piv = col;
        for r in (col + 1)..4 {
            if m[r][col].value().abs() > m[piv][col].value().abs() {
                piv = r;
            }
        }
        if m[piv][col].value() == 0.0 || !m[piv][col].value().is_finite() {
            return None;
        }
        m.swap(col, piv);
        inv.swap(col, piv);
        let d = m[col][col].recip();
        for j in 0..4 {
            m[col][j] = m[col][j] * d;
            inv[col][j] = inv[col][j] * d;
        }
        for r in 0..4 {
            if r == col {
                continue;
            }
            let f = m[r][col];
            for j in 0..4 {
                m[r][j] = m[r][j] - f * m[col][j];
                inv[r][j] = inv[r][j] - f * inv[col][j];
            }
        }
    }
    Some(inv)
}

/// Determinant by LU with partial pivoting.
pub fn det<S: Scalar>(a: &[[S; 4]; 4]) -> S {
    let mut m = *a;
    let mut d = S::one();
    for col in 0..4 {
        let mut piv = col;
        for r in (col + 1)..4 {
            if m[r][col].value().abs() > m[piv][col].value().abs() {
                piv = r;
            }
        }
        if m[piv][col].value() == 0.0 {
            return S::zero();
        }
        if piv != col {
            m.swap(col, piv);
            d = -d;
        }
        d = d * m[col][col];
        let inv = m[col][col].recip();
        for r in (col + 1)..4 {
            let f = m[r][col] * inv;
            for j in col..4 {
                m[r][j] = m[r][j] - f * m[col][j];
            }
        }
    }
    d
}

pub fn values<S: Scalar>(a: &[[S; 4]; 4]) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j].value()))
}

pub fn vec_values<S: Scalar>(a: &[S; 4]) -> Vec4 {
    std::array::from_fn(|i| a[i].value())
}

pub fn max_abs(a: &Mat4) -> f64 {
    a.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn vec_max_abs(a: &Vec4) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn norm_inf(a: &Mat4) -> f64 {
    a.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn euclid(a: &Vec4) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn lift(a: &Mat4) -> [[crate::exprdsl::Jet2; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| crate::exprdsl::Jet2::constant(a[i][j])))
}

pub fn lift_vec(a: &Vec4) -> [crate::exprdsl::Jet2; 4] {
    std::array::from_fn(|i| crate::exprdsl::Jet2::constant(a[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::Jet2;

    fn sample() -> Mat4 {
        [[2.0, 1.0, 0.5, 0.0], [1.0, 0.0, 3.0, -1.0], [0.5, 3.0, -1.0, 2.0], [0.0, -1.0, 2.0, 0.7]]
    }

    #[test]
    fn inverse_round_trip() {
        let a = sample();
        let inv = inverse(&a).unwrap();
        let prod = mat_mul(&a, &inv);
        let id = identity::<f64>();
        assert!(max_abs(&mat_sub(&prod, &id)) < 1e-14);
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let mut a = sample();
        a[3] = a[0];
        assert!(inverse(&a).is_none() || det(&a).abs() < 1e-14);
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let a = sample();
        let minor = |r: usize, c: usize| -> f64 {
            let rows: Vec<usize> = (0..4).filter(|&i| i != r).collect();
            let cols: Vec<usize> = (0..4).filter(|&j| j != c).collect();
            let m = |i: usize, j: usize| a[rows[i]][cols[j]];
            m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
        };
        let expected: f64 =
            (0..4).map(|c| if c % 2 == 0 { 1.0 } else { -1.0 } * a[0][c] * minor(0, c)).sum();
        assert!((det(&a) - expected).abs() < 1e-12);
    }

    #[test]
    fn jet_inverse_differentiates_correctly() {
        let p = [0.3, 0.2, 0.1, 1.5];
        let x = Jet2::seed(&p);
        let a: [[Jet2; 4]; 4] = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let base = Jet2::constant(sample()[i][j]);
                if i == j {
                    base + x[i] * x[3]
                } else {
                    base
                }
            })
        });
        let inv = inverse(&a).unwrap();
        let prod = mat_mul(&a, &inv);
        for i in 0..4 {
            for j in 0..4 {
                let e = prod[i][j];
                assert!((e.value - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
                assert!(e.grad.iter().all(|g| g.abs() < 1e-12));
                assert!(e.hess.iter().all(|h| h.abs() < 1e-11));
            }
        }
    }
}
