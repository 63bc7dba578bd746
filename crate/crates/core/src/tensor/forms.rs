//! Exterior algebra on a 4-dimensional basis.
//!
//! Wedge products use the determinant convention
//! `(α∧β)(X,Y) = α(X)β(Y) − α(Y)β(X)`. Two-forms are full antisymmetric
//! matrices `ω[i][j] = ω(e_i, e_j)`, three-forms full antisymmetric arrays.
//! A four-form is represented by its value on `(e_0, e_1, e_2, e_3)`.

use crate::exprdsl::FirstOrder;
use crate::geometry::linalg::{self, Mat4, Vec4};
use crate::geometry::Structure;

use super::connection::Tensor3;

pub fn wedge11(a: &Vec4, b: &Vec4) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i] * b[j] - a[j] * b[i]))
}

/// Two-form obtained by lowering the bivector `a∧b` with `g`.
pub fn bivector_form(g: &Mat4, a: &Vec4, b: &Vec4) -> Mat4 {
    wedge11(&linalg::lower(g, a), &linalg::lower(g, b))
}

pub fn wedge12(t: &Vec4, w: &Mat4) -> Tensor3 {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            std::array::from_fn(|c| t[a] * w[b][c] - t[b] * w[a][c] + t[c] * w[a][b])
        })
    })
}

pub fn wedge22(w: &Mat4, v: &Mat4) -> f64 {
    w[0][1] * v[2][3] - w[0][2] * v[1][3] + w[0][3] * v[1][2] + w[1][2] * v[0][3] - w[1][3] * v[0][2]
        + w[2][3] * v[0][1]
}

pub fn wedge4(a: &Vec4, b: &Vec4, c: &Vec4, d: &Vec4) -> f64 {
    linalg::det(&[*a, *b, *c, *d])
}

/// `dα(e_a, e_b) = e_a α_b − e_b α_a − α_k c_ab^k`.
pub fn d1<A: FirstOrder>(alpha: &[A; 4], c: &Structure) -> Mat4 {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut s = alpha[b].d(a) - alpha[a].d(b);
            for k in 0..4 {
                s -= alpha[k].val() * c[a][b][k];
            }
            s
        })
    })
}

/// Exterior derivative of a two-form.
pub fn d2<A: FirstOrder>(w: &[[A; 4]; 4], c: &Structure) -> Tensor3 {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            std::array::from_fn(|cc| {
                let mut s = w[b][cc].d(a) - w[a][cc].d(b) + w[a][b].d(cc);
                for k in 0..4 {
                    s -= c[a][b][k] * w[k][cc].val();
                    s += c[a][cc][k] * w[k][b].val();
                    s -= c[b][cc][k] * w[k][a].val();
                }
                s
            })
        })
    })
}

pub fn form_values<A: FirstOrder>(w: &[[A; 4]; 4]) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| w[i][j].val()))
}

pub fn vec_form_values<A: FirstOrder>(w: &[A; 4]) -> Vec4 {
    std::array::from_fn(|i| w[i].val())
}

pub fn antisymmetry_residual(w: &Mat4) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((w[i][j] + w[j][i]).abs());
        }
    }
    worst
}

fn perm_sign(p: [usize; 4]) -> f64 {
    let mut s = 1.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if p[i] == p[j] {
                return 0.0;
            }
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

/// Hodge star on two-forms, `(⋆ω)_ij = ½ ω^kl ε_klij` with
/// `ε_0123 = orientation·√|det g|`.
pub fn hodge_star_2(g: &Mat4, ginv: &Mat4, orientation: f64, w: &Mat4) -> Mat4 {
    let vol = orientation * linalg::det(g).abs().sqrt();
    let mut up = [[0.0; 4]; 4];
    for k in 0..4 {
        for l in 0..4 {
            let mut s = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    s += ginv[k][a] * ginv[l][b] * w[a][b];
                }
            }
            up[k][l] = s;
        }
    }
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            let mut s = 0.0;
            for k in 0..4 {
                for l in 0..4 {
                    let e = perm_sign([k, l, i, j]);
                    if e != 0.0 {
                        s += up[k][l] * e;
                    }
                }
            }
            out[i][j] = 0.5 * vol * s;
        }
    }
    out
}

/// `⟨ω, η⟩ = ½ ω_ij η^ij`.
pub fn form_inner(ginv: &Mat4, w: &Mat4, v: &Mat4) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    s += 0.5 * w[i][j] * ginv[i][k] * ginv[j][l] * v[k][l];
                }
            }
        }
    }
    s
}

pub fn max_abs3(t: &Tensor3) -> f64 {
    t.iter().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::Jet2;

    const ETA: Mat4 = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, -1.0]];

    fn e(i: usize) -> Vec4 {
        let mut v = [0.0; 4];
        v[i] = 1.0;
        v
    }

    #[test]
    fn star_on_orthonormal_bivectors() {
        let s = |a: usize, b: usize| hodge_star_2(&ETA, &ETA, 1.0, &bivector_form(&ETA, &e(a), &e(b)));
        let f = |a: usize, b: usize| bivector_form(&ETA, &e(a), &e(b));
        assert_eq!(s(0, 1), f(2, 3));
        assert_eq!(s(0, 2), f(1, 3));
        assert_eq!(s(0, 3), linalg::mat_scale(&f(1, 2), -1.0));
    }

    #[test]
    fn wedge_of_symplectic_form() {
        let w = linalg::mat_add(&wedge11(&e(0), &e(1)), &wedge11(&e(2), &e(3)));
        assert_eq!(wedge22(&w, &w), 2.0);
        let a = wedge11(&e(0), &e(1));
        assert_eq!(wedge22(&a, &a), 0.0);
        let t = wedge12(&e(2), &a);
        assert_eq!(t[0][1][2], 1.0);
        assert_eq!(t[2][0][1], 1.0);
        assert_eq!(t[1][0][2], -1.0);
    }

    #[test]
    fn exterior_derivative_of_coordinate_monomials() {
        let p = [0.5, 1.5, -0.5, 2.0];
        let x = Jet2::seed(&p);
        let zero = Jet2::constant(0.0);
        // α = x1 dx0 + x0 x3 dx2
        let alpha = [x[1], zero, x[0] * x[3], zero];
        let c = [[[0.0; 4]; 4]; 4];
        let d = d1(&alpha, &c);
        assert_eq!(d[0][1], -1.0);
        assert_eq!(d[0][2], p[3]);
        assert_eq!(d[3][2], p[0]);
        // ω = f dx0∧dx1 with f = x2 x3
        let f = x[2] * x[3];
        let mut w = [[zero; 4]; 4];
        w[0][1] = f;
        w[1][0] = -f;
        let dw = d2(&w, &c);
        assert_eq!(dw[0][1][2], p[3]);
        assert_eq!(dw[0][1][3], p[2]);
        assert_eq!(dw[2][0][1], p[3]);
        assert_eq!(dw[1][0][2], -p[3]);
    }
}
