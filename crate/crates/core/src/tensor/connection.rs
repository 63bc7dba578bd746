//! Levi-Civita connection and curvature in a basis with structure constants.
//!
//! Conventions: `∇_{e_a} e_b = Γ^c_ab e_c`,
//! `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`,
//! `R(e_c,e_d)e_b = R^a_bcd e_a`, `R_abcd = g_ae R^e_bcd`,
//! `Ric_bd = R^a_bad` (positive on round spheres), `s = g^bd Ric_bd`.

use crate::exprdsl::{FirstOrder, Jet1, Jet2, Scalar};
use crate::geometry::linalg::{self, Mat4, Vec4};
use crate::geometry::{Local, Structure};

use super::{TensorError, TensorResult};

pub type Tensor3 = [[[f64; 4]; 4]; 4];
pub type Tensor4 = [[[[f64; 4]; 4]; 4]; 4];

/// `gamma[c][a][b] = Γ^c_ab`.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    pub gamma: Tensor3,
}

/// Christoffel symbols as first-order jets (needed for curvature).
#[derive(Clone, Debug)]
pub struct ConnectionJet {
    pub gamma: [[[Jet1; 4]; 4]; 4],
    pub ginv: [[Jet1; 4]; 4],
    pub g: [[Jet2; 4]; 4],
    pub c: Structure,
}

impl ConnectionJet {
    pub fn new(local: &Local) -> TensorResult<Self> {
        let g1: [[Jet1; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| local.g[i][j].lower()));
        let ginv = linalg::inverse(&g1).ok_or(TensorError::SingularMetric { point: local.point })?;
        let c = &local.c;
        let g = &local.g;
        // Koszul: 2 g(∇_a e_b, e_d)
        let mut low = [[[Jet1::default(); 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for d in 0..4 {
                    let mut s = g[b][d].deriv(a) + g[a][d].deriv(b) - g[a][b].deriv(d);
                    for k in 0..4 {
                        if c[a][b][k] != 0.0 {
                            s = s + g1[k][d].scale(c[a][b][k]);
                        }
                        if c[b][d][k] != 0.0 {
                            s = s - g1[k][a].scale(c[b][d][k]);
                        }
                        if c[d][a][k] != 0.0 {
                            s = s + g1[k][b].scale(c[d][a][k]);
                        }
                    }
                    low[a][b][d] = s.scale(0.5);
                }
            }
        }
        let mut gamma = [[[Jet1::default(); 4]; 4]; 4];
        for cc in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    let mut s = Jet1::default();
                    for d in 0..4 {
                        s = s + ginv[cc][d] * low[a][b][d];
                    }
                    gamma[cc][a][b] = s;
                }
            }
        }
        Ok(ConnectionJet { gamma, ginv, g: local.g, c: local.c })
    }

    pub fn christoffel(&self) -> Christoffel {
        Christoffel {
            gamma: std::array::from_fn(|c| {
                std::array::from_fn(|a| std::array::from_fn(|b| self.gamma[c][a][b].value))
            }),
        }
    }

    pub fn metric(&self) -> Mat4 {
        linalg::values(&self.g)
    }

    pub fn inverse_metric(&self) -> Mat4 {
        std::array::from_fn(|i| std::array::from_fn(|j| self.ginv[i][j].value))
    }

    /// `nabla[a][k] = (∇_{e_a} X)^k`.
    pub fn covariant_derivative<A: FirstOrder>(&self, x: &[A; 4]) -> Mat4 {
        std::array::from_fn(|a| {
            std::array::from_fn(|k| {
                let mut s = x[k].d(a);
                for b in 0..4 {
                    s += self.gamma[k][a][b].value * x[b].val();
                }
                s
            })
        })
    }

    /// Covariant derivative as first-order jets, for second-derivative use.
    pub fn covariant_derivative_jet(&self, x: &[Jet2; 4]) -> [[Jet1; 4]; 4] {
        std::array::from_fn(|a| {
            std::array::from_fn(|k| {
                let mut s = x[k].deriv(a);
                for b in 0..4 {
                    s = s + self.gamma[k][a][b] * x[b].lower();
                }
                s
            })
        })
    }

    pub fn divergence<A: FirstOrder>(&self, x: &[A; 4]) -> f64 {
        let n = self.covariant_derivative(x);
        (0..4).map(|a| n[a][a]).sum()
    }

    /// `(∇_a Ω)_bc` as first-order jets.
    pub fn covariant_two_form_jet(&self, w: &[[Jet2; 4]; 4]) -> [[[Jet1; 4]; 4]; 4] {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                std::array::from_fn(|c| {
                    let mut s = w[b][c].deriv(a);
                    for k in 0..4 {
                        s = s - self.gamma[k][a][b] * w[k][c].lower() - self.gamma[k][a][c] * w[b][k].lower();
                    }
                    s
                })
            })
        })
    }

    /// `(δΩ)_c = −g^ab (∇_a Ω)_bc` with first derivatives.
    pub fn codifferential_jet(&self, w: &[[Jet2; 4]; 4]) -> [Jet1; 4] {
        let nw = self.covariant_two_form_jet(w);
        std::array::from_fn(|c| {
            let mut s = Jet1::default();
            for a in 0..4 {
                for b in 0..4 {
                    s = s - self.ginv[a][b] * nw[a][b][c];
                }
            }
            s
        })
    }

    /// Codifferential through an orthonormal frame:
    /// `δΩ(X) = −Σ ε_i (∇_{E_i}Ω)(E_i, X)`.
    pub fn codifferential_in_frame(&self, w: &[[Jet2; 4]; 4], frame: &[Vec4; 4], eps: &[f64; 4]) -> Vec4 {
        let nw = self.covariant_two_form_jet(w);
        std::array::from_fn(|c| {
            let mut s = 0.0;
            for (e, sign) in frame.iter().zip(eps) {
                for a in 0..4 {
                    for b in 0..4 {
                        s -= sign * e[a] * e[b] * nw[a][b][c].value;
                    }
                }
            }
            s
        })
    }

    pub fn divergence_in_frame<A: FirstOrder>(&self, x: &[A; 4], frame: &[Vec4; 4], eps: &[f64; 4]) -> f64 {
        let n = self.covariant_derivative(x);
        let g = self.metric();
        let mut s = 0.0;
        for (e, sign) in frame.iter().zip(eps) {
            let mut nab = [0.0; 4];
            for a in 0..4 {
                for k in 0..4 {
                    nab[k] += e[a] * n[a][k];
                }
            }
            s += sign * linalg::bilinear(&g, &nab, e);
        }
        s
    }

    /// Lowered Riemann tensor `R_abcd`.
    pub fn riemann(&self) -> Tensor4 {
        let c = &self.c;
        let gm = |a: usize, b: usize, k: usize| self.gamma[a][b][k].value;
        let mut up = [[[[0.0; 4]; 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for cc in 0..4 {
                    for d in 0..4 {
                        let mut s = self.gamma[a][d][b].grad[cc] - self.gamma[a][cc][b].grad[d];
                        for e in 0..4 {
                            s += gm(a, cc, e) * gm(e, d, b) - gm(a, d, e) * gm(e, cc, b);
                            s -= c[cc][d][e] * gm(a, e, b);
                        }
                        up[a][b][cc][d] = s;
                    }
                }
            }
        }
        let g = self.metric();
        let mut low = [[[[0.0; 4]; 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for cc in 0..4 {
                    for d in 0..4 {
                        low[a][b][cc][d] = (0..4).map(|e| g[a][e] * up[e][b][cc][d]).sum();
                    }
                }
            }
        }
        low
    }
}

/// Riemann, Ricci, scalar and Weyl tensors at a point.
#[derive(Clone, Debug)]
pub struct CurvatureAtPoint {
    pub riemann: Tensor4,
    pub ricci: Mat4,
    pub scalar: f64,
    pub weyl: Tensor4,
}

impl CurvatureAtPoint {
    pub fn from_connection(conn: &ConnectionJet) -> Self {
        let riemann = conn.riemann();
        let g = conn.metric();
        let ginv = conn.inverse_metric();
        let mut ricci = [[0.0; 4]; 4];
        for b in 0..4 {
            for d in 0..4 {
                let mut s = 0.0;
                for a in 0..4 {
                    for e in 0..4 {
                        s += ginv[a][e] * riemann[e][b][a][d];
                    }
                }
                ricci[b][d] = s;
            }
        }
        let scalar: f64 = (0..4).flat_map(|b| (0..4).map(move |d| (b, d))).map(|(b, d)| ginv[b][d] * ricci[b][d]).sum();
        let weyl = weyl_tensor(&riemann, &ricci, scalar, &g);
        CurvatureAtPoint { riemann, ricci, scalar, weyl }
    }

    /// Largest defect of the pair symmetries and first Bianchi identity,
    /// relative to the largest component.
    pub fn symmetry_residual(&self) -> f64 {
        let r = &self.riemann;
        let scale = r.iter().flatten().flatten().flatten().fold(1.0_f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0_f64;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let v = r[a][b][c][d];
                        worst = worst
                            .max((v + r[b][a][c][d]).abs())
                            .max((v + r[a][b][d][c]).abs())
                            .max((v - r[c][d][a][b]).abs())
                            .max((v + r[a][c][d][b] + r[a][d][b][c]).abs());
                    }
                }
            }
        }
        worst / scale
    }

    /// Largest trace of the Weyl tensor over any index pair.
    pub fn weyl_trace_residual(&self, ginv: &Mat4) -> f64 {
        let w = &self.weyl;
        let mut worst = 0.0_f64;
        for b in 0..4 {
            for d in 0..4 {
                let mut s = 0.0;
                for a in 0..4 {
                    for c in 0..4 {
                        s += ginv[a][c] * w[a][b][c][d];
                    }
                }
                worst = worst.max(s.abs());
            }
        }
        worst
    }
}

pub fn weyl_tensor(r: &Tensor4, ric: &Mat4, s: f64, g: &Mat4) -> Tensor4 {
    let mut w = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let kn = g[a][c] * ric[b][d] - g[a][d] * ric[b][c] + g[b][d] * ric[a][c] - g[b][c] * ric[a][d];
                    let gg = g[a][c] * g[b][d] - g[a][d] * g[b][c];
                    w[a][b][c][d] = r[a][b][c][d] - 0.5 * kn + s / 6.0 * gg;
                }
            }
        }
    }
    w
}

pub fn max_abs4(t: &Tensor4) -> f64 {
    t.iter().flatten().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn max_abs3(t: &Tensor3) -> f64 {
    t.iter().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

/// Metric compatibility defect `∂_k g_ij − Γ^l_ki g_lj − Γ^l_kj g_il` (plus
/// bracket terms in a frame).
pub fn compatibility_residual(conn: &ConnectionJet) -> f64 {
    let g = conn.metric();
    let mut worst = 0.0_f64;
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                let mut s = conn.g[i][j].grad[k];
                for l in 0..4 {
                    s -= conn.gamma[l][k][i].value * g[l][j] + conn.gamma[l][k][j].value * g[i][l];
                }
                worst = worst.max(s.abs());
            }
        }
    }
    worst
}

/// Torsion defect `Γ^k_ij − Γ^k_ji − c_ij^k`.
pub fn torsion_residual(conn: &ConnectionJet) -> f64 {
    let mut worst = 0.0_f64;
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                let t = conn.gamma[k][i][j].value - conn.gamma[k][j][i].value - conn.c[i][j][k];
                worst = worst.max(t.abs());
            }
        }
    }
    worst
}
