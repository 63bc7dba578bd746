//! Orthonormal frames in split signature.

use rand::Rng;

use crate::geometry::linalg::{self, Mat4, Vec4};
use crate::geometry::sample;

use super::{TensorError, TensorResult};

#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalFrame {
    pub vectors: [Vec4; 4],
    /// `g(E_i, E_i)`, always `(+1, +1, −1, −1)`.
    pub eps: [f64; 4],
    /// Sign of `det(E_1, …, E_4)` relative to the basis order.
    pub orientation: f64,
}

impl OrthonormalFrame {
    /// Same frame with the last vector negated when needed so that it has
    /// the requested orientation.
    pub fn oriented(mut self, orientation: f64) -> Self {
        if self.orientation * orientation < 0.0 {
            self.vectors[3] = self.vectors[3].map(|c| -c);
            self.orientation = -self.orientation;
        }
        self
    }

    pub fn gram_residual(&self, g: &Mat4) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { self.eps[i] } else { 0.0 };
                worst = worst.max((linalg::bilinear(g, &self.vectors[i], &self.vectors[j]) - want).abs());
            }
        }
        worst
    }
}

const DEGENERATE: f64 = 1e-10;

fn gram_schmidt(g: &Mat4, seeds: &[Vec4; 4]) -> Option<OrthonormalFrame> {
    let mut chosen: Vec<(Vec4, f64)> = Vec::with_capacity(4);
    let mut remaining: Vec<Vec4> = seeds.to_vec();
    while chosen.len() < 4 {
        let projected: Vec<Vec4> = remaining
            .iter()
            .map(|v| {
                let mut w = *v;
                for (e, s) in &chosen {
                    let k = s * linalg::bilinear(g, v, e);
                    for i in 0..4 {
                        w[i] -= k * e[i];
                    }
                }
                w
            })
            .collect();
        let mut best = 0;
        let mut best_norm = -1.0;
        for (i, w) in projected.iter().enumerate() {
            let n = linalg::bilinear(g, w, w).abs();
            if n > best_norm {
                best = i;
                best_norm = n;
            }
        }
        if best_norm < DEGENERATE {
            return None;
        }
        let w = projected[best];
        let nn = linalg::bilinear(g, &w, &w);
        let scale = 1.0 / nn.abs().sqrt();
        chosen.push((w.map(|c| c * scale), nn.signum()));
        remaining.remove(best);
    }
    let pos: Vec<Vec4> = chosen.iter().filter(|(_, s)| *s > 0.0).map(|(v, _)| *v).collect();
    let neg: Vec<Vec4> = chosen.iter().filter(|(_, s)| *s < 0.0).map(|(v, _)| *v).collect();
    if pos.len() != 2 || neg.len() != 2 {
        return None;
    }
    let vectors = [pos[0], pos[1], neg[0], neg[1]];
    let orientation = linalg::det(&vectors).signum();
    Some(OrthonormalFrame { vectors, eps: [1.0, 1.0, -1.0, -1.0], orientation })
}

/// Split-signature Gram–Schmidt. Candidates are the seeds (chart basis by
/// default); each step takes the remaining candidate of largest `|g(v,v)|`
/// after projection, lowest index on ties. Degenerate candidates are retried
/// three times with seeded jitter of relative size `1e-6`.
pub fn build_orthonormal_frame(g: &Mat4, seeds: Option<&[Vec4; 4]>) -> TensorResult<OrthonormalFrame> {
    let (pos, neg, zero) = crate::geometry::signature_of(g, 1e-10);
    if (pos, neg, zero) != (2, 2, 0) {
        return Err(TensorError::Signature { pos, neg });
    }
    let base: [Vec4; 4] = match seeds {
        Some(s) => *s,
        None => std::array::from_fn(|i| std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 })),
    };
    if let Some(f) = gram_schmidt(g, &base) {
        return Ok(f);
    }
    let scale = base.iter().map(linalg::vec_max_abs).fold(1.0, f64::max);
    for attempt in 0..3u64 {
        let mut r = sample::rng(0x5eed + attempt);
        let jittered: [Vec4; 4] = std::array::from_fn(|i| {
            std::array::from_fn(|j| base[i][j] + scale * 1e-6 * (2.0 * r.gen::<f64>() - 1.0))
        });
        if let Some(f) = gram_schmidt(g, &jittered) {
            return Ok(f);
        }
    }
    Err(TensorError::DegenerateFrame { attempts: 4 })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ETA: Mat4 = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, -1.0]];

    #[test]
    fn chart_basis_on_flat_metric() {
        let f = build_orthonormal_frame(&ETA, None).unwrap();
        assert_eq!(f.vectors, linalg::identity::<f64>());
        assert_eq!(f.orientation, 1.0);
    }

    #[test]
    fn null_seeds_fall_back_to_jitter() {
        let seeds = [[1.0, 0.0, 1.0, 0.0]; 4];
        match build_orthonormal_frame(&ETA, Some(&seeds)) {
            Err(TensorError::DegenerateFrame { .. }) => {}
            other => panic!("expected degenerate frame, got {other:?}"),
        }
    }

    #[test]
    fn off_diagonal_metric_frame() {
        let g = [[3.0, 0.0, 1.0, 0.0], [0.0, 3.0, 0.0, 1.0], [1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]];
        let f = build_orthonormal_frame(&g, None).unwrap();
        assert!(f.gram_residual(&g) < 1e-12);
        let o = f.clone().oriented(-f.orientation);
        assert_eq!(o.orientation, -f.orientation);
        assert!(o.gram_residual(&g) < 1e-12);
    }

    #[test]
    fn definite_metric_rejected() {
        assert!(matches!(
            build_orthonormal_frame(&linalg::identity(), None),
            Err(TensorError::Signature { pos: 4, neg: 0 })
        ));
    }
}
