//! Isotropic 2-planes and their Hodge type.

use serde::Serialize;

use crate::geometry::linalg::{self, Mat4, Vec4};
use crate::tensor::forms::{bivector_form, hodge_star_2};

use super::construct::independence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneClass {
    /// Self-dual bivector.
    Alpha,
    /// Anti-self-dual bivector.
    Beta,
    NotIsotropic,
    Degenerate,
}

const TOL: f64 = 1e-9;

/// Classifies `span{a, b}` at a point with metric `g` (inverse `ginv`) for
/// the given orientation sign.
pub fn classify_plane(g: &Mat4, ginv: &Mat4, orientation: f64, a: &Vec4, b: &Vec4) -> PlaneClass {
    if independence(a, b) <= 1e-10 {
        return PlaneClass::Degenerate;
    }
    let na = linalg::euclid(a);
    let nb = linalg::euclid(b);
    let scale = linalg::max_abs(g).max(1e-300);
    let rel = |v: f64, n: f64| v.abs() / (scale * n);
    if rel(linalg::bilinear(g, a, a), na * na) > TOL
        || rel(linalg::bilinear(g, b, b), nb * nb) > TOL
        || rel(linalg::bilinear(g, a, b), na * nb) > TOL
    {
        return PlaneClass::NotIsotropic;
    }
    let w = bivector_form(g, a, b);
    let n = linalg::max_abs(&w);
    let w = linalg::mat_scale(&w, 1.0 / n);
    let s = hodge_star_2(g, ginv, orientation, &w);
    if linalg::max_abs(&linalg::mat_sub(&s, &w)) < TOL {
        PlaneClass::Alpha
    } else if linalg::max_abs(&linalg::mat_add(&s, &w)) < TOL {
        PlaneClass::Beta
    } else {
        PlaneClass::NotIsotropic
    }
}

/// `(|⋆w − w|, |⋆w + w|)` for the normalized bivector `w` of `a∧b`.
pub fn duality_residuals(g: &Mat4, ginv: &Mat4, orientation: f64, a: &Vec4, b: &Vec4) -> (f64, f64) {
    let w = bivector_form(g, a, b);
    let n = linalg::max_abs(&w).max(1e-300);
    let w = linalg::mat_scale(&w, 1.0 / n);
    let s = hodge_star_2(g, ginv, orientation, &w);
    (linalg::max_abs(&linalg::mat_sub(&s, &w)), linalg::max_abs(&linalg::mat_add(&s, &w)))
}

/// Distance between the planes spanned by two pairs: the normalized
/// bivectors compared up to sign.
pub fn plane_distance(a: (&Vec4, &Vec4), b: (&Vec4, &Vec4)) -> f64 {
    let unit = |x: &Vec4, y: &Vec4| {
        let w = crate::tensor::forms::wedge11(x, y);
        let n = w.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        linalg::mat_scale(&w, 1.0 / n)
    };
    let p = unit(a.0, a.1);
    let q = unit(b.0, b.1);
    linalg::max_abs(&linalg::mat_sub(&p, &q)).min(linalg::max_abs(&linalg::mat_add(&p, &q)))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ETA: Mat4 = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, -1.0]];

    #[test]
    fn flat_planes() {
        let x = [1.0, 0.0, 1.0, 0.0];
        let jx = [0.0, 1.0, 0.0, 1.0];
        assert_eq!(classify_plane(&ETA, &ETA, 1.0, &x, &jx), PlaneClass::Alpha);
        assert_eq!(classify_plane(&ETA, &ETA, -1.0, &x, &jx), PlaneClass::Beta);
        let ju = [0.0, 1.0, 0.0, -1.0];
        assert_eq!(classify_plane(&ETA, &ETA, 1.0, &x, &ju), PlaneClass::Beta);
        assert_eq!(classify_plane(&ETA, &ETA, 1.0, &[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]), PlaneClass::NotIsotropic);
        assert_eq!(classify_plane(&ETA, &ETA, 1.0, &x, &x), PlaneClass::Degenerate);
    }

    #[test]
    fn classification_ignores_basis_of_plane() {
        let x = [1.0, 0.0, 1.0, 0.0];
        let jx = [0.0, 1.0, 0.0, 1.0];
        let a = linalg::vec_add(&linalg::vec_scale(&x, 2.0), &linalg::vec_scale(&jx, -3.0));
        let b = linalg::vec_add(&linalg::vec_scale(&x, 0.5), &jx);
        assert_eq!(classify_plane(&ETA, &ETA, 1.0, &a, &b), PlaneClass::Alpha);
        assert_eq!(classify_plane(&ETA, &ETA, 1.0, &b, &a), PlaneClass::Alpha);
        assert!(plane_distance((&x, &jx), (&a, &b)) < 1e-15);
    }
}
