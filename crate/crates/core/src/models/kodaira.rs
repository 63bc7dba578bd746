//! Primary Kodaira surface: lattice maps and the invariance solve for γ.

use crate::exprdsl::{Expr, GeometryDocument, Params};
use crate::geometry::linalg::{self, Mat4};
use crate::geometry::{DiffeoMap, GeometrySpec};

use super::{ModelError, ModelResult};

fn coord(i: usize) -> Expr {
    Expr::Coord(i)
}

/// `(z, w) ↦ (z + a, w + ā z + b)` in real coordinates.
pub fn lattice_map(name: &str, a: (f64, f64), b: (f64, f64)) -> DiffeoMap {
    let k = Expr::cst;
    let lin = |base: usize, c1: f64, i1: usize, c2: f64, i2: usize, off: f64| {
        Expr::add(
            Expr::add(Expr::add(coord(base), Expr::mul(k(c1), coord(i1))), Expr::mul(k(c2), coord(i2))),
            k(off),
        )
    };
    DiffeoMap {
        name: name.to_string(),
        components: [
            Expr::add(coord(0), k(a.0)),
            Expr::add(coord(1), k(a.1)),
            lin(2, a.0, 0, a.1, 1, b.0),
            lin(3, a.0, 1, -a.1, 0, b.1),
        ],
    }
}

/// Generators with `a ∈ {2π, i}` and the pure `w`-translations.
pub fn generators() -> [DiffeoMap; 4] {
    let tau = 2.0 * std::f64::consts::PI;
    [
        lattice_map("phi_2pi", (tau, 0.0), (0.0, 0.0)),
        lattice_map("phi_i", (0.0, 1.0), (0.0, 0.0)),
        lattice_map("phi_b1", (0.0, 0.0), (1.0, 0.0)),
        lattice_map("phi_bi", (0.0, 0.0), (0.0, 1.0)),
    ]
}

fn residuals(geom: &GeometrySpec, points: &[[f64; 4]]) -> ModelResult<Vec<f64>> {
    let mut out = Vec::new();
    for phi in generators() {
        for p in points {
            let d: Mat4 = linalg::mat_sub(&geom.pullback_metric(&phi, p)?, &geom.metric_at(p)?);
            out.extend(d.iter().flatten());
        }
    }
    Ok(out)
}

/// Solves `φ*g = g` for `γ = gr + i gi`: the residual is affine in γ, so
/// three evaluations and a least-squares fit determine it.
pub fn solve_gamma(doc: &GeometryDocument) -> ModelResult<(f64, f64)> {
    let points = [[0.3, -0.4, 0.2, 1.1], [0.5, 0.2, -2.0, 0.5], [-0.4, 0.45, 0.9, -0.3]];
    let with = |gr: f64, gi: f64| -> ModelResult<Vec<f64>> {
        let mut p = Params::new();
        p.insert("gr".into(), gr);
        p.insert("gi".into(), gi);
        residuals(&GeometrySpec::from_document(doc, &p)?, &points)
    };
    let r0 = with(0.0, 0.0)?;
    let r1 = with(1.0, 0.0)?;
    let r2 = with(0.0, 1.0)?;
    let c1: Vec<f64> = r1.iter().zip(&r0).map(|(a, b)| a - b).collect();
    let c2: Vec<f64> = r2.iter().zip(&r0).map(|(a, b)| a - b).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let (a11, a12, a22) = (dot(&c1, &c1), dot(&c1, &c2), dot(&c2, &c2));
    let (b1, b2) = (-dot(&c1, &r0), -dot(&c2, &r0));
    let det = a11 * a22 - a12 * a12;
    if det.abs() < 1e-12 {
        return Err(ModelError::Solve("γ does not affect the invariance residual".into()));
    }
    let gamma = ((b1 * a22 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det);
    let check = with(gamma.0, gamma.1)?;
    let worst = check.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if worst > 1e-9 {
        return Err(ModelError::Solve(format!("no invariant γ: residual {worst:e} at best fit {gamma:?}")));
    }
    Ok(gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::parse_geometry;

    #[test]
    fn gamma_is_one() {
        let doc = parse_geometry(super::super::KODAIRA_SRC).unwrap();
        let (gr, gi) = solve_gamma(&doc).unwrap();
        assert!((gr - 1.0).abs() < 1e-12, "{gr}");
        assert!(gi.abs() < 1e-12, "{gi}");
    }
}
