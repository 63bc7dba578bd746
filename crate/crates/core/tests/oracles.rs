//! Frozen values for the shipped models, computed by hand from the frame
//! brackets and metrics.

use neutral4::exprdsl::{Backend, Params};
use neutral4::geometry::linalg::{self, Mat4, Vec4};
use neutral4::geometry::{sample, VectorField};
use neutral4::models::builtin;
use neutral4::tensor::{self, forms};

fn e(k: usize) -> Vec4 {
    std::array::from_fn(|i| if i == k { 1.0 } else { 0.0 })
}

fn points(domain: &[(f64, f64); 4]) -> Vec<Vec4> {
    sample::sample_points(domain, 10, 3)
}

#[test]
fn sl2r_coframe_differentials() {
    let b = builtin("sl2r_r", &Params::new()).unwrap();
    let g = &b.geometry;
    let w = |i: usize, j: usize| forms::wedge11(&e(i), &e(j));
    let expected: [(&str, Mat4); 4] = [
        ("theta", [[0.0; 4]; 4]),
        ("alpha", w(2, 3)),
        ("beta", w(1, 3)),
        ("gamma", linalg::mat_scale(&w(1, 2), -1.0)),
    ];
    for p in points(&g.domain) {
        for (name, want) in &expected {
            let d = tensor::exterior_derivative_1(g, g.form(name).unwrap(), &p).unwrap();
            assert!(linalg::max_abs(&linalg::mat_sub(&d, want)) < 1e-12, "d{name} = {d:?}");
        }
    }
}

#[test]
fn sl2r_scalar_curvature_is_three_halves() {
    let b = builtin("sl2r_r", &Params::new()).unwrap();
    for p in points(&b.geometry.domain) {
        let s = tensor::riemann_at(&b.geometry, &p).unwrap().scalar;
        assert!((s - 1.5).abs() < 1e-12, "{s}");
    }
}

#[test]
fn hopf_frame_geodesics_and_brackets() {
    let b = builtin("hopf", &Params::new()).unwrap();
    let g = &b.geometry;
    let p = points(&g.domain)[0];
    let gamma = tensor::christoffel_at(g, &p).unwrap().gamma;
    for a in 0..4 {
        for c in 0..4 {
            assert!(gamma[c][a][a].abs() < 1e-14, "nabla_X{a} X{a} has X{c} component {}", gamma[c][a][a]);
        }
    }
    let f = |k: usize| VectorField::constant(&format!("X{}", k + 1), Backend::Frame, e(k));
    for (i, j, k) in [(1, 2, 3), (2, 3, 1), (3, 1, 2)] {
        let br = g.lie_bracket(&f(i), &f(j)).unwrap();
        assert_eq!(g.vector_at(&br, &p).unwrap(), e(k));
    }
    assert_eq!(g.metric_at(&p).unwrap(), [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, -1.0]]);
}

#[test]
fn hopf_complex_structure_pairs_the_frame() {
    let b = builtin("hopf", &Params::new()).unwrap();
    let g = &b.geometry;
    for p in points(&g.domain) {
        let at = b.triple().at(g, &p).unwrap();
        let j = linalg::values(&at.endo[0]);
        for (from, to) in [(0, 1), (2, 3)] {
            let d = linalg::vec_sub(&linalg::mat_vec(&j, &e(from)), &e(to));
            assert!(linalg::vec_max_abs(&d) < 1e-10, "J X{} = {:?}", from + 1, linalg::mat_vec(&j, &e(from)));
        }
    }
}

#[test]
fn inoue_real_coframe_differentials() {
    let b = builtin("inoue_s_plus", &Params::new()).unwrap();
    let g = &b.geometry;
    let a: Vec<_> = ["a1", "a2", "a3", "a4"].iter().map(|n| g.form(n).unwrap().clone()).collect();
    for p in points(&g.domain) {
        let v: Vec<Vec4> = a.iter().map(|f| g.one_form_at(f, &p).unwrap()).collect();
        let cases = [(1, forms::wedge11(&v[3], &v[1])), (2, forms::wedge11(&v[2], &v[3])), (3, [[0.0; 4]; 4])];
        for (k, want) in cases {
            let d = tensor::exterior_derivative_1(g, &a[k], &p).unwrap();
            let r = linalg::max_abs(&linalg::mat_sub(&d, &want)) / linalg::max_abs(&want).max(1.0);
            assert!(r < 1e-10, "da{} residual {r:e}", k + 1);
        }
    }
}

#[test]
fn flat_and_petean_curvature() {
    let flat = builtin("flat_neutral", &Params::new()).unwrap();
    for p in points(&flat.geometry.domain) {
        let c = tensor::riemann_at(&flat.geometry, &p).unwrap();
        assert!(c.riemann.iter().flatten().flatten().flatten().all(|v| v.abs() < 1e-12));
    }
    let pt = builtin("petean_torus", &Params::new()).unwrap();
    for p in points(&pt.geometry.domain) {
        let c = tensor::riemann_at(&pt.geometry, &p).unwrap();
        assert!(linalg::max_abs(&c.ricci) < 1e-8, "{:?}", c.ricci);
    }
}
