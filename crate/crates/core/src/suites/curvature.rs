use crate::exprdsl::Backend;
use crate::geometry::linalg;
use crate::report::CheckReport;
use crate::structures::verify_para_hyperhermitian;
use crate::tensor::connection::{compatibility_residual, max_abs4, torsion_residual};
use crate::tensor::{self, CurvatureAtPoint};

use super::{per_point, prefixed, SuiteInput, SuiteResult};

pub fn signature(input: &SuiteInput) -> SuiteResult<Vec<CheckReport>> {
    let points = input.points();
    Ok(vec![prefixed("signature", input.bundle.geometry.check_signature_at(&points))])
}

struct CurvaturePoint {
    compatibility: f64,
    torsion: f64,
    curv: CurvatureAtPoint,
    weyl_trace: f64,
}

pub fn curvature(input: &SuiteInput) -> SuiteResult<Vec<CheckReport>> {
    let geom = &input.bundle.geometry;
    let tol = input.tol;
    let points = input.points();
    let data = per_point(&points, "curvature", |p| {
        let conn = tensor::connection_at(geom, p)?;
        let compatibility = compatibility_residual(&conn);
        let torsion = torsion_residual(&conn);
        let curv = CurvatureAtPoint::from_connection(&conn);
        let weyl_trace = curv.weyl_trace_residual(&conn.inverse_metric());
        Ok::<_, tensor::TensorError>(CurvaturePoint { compatibility, torsion, curv, weyl_trace })
    })?;
    let col = |f: &dyn Fn(&CurvaturePoint) -> f64| -> Vec<f64> { data.iter().map(f).collect() };
    let mut out = vec![
        CheckReport::zero("curvature/metric compatibility", tol.algebraic(), &points, col(&|d| d.compatibility)),
        CheckReport::zero("curvature/torsion free", tol.algebraic(), &points, col(&|d| d.torsion)),
        CheckReport::zero(
            "curvature/Riemann symmetries and first Bianchi",
            tol.first(),
            &points,
            col(&|d| d.curv.symmetry_residual()),
        ),
        CheckReport::zero("curvature/Weyl trace-free", tol.first(), &points, col(&|d| d.weyl_trace)),
    ];
    match input.model() {
        Some("flat_neutral") => out.push(CheckReport::zero(
            "curvature/Riemann = 0",
            1e-12,
            &points,
            col(&|d| max_abs4(&d.curv.riemann)),
        )),
        Some("petean_torus" | "kodaira") => out.push(CheckReport::zero(
            "curvature/Ricci = 0",
            tol.curvature(),
            &points,
            col(&|d| linalg::max_abs(&d.curv.ricci)),
        )),
        _ => {}
    }
    if geom.backend == Backend::Frame && !data.is_empty() {
        let s0 = data[0].curv.scalar;
        out.push(
            CheckReport::zero(
                "curvature/scalar curvature constant",
                tol.algebraic(),
                &points,
                col(&|d| (d.curv.scalar - s0).abs()),
            )
            .with_note(format!("scalar curvature {s0:.16e}")),
        );
    }
    Ok(out)
}

pub fn weyl_split(input: &SuiteInput) -> SuiteResult<Vec<CheckReport>> {
    let geom = &input.bundle.geometry;
    let tol = input.tol;
    let points = input.points();
    let triple = input.bundle.triple();
    let data = per_point(&points, "weyl_split", |p| {
        let orientation = triple.at(geom, p).map(|t| t.orientation).unwrap_or(1.0);
        tensor::weyl_split_at(geom, p, orientation).map(|w| (orientation, w))
    })?;
    let traces: Vec<f64> = data
        .iter()
        .map(|(_, w)| {
            let (a, b) = w.traces();
            a.abs().max(b.abs())
        })
        .collect();
    let plus: Vec<f64> = data.iter().map(|(_, w)| w.plus_norm()).collect();
    let minus: Vec<f64> = data.iter().map(|(_, w)| w.minus_norm()).collect();
    let max = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(*x));
    let mut out = vec![
        CheckReport::zero(
            "weyl_split/W+ and W- symmetric",
            tol.first(),
            &points,
            data.iter().map(|(_, w)| w.symmetry_residual()).collect(),
        ),
        CheckReport::zero("weyl_split/W+ and W- trace-free", tol.first(), &points, traces),
        CheckReport::zero(
            "weyl_split/no mixed block",
            tol.first(),
            &points,
            data.iter().map(|(_, w)| w.mixed).collect(),
        ),
    ];
    let norms = format!("max |W+| = {:e}, max |W-| = {:e}", max(&plus), max(&minus));
    let orient: Vec<f64> = data.iter().map(|(o, _)| *o).collect();
    let orientation_note = if orient.iter().all(|o| *o == 1.0) {
        "structure orientation agrees with the basis order".to_string()
    } else {
        "structure orientation differs from the basis order at some points".to_string()
    };
    let failing: Vec<String> = verify_para_hyperhermitian(geom, &triple, &points, &tol)
        .into_iter()
        .filter(|r| !r.passed())
        .map(|r| r.name)
        .collect();
    let name = "weyl_split/W- = 0 (structure orientation)";
    let (ok, hyp) = if failing.is_empty() {
        (true, "hypothesis holds: triple is para-hyperhermitian".to_string())
    } else {
        (false, format!("hypothesis fails: triple is not para-hyperhermitian ({})", failing.join(", ")))
    };
    out.push(if ok {
        CheckReport::zero(name, tol.curvature(), &points, minus).with_note(format!("{hyp}; {norms}; {orientation_note}"))
    } else {
        CheckReport::vacuous(name, tol.curvature(), format!("{hyp}; {norms}"))
    });
    Ok(out)
}
