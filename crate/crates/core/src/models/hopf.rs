//! Numerical search for commuting null Killing pairs of left-invariant
//! fields on `S¹ × SU(2)` under random left-invariant metrics.
//!
//! The result is evidence only: a failed search does not prove that no pair
//! exists.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::linalg::{self, Mat4, Vec4};
use crate::geometry::sample;
use crate::geometry::Structure;
use crate::report::Real;

/// Required `‖X∧Y‖∞` for unit `X`, `Y`.
pub const MARGIN: f64 = 0.1;
pub const EVALUATIONS_PER_ATTEMPT: usize = 10_000;
pub const RESIDUAL_LEN: usize = 28;

/// `X₀` central, `[X₁,X₂] = X₃`, `[X₂,X₃] = X₁`, `[X₃,X₁] = X₂`.
pub fn s1_su2() -> Structure {
    let mut c = [[[0.0; 4]; 4]; 4];
    for (a, b, k) in [(1, 2, 3), (2, 3, 1), (3, 1, 2)] {
        c[a][b][k] = 1.0;
        c[b][a][k] = -1.0;
    }
    c
}

pub fn abelian() -> Structure {
    [[[0.0; 4]; 4]; 4]
}

/// Multi-start count per attempt; the evaluation budget is shared.
pub const STARTS_PER_ATTEMPT: usize = 3;
const NELDER_MEAD_ITERS: u64 = 150;
const POLISH_ITERS: usize = 40;

fn unit(v: &[f64]) -> Vec4 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    std::array::from_fn(|i| v[i] / n)
}

/// `ad_x` as a matrix: `ad[k][b] = [x, e_b]^k`.
fn ad(c: &Structure, x: &Vec4) -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    for (a, xa) in x.iter().enumerate() {
        for b in 0..4 {
            for k in 0..4 {
                m[k][b] += xa * c[a][b][k];
            }
        }
    }
    m
}

/// `g([A,e_b],e_c) + g([A,e_c],e_b)` for `b ≤ c`.
fn killing_terms(m: &Mat4, g: &Mat4, out: &mut [f64]) {
    let mut n = 0;
    for b in 0..4 {
        for cc in b..4 {
            let mut s = 0.0;
            for k in 0..4 {
                s += m[k][b] * g[k][cc] + m[k][cc] * g[k][b];
            }
            out[n] = s;
            n += 1;
        }
    }
}

/// Residual vector of the system for `X = x/|x|`, `Y = y/|y|`: nullity and
/// orthogonality (3), `[X,Y]` (4), Killing equations of `X` and `Y` (10 + 10)
/// and the non-collinearity hinge (1).
pub fn residual_vector(c: &Structure, g: &Mat4, x: &[f64], y: &[f64]) -> [f64; RESIDUAL_LEN] {
    let x = unit(x);
    let y = unit(y);
    let mut r = [0.0; RESIDUAL_LEN];
    r[0] = linalg::bilinear(g, &x, &x);
    r[1] = linalg::bilinear(g, &y, &y);
    r[2] = linalg::bilinear(g, &x, &y);
    let mx = ad(c, &x);
    let my = ad(c, &y);
    r[3..7].copy_from_slice(&linalg::mat_vec(&mx, &y));
    killing_terms(&mx, g, &mut r[7..17]);
    killing_terms(&my, g, &mut r[17..27]);
    let mut wedge = 0.0_f64;
    for i in 0..4 {
        for j in 0..4 {
            wedge = wedge.max((x[i] * y[j] - x[j] * y[i]).abs());
        }
    }
    r[27] = (MARGIN - wedge).max(0.0);
    r
}

struct Problem<'a> {
    c: &'a Structure,
    g: &'a Mat4,
}

impl Problem<'_> {
    fn residual(&self, p: &[f64]) -> [f64; RESIDUAL_LEN] {
        residual_vector(self.c, self.g, &p[..4], &p[4..])
    }
}

impl CostFunction for Problem<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> Result<f64, argmin::core::Error> {
        Ok(self.residual(p).iter().map(|r| r * r).sum())
    }
}

fn sup(r: &[f64]) -> f64 {
    r.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Levenberg–Marquardt steps with a forward-difference Jacobian, stopping
/// when `budget` evaluations are used.
fn polish(problem: &Problem, start: Vec<f64>, iters: usize, budget: usize) -> (Vec<f64>, usize) {
    let mut p = start;
    let mut r = problem.residual(&p);
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = 1e-3;
    let mut evals = 1;
    for _ in 0..iters {
        if evals + 16 > budget {
            break;
        }
        let h = 1e-7;
        let mut jt = nalgebra::SMatrix::<f64, 8, RESIDUAL_LEN>::zeros();
        for j in 0..8 {
            let mut q = p.clone();
            q[j] += h;
            let rq = problem.residual(&q);
            for k in 0..RESIDUAL_LEN {
                jt[(j, k)] = (rq[k] - r[k]) / h;
            }
        }
        evals += 8;
        let jtj = jt * jt.transpose();
        let jtr = jt * nalgebra::SVector::<f64, RESIDUAL_LEN>::from_column_slice(&r);
        let mut improved = false;
        for _ in 0..8 {
            let a = jtj + nalgebra::SMatrix::<f64, 8, 8>::identity() * lambda * (1.0 + jtj.diagonal().max());
            let Some(step) = a.lu().solve(&(-jtr)) else { break };
            let q: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rq = problem.residual(&q);
            evals += 1;
            let cq: f64 = rq.iter().map(|v| v * v).sum();
            if cq < cost {
                p = q;
                r = rq;
                cost = cq;
                lambda = (lambda * 0.3).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved || cost < 1e-30 {
            break;
        }
    }
    (p, evals)
}

/// One start: a short Nelder–Mead run followed by the polish.
fn local_search(problem: &Problem, start: Vec<f64>, budget: usize) -> (f64, usize) {
    let mut simplex = vec![start.clone()];
    for i in 0..8 {
        let mut v = start.clone();
        v[i] += 0.5;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex).with_sd_tolerance(1e-18).expect("valid tolerance");
    let run = Executor::new(Problem { c: problem.c, g: problem.g }, solver)
        .configure(|s| s.max_iters(NELDER_MEAD_ITERS))
        .run();
    let (best, nm_evals) = match run {
        Ok(res) => {
            let st = res.state();
            let evals = st.get_func_counts().get("cost_count").copied().unwrap_or(0) as usize;
            (st.get_best_param().cloned().unwrap_or(start), evals)
        }
        Err(_) => (start, 0),
    };
    let (p, extra) = polish(problem, best, POLISH_ITERS, budget.saturating_sub(nm_evals));
    (sup(&problem.residual(&p)), nm_evals + extra)
}

fn minimize(c: &Structure, g: &Mat4, rng: &mut impl Rng) -> (f64, usize) {
    let problem = Problem { c, g };
    let mut best = f64::INFINITY;
    let mut used = 0;
    for k in 0..STARTS_PER_ATTEMPT {
        let share = (EVALUATIONS_PER_ATTEMPT - used) / (STARTS_PER_ATTEMPT - k);
        let start: Vec<f64> = (0..8).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
        let (r, evals) = local_search(&problem, start, share);
        used += evals;
        best = best.min(r);
    }
    (best, used)
}

/// Random symmetric metric with entries in `[-1, 1]` and condition number
/// at most `1e3`.
fn random_metric(rng: &mut impl Rng) -> Mat4 {
    loop {
        let mut g = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in i..4 {
                let v = 2.0 * rng.gen::<f64>() - 1.0;
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        let eig = nalgebra::Matrix4::from_fn(|i, j| g[i][j]).symmetric_eigenvalues();
        let max = eig.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let min = eig.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if min > 0.0 && max / min <= 1e3 {
            return g;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HopfSearchReport {
    pub attempts: usize,
    pub seed: u64,
    pub threshold: Real,
    pub control: bool,
    /// Best sup-norm residual per attempt.
    pub best_residuals: Vec<Real>,
    pub evaluations: Vec<usize>,
    pub min_residual: Real,
    /// True iff every attempt stayed above the threshold.
    pub no_solution_found: bool,
    pub conclusion: String,
}

fn attempt_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64)
}

fn run(attempts: usize, seed: u64, threshold: f64, control: bool) -> HopfSearchReport {
    let attempts = attempts.max(1);
    let results: Vec<(f64, usize)> = (0..attempts)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample::rng(attempt_seed(seed, k));
            if control {
                let g = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, -1.0]];
                minimize(&abelian(), &g, &mut rng)
            } else {
                let g = random_metric(&mut rng);
                minimize(&s1_su2(), &g, &mut rng)
            }
        })
        .collect();
    let min = results.iter().fold(f64::INFINITY, |m, r| m.min(r.0));
    let none = min > threshold;
    let conclusion = if none {
        "no solution found below threshold".to_string()
    } else {
        format!("candidate solution found (residual {min:e} <= {threshold:e})")
    };
    HopfSearchReport {
        attempts,
        seed,
        threshold: Real(threshold),
        control,
        best_residuals: results.iter().map(|r| Real(r.0)).collect(),
        evaluations: results.iter().map(|r| r.1).collect(),
        min_residual: Real(min),
        no_solution_found: none,
        conclusion,
    }
}

/// Multi-start search on `S¹ × SU(2)`.
pub fn hopf_remark_search(attempts: usize, seed: u64, threshold: f64) -> HopfSearchReport {
    run(attempts, seed, threshold, false)
}

/// The same search on an abelian group with a flat neutral metric, where
/// solutions exist.
pub fn abelian_control_search(attempts: usize, seed: u64, threshold: f64) -> HopfSearchReport {
    run(attempts, seed, threshold, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bracket(c: &Structure, x: &Vec4, y: &Vec4) -> Vec4 {
        std::array::from_fn(|k| {
            let mut s = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    s += c[a][b][k] * x[a] * y[b];
                }
            }
            s
        })
    }

    #[test]
    fn structure_satisfies_jacobi() {
        assert!(crate::geometry::jacobi_residual(&s1_su2()) < 1e-15);
    }

    #[test]
    fn collinear_pair_is_excluded_by_margin() {
        let g = [[0.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, -1.0]];
        let x = [1.0, 0.0, 0.0, 0.0];
        let y = [2.0, 0.0, 0.0, 0.0];
        let r = residual_vector(&s1_su2(), &g, &x, &y);
        assert_eq!(r.len(), RESIDUAL_LEN);
        assert_eq!(&r[..7], &[0.0; 7]);
        assert!(r[7..27].iter().all(|v| *v == 0.0));
        assert_eq!(r[RESIDUAL_LEN - 1], MARGIN);
    }

    #[test]
    fn control_finds_solution() {
        let rep = abelian_control_search(4, 1, 1e-8);
        assert!(!rep.no_solution_found, "{:?}", rep.best_residuals);
    }

    #[test]
    fn budget_is_respected() {
        let rep = hopf_remark_search(3, 5, 1e-4);
        assert!(rep.evaluations.iter().all(|e| *e <= EVALUATIONS_PER_ATTEMPT), "{:?}", rep.evaluations);
    }

    #[test]
    fn killing_terms_match_the_bracket_formula() {
        let c = s1_su2();
        let g = [[1.0, 0.2, 0.0, 0.1], [0.2, -1.0, 0.3, 0.0], [0.0, 0.3, 1.0, 0.0], [0.1, 0.0, 0.0, -1.0]];
        let x = [0.3, -0.2, 0.5, 0.7];
        let mut fast = [0.0; 10];
        killing_terms(&ad(&c, &x), &g, &mut fast);
        let e = |i: usize| -> Vec4 { std::array::from_fn(|k| if k == i { 1.0 } else { 0.0 }) };
        let mut n = 0;
        for b in 0..4 {
            for cc in b..4 {
                let slow = linalg::bilinear(&g, &bracket(&c, &x, &e(b)), &e(cc))
                    + linalg::bilinear(&g, &bracket(&c, &x, &e(cc)), &e(b));
                assert!((slow - fast[n]).abs() < 1e-15);
                n += 1;
            }
        }
    }
}
