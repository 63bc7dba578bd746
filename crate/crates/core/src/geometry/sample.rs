//! Seeded sampling of points in a domain box.
//!
//! Generator: xoshiro256++ seeded through `seed_from_u64` (SplitMix64
//! expansion). Each coordinate is `lo + w·(0.01 + 0.98·u)` where `w = hi - lo`
//! and `u` is the generator's next `f64` in `[0, 1)`, drawn in coordinate
//! order.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use super::linalg::Vec4;

pub const MARGIN: f64 = 0.01;

pub fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

pub fn draw_point(rng: &mut Xoshiro256PlusPlus, domain: &[(f64, f64); 4]) -> Vec4 {
    std::array::from_fn(|i| {
        let (lo, hi) = domain[i];
        let u: f64 = rng.gen();
        lo + (hi - lo) * (MARGIN + (1.0 - 2.0 * MARGIN) * u)
    })
}

pub fn sample_points(domain: &[(f64, f64); 4], n: usize, seed: u64) -> Vec<Vec4> {
    let mut r = rng(seed);
    (0..n).map(|_| draw_point(&mut r, domain)).collect()
}

/// Rejection sampling: keeps drawing until `n` points satisfy `accept`, up to
/// `1000·n` draws.
pub fn sample_points_where(
    domain: &[(f64, f64); 4],
    n: usize,
    seed: u64,
    accept: impl Fn(&Vec4) -> bool,
) -> Vec<Vec4> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(n);
    let mut tries = 0;
    while out.len() < n && tries < 1000 * n.max(1) {
        let p = draw_point(&mut r, domain);
        tries += 1;
        if accept(&p) {
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_stay_inside_shrunk_box() {
        let dom = [(-10.0, 10.0), (0.0, 1.0), (-1.0, 1.0), (0.1, 10.0)];
        for p in sample_points(&dom, 500, 9) {
            for (x, (lo, hi)) in p.iter().zip(dom) {
                assert!(*x > lo && *x < hi);
            }
        }
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let dom = [(-10.0, 10.0); 4];
        assert_eq!(sample_points(&dom, 20, 3), sample_points(&dom, 20, 3));
        assert_ne!(sample_points(&dom, 20, 3), sample_points(&dom, 20, 4));
    }
}
