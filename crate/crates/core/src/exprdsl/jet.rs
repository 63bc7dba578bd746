//! Forward-mode jets carrying exact first and second derivatives in the four
//! chart coordinates.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Packed index of the symmetric pair (i, j) in a 10-entry hessian.
#[inline]
pub fn sym_index(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    a * (7 - a) / 2 + b
}

/// Arithmetic shared by plain reals and jets.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    fn scale(self, k: f64) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    fn recip(self) -> Self;
    fn powi(self, n: i32) -> Self;
    /// All carried components are finite.
    fn is_finite(&self) -> bool;

    fn zero() -> Self {
        Self::cst(0.0)
    }
    fn one() -> Self {
        Self::cst(1.0)
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

/// Value and gradient.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Jet1 {
    pub value: f64,
    pub grad: [f64; 4],
}

impl Jet1 {
    pub fn constant(value: f64) -> Self {
        Jet1 { value, grad: [0.0; 4] }
    }

    pub fn variable(value: f64, index: usize) -> Self {
        let mut grad = [0.0; 4];
        grad[index] = 1.0;
        Jet1 { value, grad }
    }

    fn chain(self, h: f64, dh: f64) -> Self {
        let mut grad = [0.0; 4];
        for (g, s) in grad.iter_mut().zip(self.grad) {
            *g = dh * s;
        }
        Jet1 { value: h, grad }
    }
}

impl Add for Jet1 {
    type Output = Jet1;
    fn add(self, o: Jet1) -> Jet1 {
        let mut grad = self.grad;
        for (g, b) in grad.iter_mut().zip(o.grad) {
            *g += b;
        }
        Jet1 { value: self.value + o.value, grad }
    }
}

impl Sub for Jet1 {
    type Output = Jet1;
    fn sub(self, o: Jet1) -> Jet1 {
        let mut grad = self.grad;
        for (g, b) in grad.iter_mut().zip(o.grad) {
            *g -= b;
        }
        Jet1 { value: self.value - o.value, grad }
    }
}

impl Neg for Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        self.scale(-1.0)
    }
}

impl Mul for Jet1 {
    type Output = Jet1;
    fn mul(self, o: Jet1) -> Jet1 {
        let mut grad = [0.0; 4];
        for (i, g) in grad.iter_mut().enumerate() {
            *g = self.grad[i] * o.value + self.value * o.grad[i];
        }
        Jet1 { value: self.value * o.value, grad }
    }
}

impl Div for Jet1 {
    type Output = Jet1;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet1) -> Jet1 {
        self * o.recip()
    }
}

impl Scalar for Jet1 {
    fn cst(v: f64) -> Self {
        Jet1::constant(v)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn scale(self, k: f64) -> Self {
        let mut grad = self.grad;
        for g in grad.iter_mut() {
            *g *= k;
        }
        Jet1 { value: self.value * k, grad }
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.value.ln(), 1.0 / self.value)
    }
    fn sin(self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }
    fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s)
    }
    fn recip(self) -> Self {
        let r = 1.0 / self.value;
        self.chain(r, -r * r)
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Jet1::constant(1.0);
        }
        let d = f64::from(n) * self.value.powi(n - 1);
        self.chain(self.value.powi(n), d)
    }
    fn is_finite(&self) -> bool {
        self.value.is_finite() && self.grad.iter().all(|g| g.is_finite())
    }
}

/// Value, gradient and symmetric hessian (10 packed entries).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Jet2 {
    pub value: f64,
    pub grad: [f64; 4],
    pub hess: [f64; 10],
}

impl Jet2 {
    pub fn constant(value: f64) -> Self {
        Jet2 { value, grad: [0.0; 4], hess: [0.0; 10] }
    }

    pub fn variable(value: f64, index: usize) -> Self {
        let mut grad = [0.0; 4];
        grad[index] = 1.0;
        Jet2 { value, grad, hess: [0.0; 10] }
    }

    /// Seeds the four chart coordinates of `p`.
    pub fn seed(p: &[f64; 4]) -> [Jet2; 4] {
        [
            Jet2::variable(p[0], 0),
            Jet2::variable(p[1], 1),
            Jet2::variable(p[2], 2),
            Jet2::variable(p[3], 3),
        ]
    }

    pub fn hessian(&self, i: usize, j: usize) -> f64 {
        self.hess[sym_index(i, j)]
    }

    pub fn hessian_matrix(&self) -> [[f64; 4]; 4] {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.hessian(i, j);
            }
        }
        m
    }

    /// First-order jet dropping the hessian.
    pub fn lower(&self) -> Jet1 {
        Jet1 { value: self.value, grad: self.grad }
    }

    /// Jet of the partial derivative along coordinate `a`.
    pub fn deriv(&self, a: usize) -> Jet1 {
        let mut grad = [0.0; 4];
        for (b, g) in grad.iter_mut().enumerate() {
            *g = self.hessian(a, b);
        }
        Jet1 { value: self.grad[a], grad }
    }

    fn chain(self, h: f64, dh: f64, ddh: f64) -> Self {
        let mut grad = [0.0; 4];
        for (g, s) in grad.iter_mut().zip(self.grad) {
            *g = dh * s;
        }
        let mut hess = [0.0; 10];
        for i in 0..4 {
            for j in i..4 {
                let k = sym_index(i, j);
                hess[k] = ddh * self.grad[i] * self.grad[j] + dh * self.hess[k];
            }
        }
        Jet2 { value: h, grad, hess }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        let mut r = self;
        r.value += o.value;
        for (g, b) in r.grad.iter_mut().zip(o.grad) {
            *g += b;
        }
        for (h, b) in r.hess.iter_mut().zip(o.hess) {
            *h += b;
        }
        r
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        let mut r = self;
        r.value -= o.value;
        for (g, b) in r.grad.iter_mut().zip(o.grad) {
            *g -= b;
        }
        for (h, b) in r.hess.iter_mut().zip(o.hess) {
            *h -= b;
        }
        r
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let mut grad = [0.0; 4];
        for (i, g) in grad.iter_mut().enumerate() {
            *g = self.grad[i] * o.value + self.value * o.grad[i];
        }
        let mut hess = [0.0; 10];
        for i in 0..4 {
            for j in i..4 {
                let k = sym_index(i, j);
                hess[k] = self.hess[k] * o.value
                    + self.grad[i] * o.grad[j]
                    + self.grad[j] * o.grad[i]
                    + self.value * o.hess[k];
            }
        }
        Jet2 { value: self.value * o.value, grad, hess }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

impl Scalar for Jet2 {
    fn cst(v: f64) -> Self {
        Jet2::constant(v)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn scale(self, k: f64) -> Self {
        let mut r = self;
        r.value *= k;
        for g in r.grad.iter_mut() {
            *g *= k;
        }
        for h in r.hess.iter_mut() {
            *h *= k;
        }
        r
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let r = 1.0 / self.value;
        self.chain(self.value.ln(), r, -r * r)
    }
    fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }
    fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.value))
    }
    fn recip(self) -> Self {
        let r = 1.0 / self.value;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
    fn powi(self, n: i32) -> Self {
        match n {
            0 => Jet2::constant(1.0),
            1 => self,
            _ => {
                let nf = f64::from(n);
                let d = nf * self.value.powi(n - 1);
                let dd = nf * (nf - 1.0) * self.value.powi(n - 2);
                self.chain(self.value.powi(n), d, dd)
            }
        }
    }
    fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().all(|h| h.is_finite())
    }
}

/// Access to value and first partials; implemented by both jet orders.
pub trait FirstOrder: Copy {
    fn val(&self) -> f64;
    fn d(&self, a: usize) -> f64;
}

impl FirstOrder for Jet1 {
    fn val(&self) -> f64 {
        self.value
    }
    fn d(&self, a: usize) -> f64 {
        self.grad[a]
    }
}

impl FirstOrder for Jet2 {
    fn val(&self) -> f64 {
        self.value
    }
    fn d(&self, a: usize) -> f64 {
        self.grad[a]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_indices_cover_ten_slots() {
        let mut seen = [false; 10];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(sym_index(i, j), sym_index(j, i));
                seen[sym_index(i, j)] = true;
            }
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn product_rule_on_bilinear() {
        let p = [2.0, 3.0, 0.0, 0.0];
        let v = Jet2::seed(&p);
        let xy = v[0] * v[1];
        assert_eq!(xy.value, 6.0);
        assert_eq!(xy.grad, [3.0, 2.0, 0.0, 0.0]);
        assert_eq!(xy.hessian(0, 1), 1.0);
        assert_eq!(xy.hessian(0, 0), 0.0);
    }

    #[test]
    fn reciprocal_derivatives() {
        let v = Jet2::variable(2.0, 3);
        let r = v.recip();
        assert_eq!(r.value, 0.5);
        assert_eq!(r.grad[3], -0.25);
        assert_eq!(r.hessian(3, 3), 0.25);
    }

    #[test]
    fn deriv_extracts_gradient_jet() {
        let p = [0.3, -1.2, 0.7, 1.5];
        let v = Jet2::seed(&p);
        let f = (v[0] * v[3]).sin() + v[1].powi(3);
        let d3 = f.deriv(3);
        assert!((d3.value - f.grad[3]).abs() < 1e-15);
        assert!((d3.grad[0] - f.hessian(3, 0)).abs() < 1e-15);
    }

    #[test]
    fn constants_have_zero_derivatives() {
        let c = Jet2::constant(3.5).exp().sqrt().sin();
        assert_eq!(c.grad, [0.0; 4]);
        assert_eq!(c.hess, [0.0; 10]);
    }
}
