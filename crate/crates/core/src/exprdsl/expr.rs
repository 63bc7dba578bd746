use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::jet::Scalar;

/// Named document-level constants.
pub type Params = BTreeMap<String, f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Recip,
}

impl UnaryOp {
    pub fn function_name(self) -> Option<&'static str> {
        match self {
            UnaryOp::Neg => None,
            UnaryOp::Exp => Some("exp"),
            UnaryOp::Log => Some("log"),
            UnaryOp::Sin => Some("sin"),
            UnaryOp::Cos => Some("cos"),
            UnaryOp::Sqrt => Some("sqrt"),
            UnaryOp::Recip => Some("recip"),
        }
    }

    pub fn from_function_name(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "sqrt" => UnaryOp::Sqrt,
            "recip" => UnaryOp::Recip,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Scalar expression in four chart coordinates.
///
/// Constants are kept non-negative; negative literals are `Neg(Const)`, which
/// is what the parser produces for `-c`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Coord(usize),
    Param(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error in {op}: `{subexpr}` evaluates to {value}")]
    Domain { op: &'static str, subexpr: String, value: f64 },
    #[error("non-finite result from `{subexpr}`")]
    NonFinite { subexpr: String },
    #[error("unbound parameter `{0}`")]
    UnboundParam(String),
}

/// Bindings needed to evaluate an expression.
#[derive(Clone, Copy, Debug)]
pub struct Env<'a> {
    pub params: &'a Params,
    pub coords: &'a [String; 4],
}

impl Expr {
    pub fn cst(v: f64) -> Expr {
        if v == 0.0 {
            Expr::Const(0.0)
        } else if v < 0.0 {
            Expr::Unary(UnaryOp::Neg, Box::new(Expr::Const(-v)))
        } else {
            Expr::Const(v)
        }
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        Expr::Unary(op, Box::new(a))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn powi(a: Expr, n: i32) -> Expr {
        Expr::Pow(Box::new(a), n)
    }

    /// Literal numeric value if the tree is a (possibly negated) constant.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            Expr::Unary(UnaryOp::Neg, a) => a.as_constant().map(|c| -c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    // Simplifying constructors used when assembling expressions in code.

    pub fn neg(a: Expr) -> Expr {
        match a.as_constant() {
            Some(c) => Expr::cst(-c),
            None => match a {
                Expr::Unary(UnaryOp::Neg, inner) => *inner,
                other => Expr::unary(UnaryOp::Neg, other),
            },
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        if let Expr::Unary(UnaryOp::Neg, inner) = b {
            return Expr::sub(a, *inner);
        }
        Expr::binary(BinaryOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_zero() {
            return a;
        }
        if a.is_zero() {
            return Expr::neg(b);
        }
        if a == b {
            return Expr::Const(0.0);
        }
        Expr::binary(BinaryOp::Sub, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_zero() || b.is_zero() {
            return Expr::Const(0.0);
        }
        let (ca, cb) = (a.as_constant(), b.as_constant());
        if ca == Some(1.0) {
            b
        } else if cb == Some(1.0) {
            a
        } else if ca == Some(-1.0) {
            Expr::neg(b)
        } else if cb == Some(-1.0) {
            Expr::neg(a)
        } else {
            Expr::binary(BinaryOp::Mul, a, b)
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            return Expr::Const(0.0);
        }
        if b.as_constant() == Some(1.0) {
            return a;
        }
        Expr::binary(BinaryOp::Div, a, b)
    }

    /// Which chart coordinates appear in the tree.
    pub fn coords_used(&self) -> [bool; 4] {
        let mut used = [false; 4];
        self.visit(&mut |e| {
            if let Expr::Coord(i) = e {
                used[*i] = true;
            }
        });
        used
    }

    pub fn params_used(&self) -> Vec<String> {
        let mut names = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Param(p) = e {
                if !names.contains(p) {
                    names.push(p.clone());
                }
            }
        });
        names
    }

    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Unary(_, a) | Expr::Pow(a, _) => a.visit(f),
            Expr::Binary(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// Replaces parameters by their bound values.
    pub fn substitute_params(&self, params: &Params) -> Result<Expr, EvalError> {
        Ok(match self {
            Expr::Param(p) => {
                Expr::cst(*params.get(p).ok_or_else(|| EvalError::UnboundParam(p.clone()))?)
            }
            Expr::Unary(op, a) => Expr::unary(*op, a.substitute_params(params)?),
            Expr::Binary(op, a, b) => {
                Expr::binary(*op, a.substitute_params(params)?, b.substitute_params(params)?)
            }
            Expr::Pow(a, n) => Expr::powi(a.substitute_params(params)?, *n),
            other => other.clone(),
        })
    }

    /// Symbolic partial derivative along coordinate `i`.
    pub fn derivative(&self, i: usize) -> Expr {
        match self {
            Expr::Const(_) | Expr::Param(_) => Expr::Const(0.0),
            Expr::Coord(j) => Expr::cst(if *j == i { 1.0 } else { 0.0 }),
            Expr::Unary(op, a) => {
                let da = a.derivative(i);
                if da.is_zero() {
                    return Expr::Const(0.0);
                }
                let a = (**a).clone();
                match op {
                    UnaryOp::Neg => Expr::neg(da),
                    UnaryOp::Exp => Expr::mul(Expr::unary(UnaryOp::Exp, a), da),
                    UnaryOp::Log => Expr::div(da, a),
                    UnaryOp::Sin => Expr::mul(Expr::unary(UnaryOp::Cos, a), da),
                    UnaryOp::Cos => Expr::neg(Expr::mul(Expr::unary(UnaryOp::Sin, a), da)),
                    UnaryOp::Sqrt => {
                        Expr::div(da, Expr::mul(Expr::Const(2.0), Expr::unary(UnaryOp::Sqrt, a)))
                    }
                    UnaryOp::Recip => Expr::neg(Expr::div(da, Expr::powi(a, 2))),
                }
            }
            Expr::Binary(op, a, b) => {
                let (da, db) = (a.derivative(i), b.derivative(i));
                let (a, b) = ((**a).clone(), (**b).clone());
                match op {
                    BinaryOp::Add => Expr::add(da, db),
                    BinaryOp::Sub => Expr::sub(da, db),
                    BinaryOp::Mul => Expr::add(Expr::mul(da, b), Expr::mul(a, db)),
                    BinaryOp::Div => {
                        let first = Expr::div(da, b.clone());
                        if db.is_zero() {
                            first
                        } else {
                            Expr::sub(first, Expr::div(Expr::mul(a, db), Expr::powi(b, 2)))
                        }
                    }
                }
            }
            Expr::Pow(a, n) => {
                let da = a.derivative(i);
                if da.is_zero() || *n == 0 {
                    return Expr::Const(0.0);
                }
                let base = match n - 1 {
                    0 => Expr::Const(1.0),
                    1 => (**a).clone(),
                    m => Expr::powi((**a).clone(), m),
                };
                Expr::mul(Expr::mul(Expr::cst(f64::from(*n)), base), da)
            }
        }
    }

    /// Replaces each coordinate by the corresponding expression.
    pub fn substitute_coords(&self, subs: &[Expr; 4]) -> Expr {
        match self {
            Expr::Coord(i) => subs[*i].clone(),
            Expr::Unary(op, a) => Expr::unary(*op, a.substitute_coords(subs)),
            Expr::Binary(op, a, b) => {
                Expr::binary(*op, a.substitute_coords(subs), b.substitute_coords(subs))
            }
            Expr::Pow(a, n) => Expr::powi(a.substitute_coords(subs), *n),
            other => other.clone(),
        }
    }

    /// Evaluates with any scalar type; jets give exact derivatives.
    pub fn eval<S: Scalar>(&self, x: &[S; 4], env: &Env) -> Result<S, EvalError> {
        let r = match self {
            Expr::Const(c) => S::cst(*c),
            Expr::Coord(i) => x[*i],
            Expr::Param(p) => S::cst(
                *env.params.get(p).ok_or_else(|| EvalError::UnboundParam(p.clone()))?,
            ),
            Expr::Unary(op, a) => {
                let v = a.eval(x, env)?;
                let val = v.value();
                match op {
                    UnaryOp::Neg => -v,
                    UnaryOp::Exp => v.exp(),
                    UnaryOp::Log => {
                        if val <= 0.0 {
                            return Err(self.domain("log", val, env));
                        }
                        v.ln()
                    }
                    UnaryOp::Sin => v.sin(),
                    UnaryOp::Cos => v.cos(),
                    UnaryOp::Sqrt => {
                        if val < 0.0 {
                            return Err(self.domain("sqrt", val, env));
                        }
                        v.sqrt()
                    }
                    UnaryOp::Recip => {
                        if val == 0.0 {
                            return Err(self.domain("recip", val, env));
                        }
                        v.recip()
                    }
                }
            }
            Expr::Binary(op, a, b) => {
                let u = a.eval(x, env)?;
                let v = b.eval(x, env)?;
                match op {
                    BinaryOp::Add => u + v,
                    BinaryOp::Sub => u - v,
                    BinaryOp::Mul => u * v,
                    BinaryOp::Div => {
                        if v.value() == 0.0 {
                            return Err(EvalError::Domain {
                                op: "division",
                                subexpr: b.render(env.coords),
                                value: 0.0,
                            });
                        }
                        u / v
                    }
                }
            }
            Expr::Pow(a, n) => {
                let v = a.eval(x, env)?;
                if *n < 0 && v.value() == 0.0 {
                    return Err(self.domain("negative power", 0.0, env));
                }
                v.powi(*n)
            }
        };
        if !r.is_finite() {
            return Err(EvalError::NonFinite { subexpr: self.render(env.coords) });
        }
        Ok(r)
    }

    fn domain(&self, op: &'static str, value: f64, env: &Env) -> EvalError {
        EvalError::Domain { op, subexpr: self.render(env.coords), value }
    }

    pub fn render(&self, coords: &[String; 4]) -> String {
        Printer { expr: self, coords }.to_string()
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            Expr::Unary(UnaryOp::Neg, _) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

/// Renders an expression in the surface grammar accepted by the parser.
pub struct Printer<'a> {
    pub expr: &'a Expr,
    pub coords: &'a [String; 4],
}

impl Printer<'_> {
    fn sub<'b>(&'b self, e: &'b Expr) -> Printer<'b> {
        Printer { expr: e, coords: self.coords }
    }

    fn child(&self, f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({})", self.sub(e))
        } else {
            write!(f, "{}", self.sub(e))
        }
    }
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expr {
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Coord(i) => write!(f, "{}", self.coords[*i]),
            Expr::Param(p) => write!(f, "{p}"),
            Expr::Unary(UnaryOp::Neg, a) => {
                write!(f, "-")?;
                self.child(f, a, a.precedence() < 3)
            }
            Expr::Unary(op, a) => {
                write!(f, "{}({})", op.function_name().unwrap_or("?"), self.sub(a))
            }
            Expr::Binary(op, a, b) => {
                let (level, sym) = match op {
                    BinaryOp::Add => (1, " + "),
                    BinaryOp::Sub => (1, " - "),
                    BinaryOp::Mul => (2, "*"),
                    BinaryOp::Div => (2, "/"),
                };
                self.child(f, a, a.precedence() < level)?;
                write!(f, "{sym}")?;
                self.child(f, b, b.precedence() <= level)
            }
            Expr::Pow(a, n) => {
                self.child(f, a, a.precedence() < 5)?;
                write!(f, "^{n}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::jet::Jet2;

    fn names() -> [String; 4] {
        ["x", "y", "u", "v"].map(String::from)
    }

    #[test]
    fn smart_constructors_fold_units() {
        let x = Expr::Coord(0);
        assert_eq!(Expr::mul(Expr::cst(1.0), x.clone()), x);
        assert_eq!(Expr::mul(Expr::cst(-1.0), x.clone()), Expr::unary(UnaryOp::Neg, x.clone()));
        assert_eq!(Expr::add(Expr::cst(0.0), x.clone()), x);
        assert!(Expr::mul(Expr::cst(0.0), x).is_zero());
        assert_eq!(Expr::cst(-2.0), Expr::unary(UnaryOp::Neg, Expr::Const(2.0)));
    }

    #[test]
    fn printer_parenthesizes_by_precedence() {
        let n = names();
        let x = Expr::Coord(0);
        let y = Expr::Coord(1);
        let e = Expr::binary(
            BinaryOp::Sub,
            x.clone(),
            Expr::binary(BinaryOp::Sub, y.clone(), Expr::Const(1.0)),
        );
        assert_eq!(e.render(&n), "x - (y - 1.0)");
        let p = Expr::powi(Expr::unary(UnaryOp::Neg, x.clone()), 2);
        assert_eq!(p.render(&n), "(-x)^2");
        let m = Expr::binary(BinaryOp::Div, x, Expr::binary(BinaryOp::Mul, y, Expr::Const(2.0)));
        assert_eq!(m.render(&n), "x/(y*2.0)");
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let n = names();
        let params = Params::new();
        let env = Env { params: &params, coords: &n };
        let e = Expr::unary(UnaryOp::Log, Expr::Coord(3));
        let err = e.eval(&Jet2::seed(&[0.0, 0.0, 0.0, -1.0]), &env).unwrap_err();
        match err {
            EvalError::Domain { op, subexpr, .. } => {
                assert_eq!(op, "log");
                assert_eq!(subexpr, "log(v)");
            }
            other => panic!("unexpected {other:?}"),
        }
        let d = Expr::binary(BinaryOp::Div, Expr::Const(1.0), Expr::Coord(0));
        assert!(d.eval(&[0.0, 1.0, 1.0, 1.0], &env).is_err());
    }
}
