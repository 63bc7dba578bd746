//! Recursive-descent parser for scalar expressions.
//!
//! ```text
//! expr   = term { ("+" | "-") term }
//! term   = unary { ("*" | "/") unary }
//! unary  = "-" unary | power
//! power  = atom [ "^" ["-"] digits ]
//! atom   = number | ident | func "(" expr ")" | "(" expr ")"
//! ```

use thiserror::Error;

use super::expr::{BinaryOp, Expr, UnaryOp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown symbol `{name}` at byte {offset}")]
    UnknownSymbol { name: String, offset: usize },
}

impl ExprError {
    pub fn offset(&self) -> usize {
        match self {
            ExprError::Syntax { offset, .. } | ExprError::UnknownSymbol { offset, .. } => *offset,
        }
    }

    pub fn shifted(self, by: usize) -> ExprError {
        match self {
            ExprError::Syntax { offset, message } => ExprError::Syntax { offset: offset + by, message },
            ExprError::UnknownSymbol { name, offset } => {
                ExprError::UnknownSymbol { name, offset: offset + by }
            }
        }
    }
}

/// Names an expression may refer to.
#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    pub coords: Vec<String>,
    pub params: Vec<String>,
}

impl SymbolTable {
    pub fn new(coords: &[&str], params: &[&str]) -> Self {
        SymbolTable {
            coords: coords.iter().map(|s| s.to_string()).collect(),
            params: params.iter().map(|s| s.to_string()).collect(),
        }
    }
}

pub fn parse_expression(text: &str, table: &SymbolTable) -> Result<Expr, ExprError> {
    let mut p = ExprParser { src: text.as_bytes(), pos: 0, table };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
    table: &'a SymbolTable,
}

impl ExprParser<'_> {
    fn error(&self, message: &str) -> ExprError {
        ExprError::Syntax { offset: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinaryOp::Add,
                Some(b'-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinaryOp::Mul,
                Some(b'/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat(b'-') {
            return Ok(Expr::unary(UnaryOp::Neg, self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        self.skip_ws();
        let start = self.pos;
        if self.src.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits {
            self.pos = start;
            return Err(self.error("exponent must be an integer literal"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        let n: i32 = text.parse().map_err(|_| ExprError::Syntax {
            offset: start,
            message: "exponent out of range".into(),
        })?;
        Ok(Expr::powi(base, n))
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(_) => Err(self.error("expected number, name or `(`")),
            None => Err(self.error("unexpected end of expression")),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos > s
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            if !digits(self) {
                return Err(self.error("expected digits after `.`"));
            }
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if !digits(self) {
                self.pos = save;
                return Err(self.error("malformed exponent"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| ExprError::Syntax { offset: start, message: "bad number".into() })
    }

    fn ident(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        if self.peek() == Some(b'(') {
            if let Some(op) = UnaryOp::from_function_name(name) {
                self.pos += 1;
                let arg = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)` after function argument"));
                }
                return Ok(Expr::unary(op, arg));
            }
            return Err(ExprError::UnknownSymbol { name: name.to_string(), offset: start });
        }
        if let Some(i) = self.table.coords.iter().position(|c| c == name) {
            return Ok(Expr::Coord(i));
        }
        if self.table.params.iter().any(|p| p == name) {
            return Ok(Expr::Param(name.to_string()));
        }
        Err(ExprError::UnknownSymbol { name: name.to_string(), offset: start })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::expr::{Env, Params};
    use crate::exprdsl::jet::Jet2;

    fn table() -> SymbolTable {
        SymbolTable::new(&["x", "y", "u", "v"], &["a", "alpha"])
    }

    fn eval_at(text: &str, p: [f64; 4], params: &[(&str, f64)]) -> f64 {
        let e = parse_expression(text, &table()).unwrap();
        let params: Params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let coords = ["x", "y", "u", "v"].map(String::from);
        e.eval(&p, &Env { params: &params, coords: &coords }).unwrap()
    }

    #[test]
    fn cosine_at_origin() {
        assert_eq!(eval_at("2 + cos(x)", [0.0; 4], &[]), 3.0);
    }

    #[test]
    fn frame_coefficient_with_parameter() {
        assert_eq!(eval_at("(1 - a)/2", [0.0; 4], &[("a", 0.0)]), 0.5);
    }

    #[test]
    fn pow_binds_tighter_than_minus() {
        assert_eq!(eval_at("-x^2", [3.0, 0.0, 0.0, 0.0], &[]), -9.0);
        assert_eq!(eval_at("x^-2", [2.0, 0.0, 0.0, 0.0], &[]), 0.25);
        assert_eq!(eval_at("2*3 - 4/2 - 1", [0.0; 4], &[]), 3.0);
    }

    #[test]
    fn forms_are_not_scalars() {
        let err = parse_expression("du/v", &table()).unwrap_err();
        assert_eq!(err, ExprError::UnknownSymbol { name: "du".into(), offset: 0 });
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let err = parse_expression("x + * y", &table()).unwrap_err();
        assert_eq!(err.offset(), 4);
        assert!(parse_expression("x y", &table()).is_err());
        assert!(parse_expression("x^1.5", &table()).is_err());
        assert!(parse_expression("foo(x)", &table()).is_err());
    }

    #[test]
    fn jet_of_parsed_product() {
        let e = parse_expression("x*y", &table()).unwrap();
        let params = Params::new();
        let coords = ["x", "y", "u", "v"].map(String::from);
        let j = e
            .eval(&Jet2::seed(&[2.0, 3.0, 0.0, 0.0]), &Env { params: &params, coords: &coords })
            .unwrap();
        assert_eq!((j.value, j.grad), (6.0, [3.0, 2.0, 0.0, 0.0]));
        assert_eq!(j.hessian(0, 1), 1.0);
    }
}
