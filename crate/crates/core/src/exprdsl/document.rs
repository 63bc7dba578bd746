//! Geometry documents: parser and canonical printer.

use std::fmt::Write as _;

use indexmap::IndexMap;
use thiserror::Error;

use super::expr::Expr;
use super::parse::{parse_expression, ExprError, SymbolTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    Coordinate,
    Frame,
}

impl Backend {
    pub fn keyword(self) -> &'static str {
        match self {
            Backend::Coordinate => "coordinate",
            Backend::Frame => "frame",
        }
    }
}

pub const DEFAULT_DOMAIN: (f64, f64) = (-10.0, 10.0);

/// Structure constants `c[i][j][k]` with `[e_i, e_j] = c[i][j][k] e_k`.
pub type Structure = [[[f64; 4]; 4]; 4];

#[derive(Clone, Debug, PartialEq)]
pub struct GeometryDocument {
    pub name: String,
    pub backend: Backend,
    /// Coordinate names, or frame field names for the frame backend.
    pub basis: [String; 4],
    pub domain: [(f64, f64); 4],
    pub params: IndexMap<String, Expr>,
    pub metric: [[Expr; 4]; 4],
    pub structure: Structure,
    pub fields: IndexMap<String, [Expr; 4]>,
    pub forms: IndexMap<String, [Expr; 4]>,
    pub two_forms: IndexMap<String, [[Expr; 4]; 4]>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("in expression: {0}")]
    Expr(#[from] ExprError),
    #[error("unknown name `{name}` at byte {offset}")]
    UnknownName { name: String, offset: usize },
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("dimension error: {what} needs {expected} entries, found {found}")]
    Dimension { what: String, expected: usize, found: usize },
    #[error("metric entries [{i}][{j}] and [{j}][{i}] differ")]
    Asymmetric { i: usize, j: usize },
    #[error("two-form `{name}` entries [{i}][{j}] and [{j}][{i}] are not opposite")]
    NotAntisymmetric { name: String, i: usize, j: usize },
    #[error("index {index} out of range at byte {offset}")]
    Index { index: usize, offset: usize },
    #[error("`{statement}` is not allowed with backend {backend}")]
    WrongBackend { statement: &'static str, backend: &'static str },
    #[error("missing {0}")]
    Missing(&'static str),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(f64),
    Punct(u8),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, DslError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
        } else if c == b'"' {
            let start = i + 1;
            let mut j = start;
            while j < bytes.len() && bytes[j] != b'"' {
                j += 1;
            }
            if j >= bytes.len() {
                return Err(DslError::Syntax { offset: i, message: "unterminated string".into() });
            }
            out.push(Token { tok: Tok::Str(src[start..j].to_string()), offset: start });
            i = j + 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && matches!(bytes[i], b'e' | b'E') {
                i += 1;
                if i < bytes.len() && matches!(bytes[i], b'+' | b'-') {
                    i += 1;
                }
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let v: f64 = src[start..i].parse().map_err(|_| DslError::Syntax {
                offset: start,
                message: format!("bad number `{}`", &src[start..i]),
            })?;
            out.push(Token { tok: Tok::Num(v), offset: start });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(src[start..i].to_string()), offset: start });
        } else if b"{}[]()=;,+-*".contains(&c) {
            out.push(Token { tok: Tok::Punct(c), offset: i });
            i += 1;
        } else {
            return Err(DslError::Syntax {
                offset: i,
                message: format!("unexpected character `{}`", c as char),
            });
        }
    }
    Ok(out)
}

fn zero_matrix() -> [[Expr; 4]; 4] {
    std::array::from_fn(|_| std::array::from_fn(|_| Expr::Const(0.0)))
}

/// Parses a geometry document.
pub fn parse_geometry(src: &str) -> Result<GeometryDocument, DslError> {
    let toks = lex(src)?;
    DocParser { toks, pos: 0, end: src.len() }.document()
}

struct DocParser {
    toks: Vec<Token>,
    pos: usize,
    end: usize,
}

enum Value {
    Expr(Expr),
    Num(f64),
}

impl DocParser {
    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.offset).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, DslError> {
        Err(DslError::Syntax { offset: self.offset(), message: message.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn is_punct(&self, c: u8) -> bool {
        self.peek() == Some(&Tok::Punct(c))
    }

    fn punct(&mut self, c: u8) -> Result<(), DslError> {
        if self.is_punct(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{}`", c as char))
        }
    }

    fn ident(&mut self) -> Result<(String, usize), DslError> {
        match self.toks.get(self.pos) {
            Some(Token { tok: Tok::Ident(s), offset }) => {
                let r = (s.clone(), *offset);
                self.pos += 1;
                Ok(r)
            }
            _ => self.err("expected a name"),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), DslError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected `{kw}`")),
        }
    }

    fn number(&mut self) -> Result<f64, DslError> {
        match self.peek() {
            Some(Tok::Num(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            _ => self.err("expected a number"),
        }
    }

    fn signed(&mut self) -> Result<f64, DslError> {
        if self.is_punct(b'-') {
            self.pos += 1;
            Ok(-self.number()?)
        } else {
            self.number()
        }
    }

    fn value(&mut self, table: &SymbolTable) -> Result<Value, DslError> {
        match self.toks.get(self.pos).cloned() {
            Some(Token { tok: Tok::Str(s), offset }) => {
                self.pos += 1;
                let e = parse_expression(&s, table).map_err(|e| e.shifted(offset))?;
                Ok(Value::Expr(e))
            }
            _ => Ok(Value::Num(self.signed()?)),
        }
    }

    fn value_expr(&mut self, table: &SymbolTable) -> Result<Expr, DslError> {
        Ok(match self.value(table)? {
            Value::Expr(e) => e,
            Value::Num(v) => Expr::cst(v),
        })
    }

    fn index(&mut self) -> Result<usize, DslError> {
        self.punct(b'[')?;
        let offset = self.offset();
        let v = self.number()?;
        if v.fract() != 0.0 || !(0.0..4.0).contains(&v) {
            return Err(DslError::Index { index: v.max(0.0) as usize, offset });
        }
        self.punct(b']')?;
        Ok(v as usize)
    }

    fn tuple(&mut self, table: &SymbolTable, what: &str) -> Result<[Expr; 4], DslError> {
        self.punct(b'(')?;
        let mut items = Vec::new();
        loop {
            items.push(self.value_expr(table)?);
            if self.is_punct(b',') {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.punct(b')')?;
        let found = items.len();
        items.try_into().map_err(|_| DslError::Dimension {
            what: what.to_string(),
            expected: 4,
            found,
        })
    }

    /// `[-] [c*] name { (+|-) [c*] name }`
    fn combo(&mut self) -> Result<Vec<(f64, String, usize)>, DslError> {
        let mut terms = Vec::new();
        let mut sign = 1.0;
        if self.is_punct(b'-') {
            self.pos += 1;
            sign = -1.0;
        }
        loop {
            let mut coeff = sign;
            if let Some(Tok::Num(_)) = self.peek() {
                coeff *= self.number()?;
                if self.is_punct(b'*') {
                    self.pos += 1;
                } else {
                    if coeff == 0.0 && self.is_punct(b';') && terms.is_empty() {
                        return Ok(terms);
                    }
                    return self.err("expected `*` after coefficient");
                }
            }
            let (name, offset) = self.ident()?;
            terms.push((coeff, name, offset));
            if self.is_punct(b'+') {
                sign = 1.0;
            } else if self.is_punct(b'-') {
                sign = -1.0;
            } else {
                return Ok(terms);
            }
            self.pos += 1;
        }
    }

    fn document(mut self) -> Result<GeometryDocument, DslError> {
        self.keyword("geometry")?;
        let name = match self.peek() {
            Some(Tok::Str(s)) => s.clone(),
            _ => return self.err("expected geometry name string"),
        };
        self.pos += 1;
        self.punct(b'{')?;

        self.keyword("backend")?;
        let (kw, _) = self.ident()?;
        let backend = match kw.as_str() {
            "coordinate" => Backend::Coordinate,
            "frame" => Backend::Frame,
            _ => return self.err("backend must be `coordinate` or `frame`"),
        };
        self.punct(b';')?;

        let basis_kw = match backend {
            Backend::Coordinate => "coords",
            Backend::Frame => "frame",
        };
        self.keyword(basis_kw)?;
        let mut names = Vec::new();
        while let Some(Tok::Ident(_)) = self.peek() {
            let (n, _) = self.ident()?;
            if names.contains(&n) {
                return Err(DslError::Duplicate { kind: "basis name", name: n });
            }
            names.push(n);
        }
        let found = names.len();
        let basis: [String; 4] = names.try_into().map_err(|_| DslError::Dimension {
            what: basis_kw.to_string(),
            expected: 4,
            found,
        })?;
        self.punct(b';')?;

        let mut doc = GeometryDocument {
            name,
            backend,
            basis: basis.clone(),
            domain: [DEFAULT_DOMAIN; 4],
            params: IndexMap::new(),
            metric: zero_matrix(),
            structure: [[[0.0; 4]; 4]; 4],
            fields: IndexMap::new(),
            forms: IndexMap::new(),
            two_forms: IndexMap::new(),
        };
        let mut table = SymbolTable {
            coords: match backend {
                Backend::Coordinate => basis.to_vec(),
                Backend::Frame => Vec::new(),
            },
            params: Vec::new(),
        };
        let mut seen_domain = [false; 4];
        let mut metric_seen = false;
        let mut bracket_seen = [[false; 4]; 4];

        while !self.is_punct(b'}') {
            let (kw, kw_offset) = self.ident()?;
            match kw.as_str() {
                "domain" => {
                    if backend == Backend::Frame {
                        return Err(DslError::WrongBackend { statement: "domain", backend: "frame" });
                    }
                    let (c, offset) = self.ident()?;
                    let i = basis
                        .iter()
                        .position(|b| *b == c)
                        .ok_or(DslError::UnknownName { name: c.clone(), offset })?;
                    if seen_domain[i] {
                        return Err(DslError::Duplicate { kind: "domain", name: c });
                    }
                    seen_domain[i] = true;
                    self.punct(b'(')?;
                    let lo = self.signed()?;
                    self.punct(b',')?;
                    let hi = self.signed()?;
                    self.punct(b')')?;
                    if lo >= hi {
                        return Err(DslError::Syntax {
                            offset,
                            message: format!("empty domain for `{c}`"),
                        });
                    }
                    doc.domain[i] = (lo, hi);
                }
                "param" => {
                    let (p, _) = self.ident()?;
                    if doc.params.contains_key(&p) || basis.contains(&p) {
                        return Err(DslError::Duplicate { kind: "parameter", name: p });
                    }
                    self.punct(b'=')?;
                    let value_table = SymbolTable { coords: Vec::new(), params: table.params.clone() };
                    let e = self.value_expr(&value_table)?;
                    table.params.push(p.clone());
                    doc.params.insert(p, e);
                }
                "metric" => {
                    if metric_seen {
                        return Err(DslError::Duplicate { kind: "metric", name: "metric".into() });
                    }
                    metric_seen = true;
                    if self.is_punct(b'{') {
                        self.pos += 1;
                        let mut set = [[false; 4]; 4];
                        while !self.is_punct(b'}') {
                            let i = self.index()?;
                            let j = self.index()?;
                            self.punct(b'=')?;
                            let e = self.value_expr(&table)?;
                            self.punct(b';')?;
                            if set[i][j] {
                                return Err(DslError::Duplicate {
                                    kind: "metric entry",
                                    name: format!("[{i}][{j}]"),
                                });
                            }
                            if set[j][i] && doc.metric[j][i] != e {
                                return Err(DslError::Asymmetric { i, j });
                            }
                            set[i][j] = true;
                            doc.metric[i][j] = e.clone();
                            doc.metric[j][i] = e;
                        }
                        self.pos += 1;
                    } else {
                        self.keyword("diag")?;
                        let d = self.tuple(&table, "metric diag")?;
                        for (i, e) in d.into_iter().enumerate() {
                            doc.metric[i][i] = e;
                        }
                    }
                }
                "bracket" => {
                    if backend == Backend::Coordinate {
                        return Err(DslError::WrongBackend {
                            statement: "bracket",
                            backend: "coordinate",
                        });
                    }
                    self.punct(b'[')?;
                    let (a, oa) = self.ident()?;
                    self.punct(b',')?;
                    let (b, ob) = self.ident()?;
                    self.punct(b']')?;
                    self.punct(b'=')?;
                    let i = basis
                        .iter()
                        .position(|n| *n == a)
                        .ok_or(DslError::UnknownName { name: a.clone(), offset: oa })?;
                    let j = basis
                        .iter()
                        .position(|n| *n == b)
                        .ok_or(DslError::UnknownName { name: b.clone(), offset: ob })?;
                    if i == j || bracket_seen[i][j] {
                        return Err(DslError::Duplicate {
                            kind: "bracket",
                            name: format!("[{a},{b}]"),
                        });
                    }
                    bracket_seen[i][j] = true;
                    bracket_seen[j][i] = true;
                    for (c, n, offset) in self.combo()? {
                        let k = basis
                            .iter()
                            .position(|m| *m == n)
                            .ok_or(DslError::UnknownName { name: n.clone(), offset })?;
                        doc.structure[i][j][k] += c;
                        doc.structure[j][i][k] -= c;
                    }
                }
                "field" => {
                    let (f, _) = self.ident()?;
                    if doc.fields.contains_key(&f) || basis.contains(&f) {
                        return Err(DslError::Duplicate { kind: "field", name: f });
                    }
                    self.punct(b'=')?;
                    let comps = if self.is_punct(b'(') {
                        self.tuple(&table, &format!("field {f}"))?
                    } else {
                        let mut acc: [Expr; 4] = std::array::from_fn(|_| Expr::Const(0.0));
                        for (c, n, offset) in self.combo()? {
                            let base: [Expr; 4] = if let Some(k) =
                                basis.iter().position(|m| *m == n).filter(|_| backend == Backend::Frame)
                            {
                                std::array::from_fn(|i| Expr::cst(if i == k { 1.0 } else { 0.0 }))
                            } else if let Some(v) = doc.fields.get(&n) {
                                v.clone()
                            } else {
                                return Err(DslError::UnknownName { name: n, offset });
                            };
                            for (a, b) in acc.iter_mut().zip(base) {
                                let scaled = if backend == Backend::Frame {
                                    match b.as_constant() {
                                        Some(v) => Expr::cst(c * v),
                                        None => Expr::mul(Expr::cst(c), b),
                                    }
                                } else {
                                    Expr::mul(Expr::cst(c), b)
                                };
                                let sum = std::mem::replace(a, Expr::Const(0.0));
                                *a = match (sum.as_constant(), scaled.as_constant()) {
                                    (Some(x), Some(y)) if backend == Backend::Frame => Expr::cst(x + y),
                                    _ => Expr::add(sum, scaled),
                                };
                            }
                        }
                        acc
                    };
                    doc.fields.insert(f, comps);
                }
                "form" => {
                    let (f, _) = self.ident()?;
                    if doc.forms.contains_key(&f) || doc.two_forms.contains_key(&f) {
                        return Err(DslError::Duplicate { kind: "form", name: f });
                    }
                    self.punct(b'=')?;
                    let comps = self.tuple(&table, &format!("form {f}"))?;
                    doc.forms.insert(f, comps);
                }
                "form2" => {
                    let (f, _) = self.ident()?;
                    if doc.forms.contains_key(&f) || doc.two_forms.contains_key(&f) {
                        return Err(DslError::Duplicate { kind: "form", name: f });
                    }
                    self.punct(b'{')?;
                    let mut m = zero_matrix();
                    let mut set = [[false; 4]; 4];
                    while !self.is_punct(b'}') {
                        let offset = self.offset();
                        let i = self.index()?;
                        let j = self.index()?;
                        if i == j {
                            return Err(DslError::Index { index: i, offset });
                        }
                        self.punct(b'=')?;
                        let e = self.value_expr(&table)?;
                        self.punct(b';')?;
                        if set[i][j] {
                            return Err(DslError::Duplicate {
                                kind: "form entry",
                                name: format!("{f}[{i}][{j}]"),
                            });
                        }
                        let neg = Expr::neg(e.clone());
                        if set[j][i] && m[i][j] != e {
                            return Err(DslError::NotAntisymmetric { name: f, i, j });
                        }
                        set[i][j] = true;
                        set[j][i] = true;
                        m[i][j] = e;
                        m[j][i] = neg;
                    }
                    self.pos += 1;
                    doc.two_forms.insert(f, m);
                }
                other => {
                    return Err(DslError::Syntax {
                        offset: kw_offset,
                        message: format!("unknown statement `{other}`"),
                    })
                }
            }
            self.punct(b';')?;
        }
        self.pos += 1;
        if self.pos < self.toks.len() {
            return self.err("trailing input after geometry block");
        }
        if !metric_seen {
            return Err(DslError::Missing("metric"));
        }
        Ok(doc)
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v:?}")
}

impl GeometryDocument {
    pub fn coordinate_names(&self) -> [String; 4] {
        self.basis.clone()
    }

    /// Canonical DSL text; parsing it reproduces this document.
    pub fn to_dsl(&self) -> String {
        let names = &self.basis;
        let q = |e: &Expr| format!("\"{}\"", e.render(names));
        let mut s = String::new();
        let _ = writeln!(s, "geometry \"{}\" {{", self.name);
        let _ = writeln!(s, "  backend {};", self.backend.keyword());
        match self.backend {
            Backend::Coordinate => {
                let _ = writeln!(s, "  coords {};", names.join(" "));
                for (n, (lo, hi)) in names.iter().zip(self.domain) {
                    let _ = writeln!(s, "  domain {n} ({}, {});", fmt_num(lo), fmt_num(hi));
                }
            }
            Backend::Frame => {
                let _ = writeln!(s, "  frame {};", names.join(" "));
            }
        }
        for (p, e) in &self.params {
            match e.as_constant() {
                Some(c) => {
                    let _ = writeln!(s, "  param {p} = {};", fmt_num(c));
                }
                None => {
                    let _ = writeln!(s, "  param {p} = {};", q(e));
                }
            }
        }
        let _ = writeln!(s, "  metric {{");
        for i in 0..4 {
            for j in i..4 {
                if !self.metric[i][j].is_zero() {
                    let _ = writeln!(s, "    [{i}][{j}] = {};", q(&self.metric[i][j]));
                }
            }
        }
        let _ = writeln!(s, "  }};");
        if self.backend == Backend::Frame {
            for i in 0..4 {
                for j in (i + 1)..4 {
                    let c = self.structure[i][j];
                    if c.iter().all(|v| *v == 0.0) {
                        continue;
                    }
                    let mut rhs = String::new();
                    for (k, v) in c.iter().enumerate() {
                        if *v == 0.0 {
                            continue;
                        }
                        let mag = v.abs();
                        let term = if mag == 1.0 {
                            names[k].clone()
                        } else {
                            format!("{}*{}", fmt_num(mag), names[k])
                        };
                        if rhs.is_empty() {
                            rhs = if *v < 0.0 { format!("-{term}") } else { term };
                        } else {
                            let _ = write!(rhs, " {} {term}", if *v < 0.0 { '-' } else { '+' });
                        }
                    }
                    let _ = writeln!(s, "  bracket [{},{}] = {rhs};", names[i], names[j]);
                }
            }
        }
        for (f, c) in &self.fields {
            let parts: Vec<String> = c.iter().map(q).collect();
            let _ = writeln!(s, "  field {f} = ({});", parts.join(", "));
        }
        for (f, c) in &self.forms {
            let parts: Vec<String> = c.iter().map(q).collect();
            let _ = writeln!(s, "  form {f} = ({});", parts.join(", "));
        }
        for (f, m) in &self.two_forms {
            let _ = writeln!(s, "  form2 {f} {{");
            for i in 0..4 {
                for j in (i + 1)..4 {
                    if !m[i][j].is_zero() {
                        let _ = writeln!(s, "    [{i}][{j}] = {};", q(&m[i][j]));
                    }
                }
            }
            let _ = writeln!(s, "  }};");
        }
        s.push_str("}\n");
        s
    }

    /// Every expression in the document, labelled.
    pub fn expressions(&self) -> Vec<(String, &Expr)> {
        let mut out = Vec::new();
        for (p, e) in &self.params {
            out.push((format!("param {p}"), e));
        }
        for i in 0..4 {
            for j in i..4 {
                out.push((format!("metric[{i}][{j}]"), &self.metric[i][j]));
            }
        }
        for (f, c) in &self.fields {
            for (i, e) in c.iter().enumerate() {
                out.push((format!("field {f}[{i}]"), e));
            }
        }
        for (f, c) in &self.forms {
            for (i, e) in c.iter().enumerate() {
                out.push((format!("form {f}[{i}]"), e));
            }
        }
        for (f, m) in &self.two_forms {
            for i in 0..4 {
                for j in (i + 1)..4 {
                    out.push((format!("form2 {f}[{i}][{j}]"), &m[i][j]));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FLAT: &str = r#"
        geometry "flat" {
          backend coordinate;
          coords x y u v;
          metric diag(1, 1, -1, -1);
          field X = ("1", 0, 1, 0);
        }"#;

    #[test]
    fn flat_metric_is_diagonal() {
        let d = parse_geometry(FLAT).unwrap();
        assert_eq!(d.metric[0][0], Expr::Const(1.0));
        assert_eq!(d.metric[2][2], Expr::cst(-1.0));
        assert!(d.metric[0][1].is_zero());
        assert_eq!(d.domain[3], DEFAULT_DOMAIN);
    }

    #[test]
    fn asymmetric_metric_rejected() {
        let src = r#"geometry "g" { backend coordinate; coords x y u v;
            metric { [0][1] = "x"; [1][0] = "y"; }; }"#;
        assert_eq!(parse_geometry(src).unwrap_err(), DslError::Asymmetric { i: 1, j: 0 });
    }

    #[test]
    fn field_arity_checked() {
        let src = r#"geometry "g" { backend coordinate; coords x y u v;
            metric diag(1,1,-1,-1); field K = ("1", "0", "0"); }"#;
        assert!(matches!(parse_geometry(src), Err(DslError::Dimension { found: 3, .. })));
    }

    #[test]
    fn duplicate_names_rejected() {
        let src = r#"geometry "g" { backend coordinate; coords x y u v;
            metric diag(1,1,-1,-1); field K = (1,0,0,0); field K = (0,1,0,0); }"#;
        assert!(matches!(parse_geometry(src), Err(DslError::Duplicate { .. })));
        let src = r#"geometry "g" { backend coordinate; coords x y x v; metric diag(1,1,-1,-1); }"#;
        assert!(matches!(parse_geometry(src), Err(DslError::Duplicate { .. })));
    }

    #[test]
    fn unknown_symbol_offset_is_absolute() {
        let src = r#"geometry "g" { backend coordinate; coords x y u v; metric { [0][0] = "q"; }; }"#;
        let err = parse_geometry(src).unwrap_err();
        let at = src.find("\"q\"").unwrap() + 1;
        assert_eq!(
            err,
            DslError::Expr(ExprError::UnknownSymbol { name: "q".into(), offset: at })
        );
    }

    #[test]
    fn frame_brackets_and_combos() {
        let src = r#"geometry "h" { backend frame; frame X1 X2 X3 X4;
            bracket [X2,X3] = X4; bracket [X3,X4] = X2; bracket [X4,X2] = X3;
            metric diag(1, 1, -1, -1);
            field X = X1 + X3; field W = 2*X - 0.5*X2; }"#;
        let d = parse_geometry(src).unwrap();
        assert_eq!(d.structure[1][2][3], 1.0);
        assert_eq!(d.structure[2][1][3], -1.0);
        assert_eq!(d.structure[1][3][2], -1.0);
        let w: Vec<f64> = d.fields["W"].iter().map(|e| e.as_constant().unwrap()).collect();
        assert_eq!(w, vec![2.0, -0.5, 2.0, 0.0]);
        let again = parse_geometry(&d.to_dsl()).unwrap();
        assert_eq!(again, d);
    }

    #[test]
    fn canonical_text_round_trips() {
        let src = r#"geometry "p" { backend coordinate; coords x y u v;
            domain v (0.1, 10);
            param t2 = 0; param alpha = "(3 + sqrt(5))/2"; param eps = -1;
            metric { [0][0] = "2 + cos(x)"; [0][2] = 1; [1][1] = "2 + cos(x)"; [1][3] = "1"; };
            field K = ("0", "0", "1", "0");
            field L = 2*K;
            form a = ("1/v", "-y*log(v)/log(alpha)", 0, "x^-2");
            form2 w { [0][1] = "x"; [2][3] = "-1"; }; }"#;
        let d = parse_geometry(src).unwrap();
        let text = d.to_dsl();
        assert_eq!(parse_geometry(&text).unwrap(), d);
        assert_eq!(parse_geometry(&text).unwrap().to_dsl(), text);
    }

    #[test]
    fn backend_specific_statements() {
        let src = r#"geometry "g" { backend frame; frame A B C D; domain A (0, 1); metric diag(1,1,-1,-1); }"#;
        assert!(matches!(parse_geometry(src), Err(DslError::WrongBackend { .. })));
        let src = r#"geometry "g" { backend frame; frame A B C D; metric diag(1,1,-1,-1); field Q = ("x",0,0,0); }"#;
        assert!(matches!(parse_geometry(src), Err(DslError::Expr(ExprError::UnknownSymbol { .. }))));
    }
}
