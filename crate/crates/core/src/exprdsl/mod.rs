//! Scalar expressions, exact jets and the geometry-definition language.

pub mod document;
pub mod expr;
pub mod jet;
pub mod parse;

pub use document::{parse_geometry, Backend, DslError, GeometryDocument, Structure};
pub use expr::{BinaryOp, Env, EvalError, Expr, Params, UnaryOp};
pub use jet::{FirstOrder, Jet1, Jet2, Scalar};
pub use parse::{parse_expression, ExprError, SymbolTable};

/// Value, gradient and hessian of `expr` at `point`.
pub fn evaluate_jet2(expr: &Expr, point: &[f64; 4], env: &Env) -> Result<Jet2, EvalError> {
    expr.eval(&Jet2::seed(point), env)
}
