//! A small expression language for coefficient functions.
//!
//! ```
//! let e = drift_ode_expr::parse("2^(-i)*(1+sin(t)^2)").unwrap();
//! let v = e.eval_it(3.0, std::f64::consts::FRAC_PI_2).unwrap();
//! assert!((v - 0.25).abs() < 1e-15);
//! ```
//!
//! Variables are `t` and `i`, constants `pi` and `e`, functions
//! `sin cos tan exp log abs sqrt floor`. `^` is right-associative and binds
//! tighter than unary minus, so `-2^2` is `-4`. There is no implicit
//! multiplication.

mod ast;
mod error;
mod eval;
mod lexer;
mod parser;

pub use ast::{BinOp, Constant, Expr, Func, Var};
pub use error::{EvalError, ParseError};
pub use eval::Bindings;
pub use parser::parse;
