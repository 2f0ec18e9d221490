use crate::ast::{BinOp, Expr, Func, Var};
use crate::error::EvalError;

/// Values for the free variables; unbound ones are `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bindings {
    pub t: Option<f64>,
    pub i: Option<f64>,
}

impl Bindings {
    pub fn t(t: f64) -> Self {
        Bindings {
            t: Some(t),
            i: None,
        }
    }

    pub fn ti(i: f64, t: f64) -> Self {
        Bindings {
            t: Some(t),
            i: Some(i),
        }
    }
}

fn domain(what: impl Into<String>) -> EvalError {
    EvalError::Domain(what.into())
}

fn finite(v: f64, what: &str) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(format!("{what} is not finite")))
    }
}

impl Expr {
    pub fn eval(&self, b: &Bindings) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Const(c) => Ok(c.value()),
            Expr::Var(Var::T) => b.t.ok_or(EvalError::UnboundVariable("t")),
            Expr::Var(Var::I) => b.i.ok_or(EvalError::UnboundVariable("i")),
            Expr::Neg(e) => Ok(-e.eval(b)?),
            Expr::Call { func, arg } => {
                let x = arg.eval(b)?;
                match func {
                    Func::Sin => Ok(x.sin()),
                    Func::Cos => Ok(x.cos()),
                    Func::Tan => finite(x.tan(), "tan"),
                    Func::Exp => finite(x.exp(), "exp"),
                    Func::Abs => Ok(x.abs()),
                    Func::Floor => Ok(x.floor()),
                    Func::Log if x <= 0.0 => Err(domain(format!("log of non-positive value {x}"))),
                    Func::Log => Ok(x.ln()),
                    Func::Sqrt if x < 0.0 => Err(domain(format!("sqrt of negative value {x}"))),
                    Func::Sqrt => Ok(x.sqrt()),
                }
            }
            Expr::Binary { op, lhs, rhs } => {
                let (x, y) = (lhs.eval(b)?, rhs.eval(b)?);
                match op {
                    BinOp::Add => finite(x + y, "sum"),
                    BinOp::Sub => finite(x - y, "difference"),
                    BinOp::Mul => finite(x * y, "product"),
                    BinOp::Div if y == 0.0 => Err(domain("division by zero")),
                    BinOp::Div => finite(x / y, "quotient"),
                    BinOp::Pow if x == 0.0 && y < 0.0 => {
                        Err(domain("zero raised to a negative power"))
                    }
                    BinOp::Pow => {
                        let v = x.powf(y);
                        if v.is_nan() {
                            Err(domain(format!("{x}^{y} is not real")))
                        } else {
                            finite(v, "power")
                        }
                    }
                }
            }
        }
    }

    /// Evaluates with only `t` bound.
    pub fn eval_t(&self, t: f64) -> Result<f64, EvalError> {
        self.eval(&Bindings::t(t))
    }

    /// Evaluates with `i` and `t` bound.
    pub fn eval_it(&self, i: f64, t: f64) -> Result<f64, EvalError> {
        self.eval(&Bindings::ti(i, t))
    }

    /// Evaluates a closed expression such as `2*pi`.
    pub fn eval_const(&self) -> Result<f64, EvalError> {
        self.eval(&Bindings::default())
    }
}
