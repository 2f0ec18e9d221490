use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    I,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::I => "i",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn name(self) -> &'static str {
        match self {
            Constant::Pi => "pi",
            Constant::E => "e",
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Abs,
    Sqrt,
    Floor,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Abs,
        Func::Sqrt,
        Func::Floor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Floor => "floor",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Binding power of unary minus; its operand is parsed at this level.
pub(crate) const PREFIX_BP: u8 = 5;

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    /// `(left, right)` binding powers; `^` binds right.
    pub(crate) fn binding_power(self) -> (u8, u8) {
        match self {
            BinOp::Add | BinOp::Sub => (1, 2),
            BinOp::Mul | BinOp::Div => (3, 4),
            BinOp::Pow => (6, 5),
        }
    }
}

/// Expression tree. Literals produced by the parser are finite and non-negative.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Const(Constant),
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call {
        func: Func,
        arg: Box<Expr>,
    },
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        Expr::Call {
            func,
            arg: Box::new(arg),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    /// True if `v` occurs anywhere in the tree.
    pub fn uses(&self, v: Var) -> bool {
        match self {
            Expr::Var(w) => *w == v,
            Expr::Num(_) | Expr::Const(_) => false,
            Expr::Neg(e) | Expr::Call { arg: e, .. } => e.uses(v),
            Expr::Binary { lhs, rhs, .. } => lhs.uses(v) || rhs.uses(v),
        }
    }

    /// Indented tree dump, one node per line.
    pub fn tree(&self) -> String {
        let mut out = String::new();
        self.dump(0, &mut out);
        out
    }

    fn dump(&self, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        match self {
            Expr::Num(v) => out.push_str(&format!("{pad}num {v}\n")),
            Expr::Var(v) => out.push_str(&format!("{pad}var {}\n", v.name())),
            Expr::Const(c) => out.push_str(&format!("{pad}const {}\n", c.name())),
            Expr::Neg(e) => {
                out.push_str(&format!("{pad}neg\n"));
                e.dump(depth + 1, out);
            }
            Expr::Binary { op, lhs, rhs } => {
                let name = match op {
                    BinOp::Add => "add",
                    BinOp::Sub => "sub",
                    BinOp::Mul => "mul",
                    BinOp::Div => "div",
                    BinOp::Pow => "pow",
                };
                out.push_str(&format!("{pad}{name}\n"));
                lhs.dump(depth + 1, out);
                rhs.dump(depth + 1, out);
            }
            Expr::Call { func, arg } => {
                out.push_str(&format!("{pad}call {}\n", func.name()));
                arg.dump(depth + 1, out);
            }
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Prints with the fewest parentheses that reparse to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Const(c) => f.write_str(c.name()),
            Expr::Neg(e) => {
                f.write_str("-")?;
                let parens =
                    matches!(**e, Expr::Binary { op, .. } if op.binding_power().0 < PREFIX_BP);
                write_child(f, e, parens)
            }
            Expr::Call { func, arg } => write!(f, "{}({arg})", func.name()),
            Expr::Binary { op, lhs, rhs } => {
                let (l, r) = op.binding_power();
                let left_parens = match **lhs {
                    Expr::Binary { op: inner, .. } => l >= inner.binding_power().1,
                    Expr::Neg(_) => l >= PREFIX_BP,
                    _ => false,
                };
                let right_parens = match **rhs {
                    Expr::Binary { op: inner, .. } => inner.binding_power().0 < r,
                    _ => false,
                };
                write_child(f, lhs, left_parens)?;
                write!(f, "{}", op.symbol())?;
                write_child(f, rhs, right_parens)
            }
        }
    }
}
