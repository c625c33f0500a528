//! Expression trees for the analysis language: arithmetic, a fixed set of
//! unary functions, and definite integrals with a bound variable.

use std::collections::BTreeSet;
use std::fmt;

mod deriv;
mod parser;
mod simplify;

pub use deriv::differentiate;
pub use parser::{parse, ParseError, ParseErrorKind};
pub use simplify::simplify;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    Integral {
        integrand: Box<Expr>,
        var: String,
        lo: Box<Expr>,
        hi: Box<Expr>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sec,
    Sqrt,
    Abs,
    Erf,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sec => "sec",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Erf => "erf",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sec" => Func::Sec,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "erf" => Func::Erf,
            _ => return None,
        })
    }
}

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }

    pub fn pow(self, e: Expr) -> Expr {
        Expr::bin(BinOp::Pow, self, e)
    }

    pub fn powi(self, n: i32) -> Expr {
        self.pow(Expr::Const(n as f64))
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn exp(self) -> Expr {
        Expr::call(Func::Exp, self)
    }

    pub fn log(self) -> Expr {
        Expr::call(Func::Log, self)
    }

    pub fn sin(self) -> Expr {
        Expr::call(Func::Sin, self)
    }

    pub fn cos(self) -> Expr {
        Expr::call(Func::Cos, self)
    }

    pub fn sec(self) -> Expr {
        Expr::call(Func::Sec, self)
    }

    pub fn sqrt(self) -> Expr {
        Expr::call(Func::Sqrt, self)
    }

    pub fn abs(self) -> Expr {
        Expr::call(Func::Abs, self)
    }

    pub fn integral(integrand: Expr, var: impl Into<String>, lo: Expr, hi: Expr) -> Expr {
        Expr::Integral {
            integrand: Box::new(integrand),
            var: var.into(),
            lo: Box::new(lo),
            hi: Box::new(hi),
        }
    }

    /// Free (analysis) variables: every `Var` not bound by an enclosing integral.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }

    /// Capture-aware substitution of the free variable `var` by `repl`.
    pub fn subst(&self, var: &str, repl: &Expr) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(v) => {
                if v == var {
                    repl.clone()
                } else {
                    self.clone()
                }
            }
            Expr::Neg(u) => Expr::Neg(Box::new(u.subst(var, repl))),
            Expr::Bin(op, a, b) => {
                Expr::bin(*op, a.subst(var, repl), b.subst(var, repl))
            }
            Expr::Call(f, u) => Expr::call(*f, u.subst(var, repl)),
            Expr::Integral {
                integrand,
                var: bv,
                lo,
                hi,
            } => {
                // The bound variable shadows `var` inside the integrand.
                let inner = if bv == var {
                    integrand.as_ref().clone()
                } else {
                    integrand.subst(var, repl)
                };
                Expr::Integral {
                    integrand: Box::new(inner),
                    var: bv.clone(),
                    lo: Box::new(lo.subst(var, repl)),
                    hi: Box::new(hi.subst(var, repl)),
                }
            }
        }
    }
}

fn collect_free(e: &Expr, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match e {
        Expr::Const(_) => {}
        Expr::Var(v) => {
            if !bound.iter().any(|b| b == v) {
                out.insert(v.clone());
            }
        }
        Expr::Neg(u) => collect_free(u, bound, out),
        Expr::Bin(_, a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        Expr::Call(_, u) => collect_free(u, bound, out),
        Expr::Integral {
            integrand,
            var,
            lo,
            hi,
        } => {
            bound.push(var.clone());
            collect_free(integrand, bound, out);
            bound.pop();
            collect_free(lo, bound, out);
            collect_free(hi, bound, out);
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Add, self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Sub, self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Mul, self, rhs)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Div, self, rhs)
    }
}

// Rendering. Precedence levels: Add/Sub = 1, Mul/Div = 2, Neg = 3, Pow = 4.
// `a - b - c` re-parses left-associated, `a^b^c` right-associated, so a child
// on the associative side prints bare and the other side gets parentheses.

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Bin(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

fn fmt_child(e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{v}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(u) => {
                write!(f, "-")?;
                fmt_child(u, 3, f)
            }
            Expr::Bin(op, a, b) => {
                let (sym, p) = match op {
                    BinOp::Add => (" + ", 1),
                    BinOp::Sub => (" - ", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                    BinOp::Pow => ("^", 4),
                };
                if *op == BinOp::Pow {
                    // Right-associative: bare on the right, parens on the left.
                    fmt_child(a, p + 1, f)?;
                    write!(f, "{sym}")?;
                    fmt_child(b, p, f)
                } else {
                    fmt_child(a, p, f)?;
                    write!(f, "{sym}")?;
                    fmt_child(b, p + 1, f)
                }
            }
            Expr::Call(func, u) => write!(f, "{}({u})", func.name()),
            Expr::Integral {
                integrand,
                var,
                lo,
                hi,
            } => write!(f, "int({integrand}, {var}, {lo}, {hi})"),
        }
    }
}

/// Renders to the same surface syntax `parse` accepts.
pub fn render(e: &Expr) -> String {
    e.to_string()
}
