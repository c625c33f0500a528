//! Symbolic differentiation. Results are raw trees; callers that want
//! compact forms run `simplify` afterwards.

use super::{BinOp, Expr, Func};

fn c(v: f64) -> Expr {
    Expr::Const(v)
}

/// d/d`var` of `e`. Integrals differentiate by the Leibniz rule, including
/// the (usually vanishing) parameter term when the integrand itself mentions
/// `var`. `abs` differentiates to u'·|u|/u, whose division by zero at u = 0
/// surfaces as an evaluation-time domain error, which is the intended
/// semantics for the kink point.
pub fn differentiate(e: &Expr, var: &str) -> Expr {
    match e {
        Expr::Const(_) => c(0.0),
        Expr::Var(v) => {
            if v == var {
                c(1.0)
            } else {
                c(0.0)
            }
        }
        Expr::Neg(u) => differentiate(u, var).neg(),
        Expr::Bin(op, a, b) => {
            let (a, b) = (a.as_ref(), b.as_ref());
            let (da, db) = (differentiate(a, var), differentiate(b, var));
            match op {
                BinOp::Add => da + db,
                BinOp::Sub => da - db,
                BinOp::Mul => da * b.clone() + a.clone() * db,
                BinOp::Div => {
                    (da * b.clone() - a.clone() * db) / b.clone().powi(2)
                }
                BinOp::Pow => match b {
                    Expr::Const(n) => {
                        // n·a^(n-1)·a'
                        c(*n) * a.clone().pow(c(n - 1.0)) * da
                    }
                    _ => {
                        // a^b · (b'·log a + b·a'/a)
                        a.clone().pow(b.clone())
                            * (db * a.clone().log() + b.clone() * da / a.clone())
                    }
                },
            }
        }
        Expr::Call(f, u) => {
            let du = differentiate(u, var);
            let u = u.as_ref().clone();
            match f {
                Func::Exp => u.exp() * du,
                Func::Log => du / u,
                Func::Sin => u.cos() * du,
                Func::Cos => u.sin().neg() * du,
                Func::Tan => u.sec().powi(2) * du,
                Func::Sec => u.clone().sec() * Expr::call(Func::Tan, u) * du,
                Func::Sqrt => du / (c(2.0) * u.sqrt()),
                Func::Abs => du * (u.clone().abs() / u),
                Func::Erf => {
                    c(2.0 / std::f64::consts::PI.sqrt()) * (u.powi(2).neg()).exp() * du
                }
            }
        }
        Expr::Integral {
            integrand,
            var: bv,
            lo,
            hi,
        } => {
            let dhi = differentiate(hi, var);
            let dlo = differentiate(lo, var);
            let upper = integrand.subst(bv, hi) * dhi;
            let lower = integrand.subst(bv, lo) * dlo;
            let boundary = upper - lower;
            if bv == var {
                // `var` is shadowed inside the integrand; only the boundary
                // terms survive.
                return boundary;
            }
            let param = Expr::Integral {
                integrand: Box::new(differentiate(integrand, var)),
                var: bv.clone(),
                lo: lo.clone(),
                hi: hi.clone(),
            };
            boundary + param
        }
    }
}
