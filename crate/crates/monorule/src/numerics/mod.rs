//! Numeric kernels: expression evaluation, adaptive quadrature, bracketed
//! root-finding, one-sided limits, and monotone segmentation.

use serde::{Deserialize, Serialize};

use crate::expr::{BinOp, Expr, Func};

mod erf;
mod limits;
mod quad;
mod root;
mod segment;

pub use erf::erf;
pub use limits::{limit_at, LimitMethod, LimitOutcome, LimitPoint, LimitValue, Side};
pub use quad::integrate;
pub use root::{find_root, RootResult};
pub use segment::{segment_monotone, Direction, MonotoneSegment, Segmentation};

/// Tolerances and discretization knobs shared by every numeric routine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NumericConfig {
    /// Relative tolerance for adaptive quadrature.
    pub quad_tol: f64,
    /// Bracket-width tolerance for root finding: width <= root_tol·(1+|root|).
    pub root_tol: f64,
    /// Rungs in an extrapolation ladder for limits.
    pub limit_steps: usize,
    /// Sample count for scans and segmentation grids.
    pub grid_n: usize,
    /// Working right endpoint substituted for b = +inf.
    pub infinity_cap: f64,
    /// Relative inset applied at interval endpoints for open-interval scans.
    pub endpoint_eps: f64,
    /// Relative margin below which a boundary comparison counts as a tie.
    pub margin: f64,
}

impl Default for NumericConfig {
    fn default() -> Self {
        NumericConfig {
            quad_tol: 1e-12,
            root_tol: 1e-12,
            limit_steps: 8,
            grid_n: 2048,
            infinity_cap: 40.0,
            endpoint_eps: 1e-9,
            margin: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumError {
    #[error("domain error: {what} at {x}")]
    Domain { what: String, x: f64 },
    #[error("non-finite value: {what} at {x}")]
    NonFinite { what: String, x: f64 },
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("iteration limit exceeded: {0}")]
    MaxIterations(String),
    #[error("unknown variable `{0}`")]
    UnknownVar(String),
}

/// Evaluates `e` with the analysis variable `var` set to `x`.
///
/// Domain violations (log of a non-positive value, division by zero, negative
/// base with fractional exponent, ...) and non-finite intermediates are
/// errors; underflow to zero is not. Integral nodes evaluate by adaptive
/// Gauss–Kronrod quadrature with the bound variable pushed onto the scope.
pub fn evaluate(e: &Expr, var: &str, x: f64, cfg: &NumericConfig) -> Result<f64, NumError> {
    let mut env = vec![(var.to_string(), x)];
    eval_env(e, &mut env, cfg)
}

fn eval_env(
    e: &Expr,
    env: &mut Vec<(String, f64)>,
    cfg: &NumericConfig,
) -> Result<f64, NumError> {
    match e {
        Expr::Const(v) => Ok(*v),
        Expr::Var(name) => env
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
            .ok_or_else(|| NumError::UnknownVar(name.clone())),
        Expr::Neg(u) => Ok(-eval_env(u, env, cfg)?),
        Expr::Bin(op, a, b) => {
            let x = eval_env(a, env, cfg)?;
            let y = eval_env(b, env, cfg)?;
            let v = match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == 0.0 {
                        return Err(NumError::Domain {
                            what: "division by zero".into(),
                            x,
                        });
                    }
                    x / y
                }
                BinOp::Pow => {
                    if x < 0.0 && y.fract() != 0.0 {
                        return Err(NumError::Domain {
                            what: "fractional power of a negative base".into(),
                            x,
                        });
                    }
                    if x == 0.0 && y < 0.0 {
                        return Err(NumError::Domain {
                            what: "negative power of zero".into(),
                            x,
                        });
                    }
                    x.powf(y)
                }
            };
            finite(v, "arithmetic overflow", x)
        }
        Expr::Call(f, u) => {
            let a = eval_env(u, env, cfg)?;
            let v = match f {
                Func::Exp => a.exp(),
                Func::Log => {
                    if a <= 0.0 {
                        return Err(NumError::Domain {
                            what: "log of a non-positive value".into(),
                            x: a,
                        });
                    }
                    a.ln()
                }
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tan => a.tan(),
                Func::Sec => {
                    let c = a.cos();
                    if c == 0.0 {
                        return Err(NumError::Domain {
                            what: "sec at a pole".into(),
                            x: a,
                        });
                    }
                    1.0 / c
                }
                Func::Sqrt => {
                    if a < 0.0 {
                        return Err(NumError::Domain {
                            what: "sqrt of a negative value".into(),
                            x: a,
                        });
                    }
                    a.sqrt()
                }
                Func::Abs => a.abs(),
                Func::Erf => erf::erf(a),
            };
            finite(v, f.name(), a)
        }
        Expr::Integral {
            integrand,
            var,
            lo,
            hi,
        } => {
            let lo_v = eval_env(lo, env, cfg)?;
            let hi_v = eval_env(hi, env, cfg)?;
            env.push((var.clone(), 0.0));
            let idx = env.len() - 1;
            let result = {
                let integrand = integrand.as_ref();
                // Re-borrow the env per call; quadrature drives t.
                let mut env_cell = std::mem::take(env);
                let out = integrate(
                    |t| {
                        env_cell[idx].1 = t;
                        eval_env(integrand, &mut env_cell, cfg)
                    },
                    lo_v,
                    hi_v,
                    cfg,
                );
                *env = env_cell;
                out
            };
            env.pop();
            result
        }
    }
}

fn finite(v: f64, what: &str, x: f64) -> Result<f64, NumError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(NumError::NonFinite {
            what: what.into(),
            x,
        })
    }
}
