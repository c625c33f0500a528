//! Shape classification of f/g from the behaviour of f'/g'.
//!
//! The rule engine: hypothesis checks (signs of g and g', monotone
//! segmentation of the Hôpital derivative), endpoint comparisons with
//! margin-aware tie handling, the corollary dispatch that yields a
//! `ShapeClass` with a certificate, oscillation bounds, and the reflection
//! map for decreasing denominators.

use serde::Serialize;

use crate::expr::{differentiate, simplify, Expr};
use crate::numerics::{Direction, MonotoneSegment, NumError, NumericConfig};

mod analysis;
mod boundary;
mod classify;
mod hypotheses;
mod oscillation;

pub use analysis::{analyze, AnalysisOutcome, AnalysisReport};
pub use boundary::{boundary_criterion, BoundaryCriterion, Ordering3, WhichEnd};
pub use classify::{classify, Classification};
pub use hypotheses::check_hypotheses;
pub use oscillation::{
    corollary3_extremum, corollary4_certify, corollary5_certify, oscillation_bound, reflect,
    CertifyStatus, CorollaryCertification, ExtremumKind, ExtremumReport, OscillationProfile,
};

/// Right interval end: finite or +infinity (truncated at `cfg.infinity_cap`
/// for sampling; endpoint data at infinity comes from tail limits).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Finite(f64),
    PosInf,
}

impl Serialize for Bound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Bound::Finite(v) => s.serialize_f64(*v),
            Bound::PosInf => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum ProblemError {
    #[error("interval is empty: a = {a} must be less than b = {b}")]
    EmptyInterval { a: f64, b: f64 },
    #[error("expressions use more than one free variable: {0:?}")]
    MultipleVariables(Vec<String>),
}

/// A quotient-analysis problem: the pair (f, g) on [a, b].
#[derive(Debug, Clone, Serialize)]
pub struct RatioProblem {
    #[serde(serialize_with = "ser_expr")]
    pub f: Expr,
    #[serde(serialize_with = "ser_expr")]
    pub g: Expr,
    pub var: String,
    pub a: f64,
    pub b: Bound,
    pub open_left: bool,
    pub open_right: bool,
    #[serde(skip)]
    pub cfg: NumericConfig,
}

fn ser_expr<S: serde::Serializer>(e: &Expr, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&e.to_string())
}

impl RatioProblem {
    pub fn new(f: Expr, g: Expr, a: f64, b: Bound) -> Result<Self, ProblemError> {
        if let Bound::Finite(bv) = b {
            if !(a < bv) {
                return Err(ProblemError::EmptyInterval { a, b: bv });
            }
        }
        let mut vars = f.free_vars();
        vars.extend(g.free_vars());
        if vars.len() > 1 {
            return Err(ProblemError::MultipleVariables(vars.into_iter().collect()));
        }
        let var = vars.into_iter().next().unwrap_or_else(|| "x".to_string());
        Ok(RatioProblem {
            f,
            g,
            var,
            a,
            b,
            open_left: false,
            open_right: false,
            cfg: NumericConfig::default(),
        })
    }

    pub fn with_cfg(mut self, cfg: NumericConfig) -> Self {
        self.cfg = cfg;
        self
    }

    pub fn with_open(mut self, left: bool, right: bool) -> Self {
        self.open_left = left;
        self.open_right = right;
        self
    }

    /// Working right endpoint (the truncation cap stands in for +inf).
    pub fn effective_hi(&self) -> f64 {
        match self.b {
            Bound::Finite(v) => v,
            Bound::PosInf => self.cfg.infinity_cap.max(self.a + 1.0),
        }
    }

    pub fn span(&self) -> f64 {
        self.effective_hi() - self.a
    }

    /// Interval used for grid scans: endpoints pulled in by
    /// `endpoint_eps`-relative insets so open ends and 0/0 points stay out.
    pub fn scan_interval(&self) -> (f64, f64) {
        let span = self.span();
        let inset = self.cfg.endpoint_eps * span;
        (self.a + inset, self.effective_hi() - inset)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "sign", content = "crossings")]
pub enum SignClass {
    Positive,
    Negative,
    Mixed(Vec<f64>),
}

impl SignClass {
    pub fn is_positive(&self) -> bool {
        matches!(self, SignClass::Positive)
    }
}

/// A value attached to an interval endpoint: direct evaluation, an
/// extrapolated limit, clean divergence, or unknown with a reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum EndpointValue {
    Value { value: f64 },
    Limit { value: f64, error_estimate: f64 },
    Diverges { sign: f64 },
    Unknown { reason: String },
}

impl EndpointValue {
    pub fn estimate(&self) -> Option<f64> {
        match self {
            EndpointValue::Value { value } | EndpointValue::Limit { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn diverges_sign(&self) -> Option<f64> {
        match self {
            EndpointValue::Diverges { sign } => Some(*sign),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EndpointData {
    pub f: EndpointValue,
    pub g: EndpointValue,
    pub ratio: EndpointValue,
    pub hopital: EndpointValue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "notes")]
pub enum Strictness {
    Strict,
    NonStrict(Vec<String>),
}

/// Everything the hypothesis checks learned, plus the derived expressions
/// downstream rules reuse.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub g_sign: SignClass,
    pub gprime_sign: SignClass,
    pub hopital_segments: Vec<MonotoneSegment>,
    /// Refined abscissae where f'/g' changes direction.
    pub hopital_changes: Vec<f64>,
    pub endpoint_a: EndpointData,
    pub endpoint_b: EndpointData,
    pub strictness: Strictness,
    pub warnings: Vec<String>,
    /// Evaluation failures per facet; a failed facet does not poison others.
    pub facet_errors: Vec<String>,
    #[serde(skip)]
    pub derived: DerivedExprs,
}

impl HypothesisReport {
    /// Direction pattern of f'/g' with flats dropped.
    pub fn xi_pattern(&self) -> Vec<Direction> {
        self.hopital_segments
            .iter()
            .map(|s| s.direction)
            .filter(|d| *d != Direction::Flat)
            .collect()
    }

    /// Some(true) for g' > 0 throughout, Some(false) for g' < 0.
    pub fn gprime_positive(&self) -> Option<bool> {
        match self.gprime_sign {
            SignClass::Positive => Some(true),
            SignClass::Negative => Some(false),
            SignClass::Mixed(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DerivedExprs {
    pub fp: Expr,
    pub gp: Expr,
    /// f'/g', simplified (shared factors cancelled).
    pub xi: Expr,
    pub xi_prime: Expr,
    /// Cross product D = f'·g − f·g'; (f/g)' = D/g².
    pub cross: Expr,
}

impl DerivedExprs {
    pub fn from_problem(p: &RatioProblem) -> Self {
        let fp = simplify(&differentiate(&p.f, &p.var));
        let gp = simplify(&differentiate(&p.g, &p.var));
        let xi = simplify(&Expr::bin(
            crate::expr::BinOp::Div,
            fp.clone(),
            gp.clone(),
        ));
        let xi_prime = simplify(&differentiate(&xi, &p.var));
        let cross = simplify(&(fp.clone() * p.g.clone() - p.f.clone() * gp.clone()));
        DerivedExprs {
            fp,
            gp,
            xi,
            xi_prime,
            cross,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TurnSense {
    DownUp,
    UpDown,
}

impl TurnSense {
    pub fn flipped(self) -> TurnSense {
        match self {
            TurnSense::DownUp => TurnSense::UpDown,
            TurnSense::UpDown => TurnSense::DownUp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurningPoint {
    pub c: f64,
    pub sense: TurnSense,
    /// |D(c)| at the located root of the cross product.
    pub residual: f64,
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectedPiece {
    pub lo: f64,
    pub hi: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ShapeClass {
    Increasing,
    Decreasing,
    DownUp { turn: TurningPoint },
    UpDown { turn: TurningPoint },
    ConstantPrefix {
        alpha: f64,
        lambda: f64,
        tail: Option<Box<ShapeClass>>,
    },
    Piecewise { pieces: Vec<DirectedPiece> },
}

impl ShapeClass {
    /// Mirror under f/(-g) = -(f/g): used when g is negative.
    pub fn flipped(self) -> ShapeClass {
        match self {
            ShapeClass::Increasing => ShapeClass::Decreasing,
            ShapeClass::Decreasing => ShapeClass::Increasing,
            ShapeClass::DownUp { turn } => ShapeClass::UpDown {
                turn: TurningPoint {
                    sense: turn.sense.flipped(),
                    ..turn
                },
            },
            ShapeClass::UpDown { turn } => ShapeClass::DownUp {
                turn: TurningPoint {
                    sense: turn.sense.flipped(),
                    ..turn
                },
            },
            ShapeClass::ConstantPrefix { alpha, lambda, tail } => ShapeClass::ConstantPrefix {
                alpha,
                lambda: -lambda,
                tail: tail.map(|t| Box::new(t.flipped())),
            },
            ShapeClass::Piecewise { pieces } => ShapeClass::Piecewise {
                pieces: pieces
                    .into_iter()
                    .map(|p| DirectedPiece {
                        direction: match p.direction {
                            Direction::Up => Direction::Down,
                            Direction::Down => Direction::Up,
                            Direction::Flat => Direction::Flat,
                        },
                        ..p
                    })
                    .collect(),
            },
        }
    }

    /// Mirror under x ↦ a+b−x: used to pull reflected verdicts back.
    pub fn mirrored(self, a: f64, b: f64) -> ShapeClass {
        let m = a + b;
        match self {
            ShapeClass::Increasing => ShapeClass::Decreasing,
            ShapeClass::Decreasing => ShapeClass::Increasing,
            ShapeClass::DownUp { turn } => ShapeClass::UpDown {
                turn: TurningPoint {
                    c: m - turn.c,
                    sense: turn.sense.flipped(),
                    residual: turn.residual,
                    bracket: (m - turn.bracket.1, m - turn.bracket.0),
                },
            },
            ShapeClass::UpDown { turn } => ShapeClass::DownUp {
                turn: TurningPoint {
                    c: m - turn.c,
                    sense: turn.sense.flipped(),
                    residual: turn.residual,
                    bracket: (m - turn.bracket.1, m - turn.bracket.0),
                },
            },
            ShapeClass::ConstantPrefix { alpha, lambda, tail } => {
                // A prefix reflects into a suffix; represent as piecewise.
                let mut pieces = Vec::new();
                if let Some(t) = tail {
                    match t.mirrored(a, b) {
                        ShapeClass::Piecewise { pieces: inner } => pieces.extend(inner),
                        ShapeClass::Increasing => pieces.push(DirectedPiece {
                            lo: a,
                            hi: m - alpha,
                            direction: Direction::Up,
                        }),
                        ShapeClass::Decreasing => pieces.push(DirectedPiece {
                            lo: a,
                            hi: m - alpha,
                            direction: Direction::Down,
                        }),
                        other => {
                            let _ = other;
                            pieces.push(DirectedPiece {
                                lo: a,
                                hi: m - alpha,
                                direction: Direction::Flat,
                            });
                        }
                    }
                }
                let _ = lambda;
                pieces.push(DirectedPiece {
                    lo: m - alpha,
                    hi: b,
                    direction: Direction::Flat,
                });
                ShapeClass::Piecewise { pieces }
            }
            ShapeClass::Piecewise { pieces } => {
                let mut out: Vec<DirectedPiece> = pieces
                    .into_iter()
                    .rev()
                    .map(|p| DirectedPiece {
                        lo: m - p.hi,
                        hi: m - p.lo,
                        direction: match p.direction {
                            Direction::Up => Direction::Down,
                            Direction::Down => Direction::Up,
                            Direction::Flat => Direction::Flat,
                        },
                    })
                    .collect();
                out.sort_by(|x, y| x.lo.total_cmp(&y.lo));
                ShapeClass::Piecewise { pieces: out }
            }
        }
    }

    /// Flatten to directed runs for piecewise stitching and oracle checks.
    pub fn directed_runs(&self, lo: f64, hi: f64) -> Vec<DirectedPiece> {
        match self {
            ShapeClass::Increasing => vec![DirectedPiece {
                lo,
                hi,
                direction: Direction::Up,
            }],
            ShapeClass::Decreasing => vec![DirectedPiece {
                lo,
                hi,
                direction: Direction::Down,
            }],
            ShapeClass::DownUp { turn } => vec![
                DirectedPiece {
                    lo,
                    hi: turn.c,
                    direction: Direction::Down,
                },
                DirectedPiece {
                    lo: turn.c,
                    hi,
                    direction: Direction::Up,
                },
            ],
            ShapeClass::UpDown { turn } => vec![
                DirectedPiece {
                    lo,
                    hi: turn.c,
                    direction: Direction::Up,
                },
                DirectedPiece {
                    lo: turn.c,
                    hi,
                    direction: Direction::Down,
                },
            ],
            ShapeClass::ConstantPrefix { alpha, tail, .. } => {
                let mut out = vec![DirectedPiece {
                    lo,
                    hi: *alpha,
                    direction: Direction::Flat,
                }];
                if let Some(t) = tail {
                    out.extend(t.directed_runs(*alpha, hi));
                }
                out
            }
            ShapeClass::Piecewise { pieces } => pieces.clone(),
        }
    }

    /// One-line human description for reports and CLI output.
    pub fn summary(&self) -> String {
        fn dir_name(d: Direction) -> &'static str {
            match d {
                Direction::Up => "up",
                Direction::Down => "down",
                Direction::Flat => "flat",
            }
        }
        match self {
            ShapeClass::Increasing => "increasing".into(),
            ShapeClass::Decreasing => "decreasing".into(),
            ShapeClass::DownUp { turn } => format!("down-up (turn at {:.9})", turn.c),
            ShapeClass::UpDown { turn } => format!("up-down (turn at {:.9})", turn.c),
            ShapeClass::ConstantPrefix { alpha, lambda, tail } => match tail {
                Some(t) => format!(
                    "constant ratio {lambda} up to {alpha:.9}, then {}",
                    t.summary()
                ),
                None => format!("constant ratio {lambda} throughout"),
            },
            ShapeClass::Piecewise { pieces } => {
                let dirs: Vec<&str> = pieces.iter().map(|p| dir_name(p.direction)).collect();
                format!("piecewise [{}]", dirs.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EndpointCheck {
    pub endpoint: String,
    /// What is being compared, e.g. "f/g vs f'/g'" or "cross product D".
    pub what: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub relation: String,
    pub margin: f64,
    pub resolved_by_probe: bool,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct Certificate {
    pub rule: String,
    pub case: String,
    pub endpoint_checks: Vec<EndpointCheck>,
    pub segments: Vec<MonotoneSegment>,
    pub turning_points: Vec<TurningPoint>,
    pub bound: Option<OscillationProfile>,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum ShapeError {
    #[error("g changes sign inside the interval (crossings near {0:?}); the quotient has poles")]
    GMixed(Vec<f64>),
    #[error("hypotheses not met: {0}")]
    Ineligible(String),
    #[error(transparent)]
    Numeric(#[from] NumError),
}
