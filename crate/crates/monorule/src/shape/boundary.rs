//! Endpoint comparisons with a relative margin and receding-probe
//! tie-breaking.
//!
//! Comparing (f/g)(e) against (f'/g')(e) — or an expression against zero —
//! at floating-point accuracy is meaningless inside a small band. Differences
//! within `margin·(1+scale)` are ties; a tie is then probed at points
//! receding into the interval. Consistent strict signs at the probes settle
//! the ordering (the sign extends to the endpoint by continuity of the
//! comparison function); anything else stays a tie and is reported as such.

use serde::Serialize;

use super::{Bound, DerivedExprs, EndpointData, EndpointValue, RatioProblem};
use crate::expr::{BinOp, Expr};
use crate::numerics::evaluate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WhichEnd {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ordering3 {
    /// lhs ≤ rhs beyond doubt (margin or probes).
    Le,
    /// lhs ≥ rhs beyond doubt.
    Ge,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryCriterion {
    pub endpoint: WhichEnd,
    pub ratio: EndpointValue,
    pub hopital: EndpointValue,
    /// Ordering of f/g (lhs) against f'/g' (rhs) at the endpoint.
    pub ordering: Ordering3,
    /// The raw endpoint difference fell inside the margin band.
    pub equality_within_margin: bool,
    pub resolved_by_probe: bool,
    pub margin: f64,
}

/// Compare f/g against f'/g' at one endpoint of the problem interval.
pub fn boundary_criterion(
    p: &RatioProblem,
    which: WhichEnd,
) -> Result<BoundaryCriterion, super::ShapeError> {
    let hs = super::check_hypotheses(p)?;
    let data = match which {
        WhichEnd::A => &hs.endpoint_a,
        WhichEnd::B => &hs.endpoint_b,
    };
    Ok(compare_endpoint(p, &hs.derived, which, data))
}

pub(crate) fn compare_endpoint(
    p: &RatioProblem,
    derived: &DerivedExprs,
    which: WhichEnd,
    data: &EndpointData,
) -> BoundaryCriterion {
    let ratio = data.ratio.clone();
    let hopital = data.hopital.clone();

    let scale = 1.0
        + ratio
            .estimate()
            .map(f64::abs)
            .unwrap_or(0.0)
            .max(hopital.estimate().map(f64::abs).unwrap_or(0.0));
    let margin = p.cfg.margin * scale;

    // Direct decision from endpoint values when they are clear of the band.
    let mut equality = false;
    let direct = match (&ratio, &hopital) {
        (EndpointValue::Diverges { sign: sr }, EndpointValue::Diverges { sign: sh }) => {
            if sr * sh < 0.0 {
                Some(if *sr < 0.0 { Ordering3::Le } else { Ordering3::Ge })
            } else {
                None // same-signed infinities: only probes can order them
            }
        }
        (EndpointValue::Diverges { sign }, _) => Some(if *sign > 0.0 {
            Ordering3::Ge
        } else {
            Ordering3::Le
        }),
        (_, EndpointValue::Diverges { sign }) => Some(if *sign > 0.0 {
            Ordering3::Le
        } else {
            Ordering3::Ge
        }),
        _ => match (ratio.estimate(), hopital.estimate()) {
            (Some(r), Some(h)) => {
                let d = r - h;
                if d.abs() <= margin {
                    equality = true;
                    None
                } else if d < 0.0 {
                    Some(Ordering3::Le)
                } else {
                    Some(Ordering3::Ge)
                }
            }
            _ => None,
        },
    };

    if let Some(ordering) = direct {
        return BoundaryCriterion {
            endpoint: which,
            ratio,
            hopital,
            ordering,
            equality_within_margin: false,
            resolved_by_probe: false,
            margin,
        };
    }

    // Tie (or incomparable endpoint data): probe s(x) = f'/g' − f/g at
    // points receding into the interval.
    let s_expr = derived.xi.clone()
        - Expr::bin(BinOp::Div, p.f.clone(), p.g.clone());
    let ordering = match probe_sign(p, &s_expr, which) {
        Some(s) if s > 0.0 => Ordering3::Le, // ξ > f/g near e ⟹ (f/g)(e) ≤ ξ(e)
        Some(_) => Ordering3::Ge,
        None => Ordering3::Inconclusive,
    };
    BoundaryCriterion {
        endpoint: which,
        ratio,
        hopital,
        ordering,
        equality_within_margin: equality,
        resolved_by_probe: ordering != Ordering3::Inconclusive,
        margin,
    }
}

/// Sign of `expr` at probes receding from the given endpoint: offsets
/// span·0.01·2⁻ᵏ, k = 0..6. Returns the common strict sign, or None when the
/// evaluable probes are fewer than three or disagree.
pub(crate) fn probe_sign(p: &RatioProblem, expr: &Expr, which: WhichEnd) -> Option<f64> {
    let hi = p.effective_hi();
    let span = hi - p.a;
    let mut sign = 0.0f64;
    let mut seen = 0usize;
    for k in 0..6 {
        let off = span * 0.01 * 0.5f64.powi(k);
        let x = match which {
            WhichEnd::A => p.a + off,
            WhichEnd::B => hi - off,
        };
        let Ok(v) = evaluate(expr, &p.var, x, &p.cfg) else {
            continue;
        };
        if v == 0.0 {
            return None; // an exact zero this close to the end: stay a tie
        }
        let s = v.signum();
        if sign == 0.0 {
            sign = s;
        } else if s != sign {
            return None;
        }
        seen += 1;
    }
    if seen >= 3 {
        Some(sign)
    } else {
        None
    }
}

/// Sign query for `expr` at an endpoint: value against zero with the same
/// margin-and-probe policy. `hint` supplies an already-computed endpoint
/// value if the caller has one.
#[derive(Debug, Clone, Serialize)]
pub struct SignCheck {
    pub endpoint: WhichEnd,
    pub value: Option<f64>,
    /// Ge: expr ≥ 0 at the endpoint; Le: expr ≤ 0.
    pub ordering: Ordering3,
    pub equality_within_margin: bool,
    pub resolved_by_probe: bool,
    pub margin: f64,
}

pub(crate) fn sign_at_end(
    p: &RatioProblem,
    expr: &Expr,
    which: WhichEnd,
    hint: Option<&EndpointValue>,
) -> SignCheck {
    let x0 = match which {
        WhichEnd::A => Some(p.a),
        WhichEnd::B => match p.b {
            Bound::Finite(v) => Some(v),
            Bound::PosInf => None,
        },
    };
    let end_value = match hint {
        Some(v) => v.clone(),
        None => match x0 {
            Some(x) => match evaluate(expr, &p.var, x, &p.cfg) {
                Ok(v) => EndpointValue::Value { value: v },
                Err(e) => EndpointValue::Unknown {
                    reason: e.to_string(),
                },
            },
            None => EndpointValue::Unknown {
                reason: "endpoint at +inf".to_string(),
            },
        },
    };

    if let Some(s) = end_value.diverges_sign() {
        return SignCheck {
            endpoint: which,
            value: None,
            ordering: if s > 0.0 { Ordering3::Ge } else { Ordering3::Le },
            equality_within_margin: false,
            resolved_by_probe: false,
            margin: 0.0,
        };
    }

    let value = end_value.estimate();
    let margin = p.cfg.margin * (1.0 + value.map(f64::abs).unwrap_or(0.0));
    if let Some(v) = value {
        if v.abs() > margin {
            return SignCheck {
                endpoint: which,
                value: Some(v),
                ordering: if v > 0.0 { Ordering3::Ge } else { Ordering3::Le },
                equality_within_margin: false,
                resolved_by_probe: false,
                margin,
            };
        }
    }

    let equality = value.is_some();
    let ordering = match probe_sign(p, expr, which) {
        Some(s) if s > 0.0 => Ordering3::Ge,
        Some(_) => Ordering3::Le,
        None => Ordering3::Inconclusive,
    };
    SignCheck {
        endpoint: which,
        value,
        ordering,
        equality_within_margin: equality,
        resolved_by_probe: ordering != Ordering3::Inconclusive,
        margin,
    }
}
