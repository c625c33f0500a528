//! Beyond one direction change: oscillation bounds, global extrema, and
//! endpoint certificates for increasing quotients.
//!
//! When f'/g' changes direction n times at b₁ < … < bₙ, the quotient f/g
//! can change direction at most once inside each of the n+1 subintervals —
//! the crossing function s = f'/g' − f/g moves through zero only in the
//! direction f'/g' is moving. That caps the oscillation at n+1, improving
//! to n when g vanishes at the left end and f's sign there rules the first
//! subinterval out. Decreasing denominators are handled by reflecting the
//! interval.

use serde::Serialize;

use super::boundary::{sign_at_end, Ordering3, WhichEnd};
use super::classify::locate_turn;
use super::{
    Bound, Certificate, EndpointCheck, HypothesisReport, RatioProblem, ShapeError, SignClass,
    TurnSense, TurningPoint,
};
use crate::expr::{simplify, Expr};
use crate::numerics::{evaluate, Direction};

#[derive(Debug, Clone, Serialize)]
pub struct OscillationProfile {
    /// n: direction changes of f'/g'.
    pub direction_changes: usize,
    /// Refined abscissae b₁ < … < bₙ of those changes.
    pub change_points: Vec<f64>,
    /// Maximum number of direction changes of f/g.
    pub bound: usize,
    /// The left-end refinement held (g(a) = 0 with matching f sign), so the
    /// first subinterval contributes no change and bound = n.
    pub zero_end_refinement: bool,
    /// Potential turn sense inside each subinterval I₀..Iₙ.
    pub senses: Vec<TurnSense>,
    pub subintervals: Vec<(f64, f64)>,
    /// Set when the profile was computed on the reflected interval.
    pub reflected: bool,
    pub notes: Vec<String>,
}

pub fn oscillation_bound(p: &RatioProblem) -> Result<OscillationProfile, ShapeError> {
    let hs = super::check_hypotheses(p)?;
    oscillation_bound_with(p, &hs)
}

pub(crate) fn oscillation_bound_with(
    p: &RatioProblem,
    hs: &HypothesisReport,
) -> Result<OscillationProfile, ShapeError> {
    if !hs.g_sign.is_positive() {
        return Err(ShapeError::Ineligible(
            "oscillation bound needs g > 0 on the interval".to_string(),
        ));
    }
    match hs.gprime_positive() {
        Some(true) => oscillation_bound_increasing(p, hs, false),
        Some(false) => {
            // Reflect x ↦ a+b−x so the denominator increases, then mirror.
            let pr = reflect(p)?;
            let hs_r = super::check_hypotheses(&pr)?;
            let prof = oscillation_bound_increasing(&pr, &hs_r, true)?;
            let m = p.a + p.effective_hi();
            let mut subintervals: Vec<(f64, f64)> = prof
                .subintervals
                .iter()
                .rev()
                .map(|&(lo, hi)| (m - hi, m - lo))
                .collect();
            // Guard against reflection round-off at the seams.
            for w in subintervals.iter_mut() {
                w.0 = w.0.max(p.a);
            }
            Ok(OscillationProfile {
                direction_changes: prof.direction_changes,
                change_points: prof.change_points.iter().rev().map(|&x| m - x).collect(),
                bound: prof.bound,
                zero_end_refinement: prof.zero_end_refinement,
                senses: prof.senses.iter().rev().map(|s| s.flipped()).collect(),
                subintervals,
                reflected: true,
                notes: prof.notes,
            })
        }
        None => Err(ShapeError::Ineligible(
            "oscillation bound needs single-signed g'".to_string(),
        )),
    }
}

fn oscillation_bound_increasing(
    p: &RatioProblem,
    hs: &HypothesisReport,
    reflected: bool,
) -> Result<OscillationProfile, ShapeError> {
    let mut notes = Vec::new();
    // Directional segments of f'/g' (flats between same directions are
    // already merged by the segmentation).
    let dirs: Vec<(Direction, f64, f64)> = hs
        .hopital_segments
        .iter()
        .filter(|s| s.direction != Direction::Flat)
        .map(|s| (s.direction, s.lo, s.hi))
        .collect();

    if dirs.is_empty() {
        notes.push("f'/g' is constant: f/g is monotone or constant".to_string());
        return Ok(OscillationProfile {
            direction_changes: 0,
            change_points: vec![],
            bound: 0,
            zero_end_refinement: false,
            senses: vec![],
            subintervals: vec![(p.a, p.effective_hi())],
            reflected,
            notes,
        });
    }

    let mut change_points = Vec::new();
    for w in dirs.windows(2) {
        if w[0].0 != w[1].0 {
            change_points.push(w[1].1); // refined boundary = next segment's lo
        } else {
            notes.push(format!(
                "same-direction segments meet at {:.6}; plateau between them ignored",
                w[1].1
            ));
        }
    }
    let n = change_points.len();

    let mut subintervals = Vec::new();
    let mut start = p.a;
    for &bk in &change_points {
        subintervals.push((start, bk));
        start = bk;
    }
    subintervals.push((start, p.effective_hi()));

    // Sense in each subinterval follows the direction f'/g' has there.
    let mut senses = Vec::new();
    let mut di = 0usize;
    let mut d = dirs[0].0;
    senses.push(sense_of(d));
    for _ in &change_points {
        di += 1;
        if di < dirs.len() {
            d = dirs[di].0;
        }
        senses.push(sense_of(d));
    }

    // Left-end refinement: g(a) = 0 and f(a) on the right side of zero for
    // the first segment's convexity.
    let g_zero = super::classify::g_vanishes_at(p, &hs.endpoint_a.g);
    let mut refinement = false;
    if g_zero {
        let fcheck = sign_at_end(p, &p.f, WhichEnd::A, Some(&hs.endpoint_a.f));
        let want_le = dirs[0].0 == Direction::Up;
        let holds = if want_le {
            fcheck.ordering == Ordering3::Le || fcheck.equality_within_margin
        } else {
            fcheck.ordering == Ordering3::Ge || fcheck.equality_within_margin
        };
        if holds {
            refinement = true;
            notes.push(
                "g(a) = 0 with matching f(a) sign: no direction change in the first subinterval"
                    .to_string(),
            );
        }
    }

    Ok(OscillationProfile {
        direction_changes: n,
        change_points,
        bound: if refinement { n } else { n + 1 },
        zero_end_refinement: refinement,
        senses,
        subintervals,
        reflected,
        notes,
    })
}

fn sense_of(d: Direction) -> TurnSense {
    if d == Direction::Up {
        TurnSense::DownUp
    } else {
        TurnSense::UpDown
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremumReport {
    pub kind: ExtremumKind,
    pub location: f64,
    pub value: f64,
    /// False when the winner sits at an interval end.
    pub interior: bool,
    pub turning: Option<TurningPoint>,
    pub certificate: Certificate,
}

/// Unique global extremum of f/g when f'/g' changes direction exactly once:
/// up-then-down yields a maximum, down-then-up a minimum. Candidates are
/// the interval ends and the sign changes of D = f'·g − f·g'.
pub fn corollary3_extremum(p: &RatioProblem) -> Result<ExtremumReport, ShapeError> {
    let hs = super::check_hypotheses(p)?;
    if !hs.g_sign.is_positive() {
        return Err(ShapeError::Ineligible("needs g > 0".to_string()));
    }
    if hs.gprime_positive() != Some(true) {
        return Err(ShapeError::Ineligible("needs g' > 0".to_string()));
    }
    let pattern = hs.xi_pattern();
    let kind = match pattern.as_slice() {
        [Direction::Up, Direction::Down] => ExtremumKind::Max,
        [Direction::Down, Direction::Up] => ExtremumKind::Min,
        other => {
            return Err(ShapeError::Ineligible(format!(
                "f'/g' must change direction exactly once (found pattern {other:?})"
            )))
        }
    };

    // Candidates: interval ends and the turning points of the ratio.
    let mut candidates: Vec<(f64, f64, Option<TurningPoint>)> = Vec::new();
    for (end, data, x) in [
        (WhichEnd::A, &hs.endpoint_a, p.a),
        (WhichEnd::B, &hs.endpoint_b, p.effective_hi()),
    ] {
        match &data.ratio {
            super::EndpointValue::Diverges { sign } => {
                let bad = (kind == ExtremumKind::Max && *sign > 0.0)
                    || (kind == ExtremumKind::Min && *sign < 0.0);
                if bad {
                    return Err(ShapeError::Ineligible(format!(
                        "f/g diverges at endpoint {end:?}; no finite extremum"
                    )));
                }
            }
            v => {
                if let Some(est) = v.estimate() {
                    candidates.push((x, est, None));
                }
            }
        }
    }
    let want = if kind == ExtremumKind::Max {
        TurnSense::UpDown
    } else {
        TurnSense::DownUp
    };
    if let Ok(turn) = locate_turn(p, &hs.derived, want) {
        let v = ratio_at(p, turn.c)?;
        candidates.push((turn.c, v, Some(turn)));
    }
    // The complementary sense can appear once too (bound 2); its value never
    // wins for the extremum kind at hand, so it is not a candidate.

    if candidates.is_empty() {
        return Err(ShapeError::Ineligible(
            "no evaluable extremum candidates".to_string(),
        ));
    }
    let best = candidates
        .iter()
        .max_by(|x, y| {
            let (a, b) = (x.1, y.1);
            match kind {
                ExtremumKind::Max => a.total_cmp(&b),
                ExtremumKind::Min => b.total_cmp(&a),
            }
        })
        .unwrap()
        .clone();

    let turning_points = best.2.iter().copied().collect();
    Ok(ExtremumReport {
        kind,
        location: best.0,
        value: best.1,
        interior: best.2.is_some(),
        turning: best.2,
        certificate: Certificate {
            rule: "corollary3".to_string(),
            case: if kind == ExtremumKind::Max { "max" } else { "min" }.to_string(),
            endpoint_checks: vec![],
            segments: hs.hopital_segments.clone(),
            turning_points,
            bound: None,
        },
    })
}

fn ratio_at(p: &RatioProblem, x: f64) -> Result<f64, ShapeError> {
    let f = evaluate(&p.f, &p.var, x, &p.cfg)?;
    let g = evaluate(&p.g, &p.var, x, &p.cfg)?;
    if g == 0.0 {
        return Err(ShapeError::Ineligible(format!("g({x}) = 0")));
    }
    Ok(f / g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertifyStatus {
    CertifiedIncreasing,
    NotCertified,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorollaryCertification {
    pub status: CertifyStatus,
    pub reasons: Vec<String>,
    pub certificate: Certificate,
}

/// Increasing-certificate when f'/g' rises then falls: D ≥ 0 at both ends
/// forces D ≥ 0 throughout (D can only cross downward after the hump), so
/// (f/g)' = D/g² ≥ 0.
pub fn corollary4_certify(p: &RatioProblem) -> Result<CorollaryCertification, ShapeError> {
    let hs = super::check_hypotheses(p)?;
    certify_common(p, &hs, "corollary4", CertifyTarget::WholeInterval)
}

/// Two direction changes of f'/g' (up, down, up): D ≥ 0 at a and at the
/// second change point b₂ chains the one-hump certificate on [a, b₂] with
/// the endpoint comparison at b₂ on [b₂, b].
pub fn corollary5_certify(p: &RatioProblem) -> Result<CorollaryCertification, ShapeError> {
    let hs = super::check_hypotheses(p)?;
    certify_common(p, &hs, "corollary5", CertifyTarget::SecondChange)
}

enum CertifyTarget {
    WholeInterval,
    SecondChange,
}

fn certify_common(
    p: &RatioProblem,
    hs: &HypothesisReport,
    rule: &str,
    target: CertifyTarget,
) -> Result<CorollaryCertification, ShapeError> {
    let mut reasons = Vec::new();
    let mut checks: Vec<EndpointCheck> = Vec::new();

    let hypotheses_ok = match (&hs.g_sign, hs.gprime_positive()) {
        (SignClass::Positive, Some(true)) => true,
        (SignClass::Positive, _) => {
            reasons.push("g' is not single-signed positive".to_string());
            false
        }
        _ => {
            reasons.push("g is not positive on the interval".to_string());
            false
        }
    };

    let pattern = hs.xi_pattern();
    let pattern_ok = match target {
        CertifyTarget::WholeInterval => match pattern.as_slice() {
            [] => {
                reasons.push(
                    "f'/g' is constant; the endpoint checks still decide the slope sign"
                        .to_string(),
                );
                true
            }
            [Direction::Up] => true,
            [Direction::Up, Direction::Down] => true,
            other => {
                reasons.push(format!(
                    "f'/g' pattern {other:?} is not up or up-then-down"
                ));
                false
            }
        },
        CertifyTarget::SecondChange => matches!(
            pattern.as_slice(),
            [Direction::Up, Direction::Down, Direction::Up]
        ) || {
            reasons.push(format!(
                "f'/g' pattern {:?} is not up-down-up",
                pattern.as_slice()
            ));
            false
        },
    };

    if !hypotheses_ok || !pattern_ok {
        return Ok(CorollaryCertification {
            status: CertifyStatus::Inconclusive,
            reasons,
            certificate: Certificate {
                rule: rule.to_string(),
                case: "hypotheses".to_string(),
                endpoint_checks: checks,
                segments: hs.hopital_segments.clone(),
                turning_points: vec![],
                bound: None,
            },
        })
    }

    let d = &hs.derived.cross;
    let check_a = sign_at_end(p, d, WhichEnd::A, None);
    checks.push(EndpointCheck {
        endpoint: "a".to_string(),
        what: "D = f'·g − f·g'".to_string(),
        lhs: check_a.value,
        rhs: Some(0.0),
        relation: rel(check_a.ordering),
        margin: check_a.margin,
        resolved_by_probe: check_a.resolved_by_probe,
    });

    let (right_name, right) = match target {
        CertifyTarget::WholeInterval => {
            let c = sign_at_end(p, d, WhichEnd::B, None);
            checks.push(EndpointCheck {
                endpoint: "b".to_string(),
                what: "D = f'·g − f·g'".to_string(),
                lhs: c.value,
                rhs: Some(0.0),
                relation: rel(c.ordering),
                margin: c.margin,
                resolved_by_probe: c.resolved_by_probe,
            });
            (
                "b",
                InteriorSign {
                    ordering: c.ordering,
                    equality_within_margin: c.equality_within_margin,
                    value: c.value,
                    margin: c.margin,
                    resolved_by_probe: c.resolved_by_probe,
                },
            )
        }
        CertifyTarget::SecondChange => {
            // Second direction change of f'/g'.
            let mut change_points = Vec::new();
            let dirs: Vec<_> = hs
                .hopital_segments
                .iter()
                .filter(|s| s.direction != Direction::Flat)
                .collect();
            for w in dirs.windows(2) {
                if w[0].direction != w[1].direction {
                    change_points.push(w[1].lo);
                }
            }
            let b2 = change_points[1];
            let c = sign_at_interior(p, d, b2);
            checks.push(EndpointCheck {
                endpoint: format!("b2 = {b2:.9}"),
                what: "D = f'·g − f·g'".to_string(),
                lhs: c.value,
                rhs: Some(0.0),
                relation: rel(c.ordering),
                margin: c.margin,
                resolved_by_probe: c.resolved_by_probe,
            });
            ("b2", c)
        }
    };

    let nonneg = |o: Ordering3| o == Ordering3::Ge;
    let strictly_neg =
        |c: &InteriorSign| c.ordering == Ordering3::Le && !c.equality_within_margin;

    let ca = InteriorSign {
        ordering: check_a.ordering,
        equality_within_margin: check_a.equality_within_margin,
        value: check_a.value,
        margin: check_a.margin,
        resolved_by_probe: check_a.resolved_by_probe,
    };

    let status = if nonneg(ca.ordering) && nonneg(right.ordering) {
        CertifyStatus::CertifiedIncreasing
    } else if strictly_neg(&ca) || strictly_neg(&right) {
        if strictly_neg(&ca) {
            reasons.push("D(a) < 0".to_string());
        }
        if strictly_neg(&right) {
            reasons.push(format!("D({right_name}) < 0"));
        }
        CertifyStatus::NotCertified
    } else {
        // Ties that probing could not break. D ≡ 0 (f a multiple of g) is
        // the one benign reading: confirm it at the midpoint.
        let mid = 0.5 * (p.a + p.effective_hi());
        let dv = evaluate(d, &p.var, mid, &p.cfg).unwrap_or(f64::NAN);
        if dv.abs() <= p.cfg.margin * (1.0 + dv.abs()) {
            reasons.push("D vanishes identically: f/g is constant (weakly increasing)".to_string());
            CertifyStatus::CertifiedIncreasing
        } else {
            reasons.push("sign of D at an endpoint is below the margin and probes disagree"
                .to_string());
            CertifyStatus::Inconclusive
        }
    };

    Ok(CorollaryCertification {
        status,
        reasons,
        certificate: Certificate {
            rule: rule.to_string(),
            case: match target {
                CertifyTarget::WholeInterval => "endpoints",
                CertifyTarget::SecondChange => "a-and-b2",
            }
            .to_string(),
            endpoint_checks: checks,
            segments: hs.hopital_segments.clone(),
            turning_points: vec![],
            bound: None,
        },
    })
}

struct InteriorSign {
    ordering: Ordering3,
    equality_within_margin: bool,
    value: Option<f64>,
    margin: f64,
    resolved_by_probe: bool,
}

/// Margin-and-probe sign of `expr` at an interior point: two-sided probes
/// at x ± span·0.01·2⁻ᵏ must agree.
fn sign_at_interior(p: &RatioProblem, expr: &Expr, x: f64) -> InteriorSign {
    let value = evaluate(expr, &p.var, x, &p.cfg).ok();
    let margin = p.cfg.margin * (1.0 + value.map(f64::abs).unwrap_or(0.0));
    if let Some(v) = value {
        if v.abs() > margin {
            return InteriorSign {
                ordering: if v > 0.0 { Ordering3::Ge } else { Ordering3::Le },
                equality_within_margin: false,
                value,
                margin,
                resolved_by_probe: false,
            };
        }
    }
    let span = p.span();
    let mut sign = 0.0f64;
    let mut seen = 0usize;
    let mut agree = true;
    for k in 0..5 {
        let off = span * 0.01 * 0.5f64.powi(k);
        for x_probe in [x - off, x + off] {
            if x_probe <= p.a || x_probe >= p.effective_hi() {
                continue;
            }
            let Ok(v) = evaluate(expr, &p.var, x_probe, &p.cfg) else {
                continue;
            };
            if v == 0.0 {
                continue;
            }
            if sign == 0.0 {
                sign = v.signum();
            } else if v.signum() != sign {
                agree = false;
            }
            seen += 1;
        }
    }
    let ordering = if agree && seen >= 3 && sign != 0.0 {
        if sign > 0.0 {
            Ordering3::Ge
        } else {
            Ordering3::Le
        }
    } else {
        Ordering3::Inconclusive
    };
    InteriorSign {
        ordering,
        equality_within_margin: value.is_some(),
        value,
        margin,
        resolved_by_probe: ordering != Ordering3::Inconclusive,
    }
}

/// The reflected problem: x ↦ a+b−x swaps the roles of the endpoints and
/// flips the sign of g'. Requires a finite right endpoint.
pub fn reflect(p: &RatioProblem) -> Result<RatioProblem, ShapeError> {
    let b = match p.b {
        Bound::Finite(v) => v,
        Bound::PosInf => {
            return Err(ShapeError::Ineligible(
                "reflection requires a finite right endpoint".to_string(),
            ))
        }
    };
    let mirror = Expr::constant(p.a + b) - Expr::var(&p.var);
    Ok(RatioProblem {
        f: simplify(&p.f.subst(&p.var, &mirror)),
        g: simplify(&p.g.subst(&p.var, &mirror)),
        var: p.var.clone(),
        a: p.a,
        b: Bound::Finite(b),
        open_left: p.open_right,
        open_right: p.open_left,
        cfg: p.cfg.clone(),
    })
}

fn rel(o: Ordering3) -> String {
    match o {
        Ordering3::Le => "le",
        Ordering3::Ge => "ge",
        Ordering3::Inconclusive => "tie",
    }
    .to_string()
}
