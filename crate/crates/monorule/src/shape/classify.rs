//! The monotone-rule dispatcher: given single-signed g and g' and a
//! Hôpital derivative that is monotone (possibly after a constant prefix),
//! decide the shape of f/g and say why.
//!
//! With s = f'/g' − f/g, the quotient rule gives (f/g)' = s·(g'/g), and at a
//! zero of s the derivative of s equals (f'/g')'. So when f'/g' is strictly
//! monotone, s crosses zero at most once and only in the direction f'/g'
//! moves; every case below is a bookkeeping consequence of that one fact.
//! The endpoint conditions are evaluated with margins and probes; ties at
//! both ends with nothing to break them are the signature of f = λ·g.

use serde::Serialize;

use super::boundary::{compare_endpoint, sign_at_end, Ordering3, SignCheck, WhichEnd};
use super::{
    BoundaryCriterion, Certificate, DerivedExprs, EndpointCheck, EndpointData, EndpointValue,
    HypothesisReport, RatioProblem, ShapeClass, ShapeError, SignClass, Strictness, TurnSense,
    TurningPoint,
};
use crate::expr::simplify;
use crate::numerics::{evaluate, find_root, Direction};

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub shape: ShapeClass,
    pub certified: bool,
    pub certificate: Certificate,
    pub notes: Vec<String>,
}

pub fn classify(p: &RatioProblem) -> Result<Classification, ShapeError> {
    let hs = super::check_hypotheses(p)?;
    classify_with(p, &hs)
}

pub(crate) fn classify_with(
    p: &RatioProblem,
    hs: &HypothesisReport,
) -> Result<Classification, ShapeError> {
    match &hs.g_sign {
        SignClass::Positive => {}
        SignClass::Negative => {
            // f/(-g) = -(f/g): classify with the denominator negated and
            // mirror the verdict.
            let mut flipped = p.clone();
            flipped.g = simplify(&flipped.g.neg());
            let mut out = classify(&flipped)?;
            out.shape = out.shape.flipped();
            out.notes.push("g < 0: classified f/(-g) and mirrored".to_string());
            return Ok(out);
        }
        SignClass::Mixed(cross) => {
            if !hs.facet_errors.is_empty() {
                return Err(ShapeError::Ineligible(format!(
                    "sign of g could not be established: {}",
                    hs.facet_errors.join("; ")
                )));
            }
            return Err(ShapeError::GMixed(cross.clone()));
        }
    }

    let gp_pos = match hs.gprime_positive() {
        Some(v) => v,
        None => {
            return Err(ShapeError::Ineligible(
                "g' changes sign on the interval; split it first (analyze --auto-split)"
                    .to_string(),
            ))
        }
    };

    if hs.hopital_segments.is_empty() {
        return Err(ShapeError::Ineligible(format!(
            "f'/g' could not be segmented: {}",
            hs.facet_errors.join("; ")
        )));
    }

    // Constant or constant-prefix Hôpital derivative.
    if hs.hopital_segments[0].direction == Direction::Flat {
        return constant_prefix(p, hs, gp_pos);
    }

    let pattern = hs.xi_pattern();
    if pattern.len() != 1 {
        return Err(ShapeError::Ineligible(format!(
            "f'/g' changes direction {} time(s); the oscillation analysis applies",
            pattern.len().saturating_sub(1)
        )));
    }
    let xi_up = pattern[0] == Direction::Up;

    dispatch(p, hs, gp_pos, xi_up)
}

/// Truth table for one corollary branch: the shapes concluded by case 1/2i,
/// case 2ii, and case 2iii, plus the inequality senses expected at each end.
struct Branch {
    /// Endpoint where g may vanish (and the comparison needs the gate).
    zero_end: WhichEnd,
    /// Sense required of f(zero_end) in case 1: true for ≤ 0.
    case1_le: bool,
    /// Sense required of the ratio-vs-ξ comparison at a for the monotone
    /// conclusion `shape_from_a`.
    a_le: bool,
    shape_from_a: ShapeClass,
    shape_from_b: ShapeClass,
    turn: TurnSense,
}

fn branch(gp_pos: bool, xi_up: bool) -> Branch {
    use ShapeClass::{Decreasing, Increasing};
    match (gp_pos, xi_up) {
        // g' > 0, f'/g' increasing: s crosses zero upward at most once.
        (true, true) => Branch {
            zero_end: WhichEnd::A,
            case1_le: true,
            a_le: true,
            shape_from_a: Increasing,
            shape_from_b: Decreasing,
            turn: TurnSense::DownUp,
        },
        // g' > 0, f'/g' decreasing: mirrored senses.
        (true, false) => Branch {
            zero_end: WhichEnd::A,
            case1_le: false,
            a_le: false,
            shape_from_a: Decreasing,
            shape_from_b: Increasing,
            turn: TurnSense::UpDown,
        },
        // g' < 0, f'/g' decreasing: the zero of g sits at b.
        (false, false) => Branch {
            zero_end: WhichEnd::B,
            case1_le: true,
            a_le: false,
            shape_from_a: Increasing,
            shape_from_b: Decreasing,
            turn: TurnSense::DownUp,
        },
        // g' < 0, f'/g' increasing.
        (false, true) => Branch {
            zero_end: WhichEnd::B,
            case1_le: false,
            a_le: true,
            shape_from_a: Decreasing,
            shape_from_b: Increasing,
            turn: TurnSense::UpDown,
        },
    }
}

fn dispatch(
    p: &RatioProblem,
    hs: &HypothesisReport,
    gp_pos: bool,
    xi_up: bool,
) -> Result<Classification, ShapeError> {
    let br = branch(gp_pos, xi_up);
    let rule = if gp_pos { "corollary1" } else { "corollary2" };
    let mut notes = Vec::new();
    if let Strictness::NonStrict(ns) = &hs.strictness {
        notes.extend(ns.iter().map(|s| format!("non-strict: {s}")));
    }

    let zero_data = end_data(hs, br.zero_end);
    let g_zero = g_vanishes_at(p, &zero_data.g);

    let mut checks: Vec<EndpointCheck> = Vec::new();

    // Case 1: g vanishes at the zero end and f's sign there matches.
    if g_zero {
        let fcheck = sign_at_end(p, &p.f, br.zero_end, Some(&zero_data.f));
        let holds = if br.case1_le {
            fcheck.ordering == Ordering3::Le || fcheck.equality_within_margin
        } else {
            fcheck.ordering == Ordering3::Ge || fcheck.equality_within_margin
        };
        checks.push(sign_check_row(&fcheck, "f", if br.case1_le { "le" } else { "ge" }));
        if holds {
            let shape = if br.zero_end == WhichEnd::A {
                br.shape_from_a.clone()
            } else {
                br.shape_from_b.clone()
            };
            return Ok(Classification {
                shape,
                certified: true,
                certificate: certificate(rule, "1", checks, hs, vec![]),
                notes,
            });
        }
    }

    let cmp_a = compare_endpoint(p, &hs.derived, WhichEnd::A, &hs.endpoint_a);
    let cmp_b = compare_endpoint(p, &hs.derived, WhichEnd::B, &hs.endpoint_b);

    // Ties at both ends that probing cannot break: f ≡ λ·g.
    if cmp_a.equality_within_margin
        && !cmp_a.resolved_by_probe
        && cmp_b.equality_within_margin
        && !cmp_b.resolved_by_probe
    {
        let lambda = cmp_a
            .ratio
            .estimate()
            .or_else(|| cmp_b.ratio.estimate())
            .unwrap_or(0.0);
        checks.push(cmp_row(&cmp_a, "eq"));
        checks.push(cmp_row(&cmp_b, "eq"));
        notes.push("f/g is constant to working accuracy".to_string());
        return Ok(Classification {
            shape: ShapeClass::ConstantPrefix {
                alpha: p.effective_hi(),
                lambda,
                tail: None,
            },
            certified: true,
            certificate: certificate(rule, "constant", checks, hs, vec![]),
            notes,
        });
    }

    // Case 2i: comparison at a (gated when a is the zero end).
    let a_gated = br.zero_end == WhichEnd::A && g_zero;
    if !a_gated {
        let want = if br.a_le { Ordering3::Le } else { Ordering3::Ge };
        if cmp_a.ordering == want {
            checks.push(cmp_row(&cmp_a, rel_name(want)));
            return Ok(Classification {
                shape: br.shape_from_a.clone(),
                certified: true,
                certificate: certificate(rule, "2i", checks, hs, vec![]),
                notes,
            });
        }
    }

    // Case 2ii: comparison at b (gated when b is the zero end).
    let b_gated = br.zero_end == WhichEnd::B && g_zero;
    if !b_gated {
        let want = if br.a_le { Ordering3::Ge } else { Ordering3::Le };
        if cmp_b.ordering == want {
            checks.push(cmp_row(&cmp_b, rel_name(want)));
            return Ok(Classification {
                shape: br.shape_from_b.clone(),
                certified: true,
                certificate: certificate(rule, "2ii", checks, hs, vec![]),
                notes,
            });
        }
    }

    checks.push(cmp_row(&cmp_a, rel_name(cmp_a.ordering)));
    checks.push(cmp_row(&cmp_b, rel_name(cmp_b.ordering)));

    // Both monotone cases failed. If they failed *strictly* the shape turns
    // once; locate the turning point on the cross product.
    let strict_a = cmp_a.ordering != Ordering3::Inconclusive;
    let strict_b = cmp_b.ordering != Ordering3::Inconclusive;
    if strict_a && strict_b {
        match locate_turn(p, &hs.derived, br.turn) {
            Ok(turn) => {
                let shape = match br.turn {
                    TurnSense::DownUp => ShapeClass::DownUp { turn },
                    TurnSense::UpDown => ShapeClass::UpDown { turn },
                };
                return Ok(Classification {
                    shape,
                    certified: true,
                    certificate: certificate(rule, "2iii", checks, hs, vec![turn]),
                    notes,
                });
            }
            Err(e) => {
                notes.push(format!("turning point not located: {e}"));
            }
        }
    } else {
        notes.push("endpoint comparison tie could not be resolved by probing".to_string());
    }

    // Unresolved: fall back to the sign structure of D without certifying.
    let shape = shape_from_cross(p, &hs.derived)?;
    Ok(Classification {
        shape,
        certified: false,
        certificate: certificate(rule, "inconclusive", checks, hs, vec![]),
        notes,
    })
}

/// Flat-prefix handler. A flat f'/g' ≡ λ on [a, α] means f' = λ·g', so
/// f = λ·g + C with C = f(a) − λ·g(a). C = 0 makes the ratio constant on
/// the prefix; C ≠ 0 makes it λ + C/g, strictly monotone.
fn constant_prefix(
    p: &RatioProblem,
    hs: &HypothesisReport,
    gp_pos: bool,
) -> Result<Classification, ShapeError> {
    let seg = hs.hopital_segments[0];
    let whole = hs.hopital_segments.len() == 1;
    let alpha = if whole { p.effective_hi() } else { seg.hi };
    let mid = 0.5 * (seg.lo + seg.hi);
    let lambda = evaluate(&hs.derived.xi, &p.var, mid, &p.cfg)?;
    let mut notes = vec![format!(
        "f'/g' is constant ({lambda:.6}) on [{:.6}, {:.6}]",
        p.a, alpha
    )];

    let fa = hs.endpoint_a.f.estimate();
    let ga = hs.endpoint_a.g.estimate();
    let offset = match (fa, ga) {
        (Some(fv), Some(gv)) => Some(fv - lambda * gv),
        _ => None,
    };

    match offset {
        Some(c) if c.abs() <= p.cfg.margin * (1.0 + fa.unwrap_or(0.0).abs()) => {
            // Genuine λ·g prefix.
            let mut tail_certified = true;
            let tail = if whole {
                None
            } else {
                let mut tp = p.clone();
                tp.a = alpha;
                match classify(&tp) {
                    Ok(sub) => {
                        notes.extend(sub.notes.iter().map(|n| format!("tail: {n}")));
                        tail_certified = sub.certified;
                        Some(Box::new(sub.shape))
                    }
                    Err(e) => {
                        notes.push(format!("tail [{alpha:.6}, b] not classified: {e}"));
                        tail_certified = false;
                        None
                    }
                }
            };
            Ok(Classification {
                shape: ShapeClass::ConstantPrefix { alpha, lambda, tail },
                certified: tail_certified,
                certificate: certificate(
                    "constant-hopital",
                    if whole { "constant" } else { "prefix" },
                    vec![],
                    hs,
                    vec![],
                ),
                notes,
            })
        }
        Some(c) if whole => {
            // f/g = λ + C/g everywhere: monotone with slope sign −C·sign(g').
            let up = (c < 0.0) == gp_pos;
            notes.push(format!("f = λ·g + C with C = {c:.3e}: ratio is λ + C/g"));
            Ok(Classification {
                shape: if up {
                    ShapeClass::Increasing
                } else {
                    ShapeClass::Decreasing
                },
                certified: true,
                certificate: certificate("constant-hopital", "affine-offset", vec![], hs, vec![]),
                notes,
            })
        }
        _ => {
            // Prefix with offset (or unknown offset): no special handling;
            // report the sign structure of D honestly, uncertified.
            notes.push(
                "flat f'/g' prefix without the λ·g structure; shape read from D".to_string(),
            );
            let shape = shape_from_cross(p, &hs.derived)?;
            Ok(Classification {
                shape,
                certified: false,
                certificate: certificate("constant-hopital", "inconclusive", vec![], hs, vec![]),
                notes,
            })
        }
    }
}

fn end_data(hs: &HypothesisReport, which: WhichEnd) -> EndpointData {
    match which {
        WhichEnd::A => hs.endpoint_a.clone(),
        WhichEnd::B => hs.endpoint_b.clone(),
    }
}

/// Does g vanish at this endpoint? Estimates are compared against g's
/// interior size; extrapolated limits get their own error allowance.
pub(crate) fn g_vanishes_at(p: &RatioProblem, g_end: &EndpointValue) -> bool {
    let scale = super::hypotheses::interior_scale(&p.g, p).max(1e-300);
    match g_end {
        EndpointValue::Value { value } => value.abs() <= 4.0 * f64::EPSILON * scale,
        EndpointValue::Limit {
            value,
            error_estimate,
        } => value.abs() <= (4.0 * f64::EPSILON * scale).max(4.0 * error_estimate),
        _ => false,
    }
}

fn rel_name(o: Ordering3) -> &'static str {
    match o {
        Ordering3::Le => "le",
        Ordering3::Ge => "ge",
        Ordering3::Inconclusive => "tie",
    }
}

fn cmp_row(c: &BoundaryCriterion, relation: &str) -> EndpointCheck {
    EndpointCheck {
        endpoint: if c.endpoint == WhichEnd::A { "a" } else { "b" }.to_string(),
        what: "f/g vs f'/g'".to_string(),
        lhs: c.ratio.estimate(),
        rhs: c.hopital.estimate(),
        relation: relation.to_string(),
        margin: c.margin,
        resolved_by_probe: c.resolved_by_probe,
    }
}

fn sign_check_row(c: &SignCheck, what: &str, relation: &str) -> EndpointCheck {
    EndpointCheck {
        endpoint: if c.endpoint == WhichEnd::A { "a" } else { "b" }.to_string(),
        what: format!("{what} vs 0"),
        lhs: c.value,
        rhs: Some(0.0),
        relation: relation.to_string(),
        margin: c.margin,
        resolved_by_probe: c.resolved_by_probe,
    }
}

fn certificate(
    rule: &str,
    case: &str,
    endpoint_checks: Vec<EndpointCheck>,
    hs: &HypothesisReport,
    turning_points: Vec<TurningPoint>,
) -> Certificate {
    Certificate {
        rule: rule.to_string(),
        case: case.to_string(),
        endpoint_checks,
        segments: hs.hopital_segments.clone(),
        turning_points,
        bound: None,
    }
}

/// Locate the single turning point of f/g as the sign change of
/// D = f'·g − f·g' matching the expected sense (− → + for down-up).
pub(crate) fn locate_turn(
    p: &RatioProblem,
    derived: &DerivedExprs,
    sense: TurnSense,
) -> Result<TurningPoint, ShapeError> {
    let (lo, hi) = p.scan_interval();
    let n = p.cfg.grid_n.max(16);
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let v = evaluate(&derived.cross, &p.var, x, &p.cfg)?;
        if v == 0.0 {
            continue;
        }
        if let Some((px, pv)) = prev {
            let matches = match sense {
                TurnSense::DownUp => pv < 0.0 && v > 0.0,
                TurnSense::UpDown => pv > 0.0 && v < 0.0,
            };
            if matches {
                let r = find_root(
                    |x| evaluate(&derived.cross, &p.var, x, &p.cfg),
                    px,
                    x,
                    &p.cfg,
                )?;
                return Ok(TurningPoint {
                    c: r.root,
                    sense,
                    residual: r.f_root.abs(),
                    bracket: r.bracket,
                });
            }
        }
        prev = Some((x, v));
    }
    Err(ShapeError::Ineligible(
        "no sign change of f'·g − f·g' with the expected sense".to_string(),
    ))
}

/// Uncertified shape read directly from the sign runs of D.
pub(crate) fn shape_from_cross(
    p: &RatioProblem,
    derived: &DerivedExprs,
) -> Result<ShapeClass, ShapeError> {
    let (lo, hi) = p.scan_interval();
    let n = p.cfg.grid_n.max(16);
    let mut signs: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let v = evaluate(&derived.cross, &p.var, x, &p.cfg)?;
        if v != 0.0 {
            signs.push((x, v.signum()));
        }
    }
    let Some(&(_, first)) = signs.first() else {
        return Ok(ShapeClass::ConstantPrefix {
            alpha: p.effective_hi(),
            lambda: 0.0,
            tail: None,
        });
    };
    let mut flips: Vec<f64> = Vec::new();
    let mut cur = first;
    for &(x, s) in &signs[1..] {
        if s != cur {
            flips.push(x);
            cur = s;
        }
    }
    match flips.len() {
        0 => Ok(if first > 0.0 {
            ShapeClass::Increasing
        } else {
            ShapeClass::Decreasing
        }),
        1 => {
            let sense = if first < 0.0 {
                TurnSense::DownUp
            } else {
                TurnSense::UpDown
            };
            let turn = locate_turn(p, derived, sense)?;
            Ok(match sense {
                TurnSense::DownUp => ShapeClass::DownUp { turn },
                TurnSense::UpDown => ShapeClass::UpDown { turn },
            })
        }
        _ => {
            let mut pieces = Vec::new();
            let mut start = p.a;
            let mut dir = if first > 0.0 { Direction::Up } else { Direction::Down };
            for &x in &flips {
                pieces.push(super::DirectedPiece {
                    lo: start,
                    hi: x,
                    direction: dir,
                });
                start = x;
                dir = if dir == Direction::Up { Direction::Down } else { Direction::Up };
            }
            pieces.push(super::DirectedPiece {
                lo: start,
                hi: p.effective_hi(),
                direction: dir,
            });
            Ok(ShapeClass::Piecewise { pieces })
        }
    }
}
