//! Hypothesis checks: signs of g and g', segmentation of f'/g', endpoint
//! data. Facets fail independently; a failed facet leaves a record instead
//! of aborting the others.

use super::{
    Bound, DerivedExprs, EndpointData, EndpointValue, HypothesisReport, RatioProblem, ShapeError,
    SignClass, Strictness,
};
use crate::expr::{differentiate, simplify, BinOp, Expr};
use crate::numerics::{
    evaluate, find_root, limit_at, segment_monotone, LimitPoint, LimitValue, NumError, Side,
};

pub fn check_hypotheses(p: &RatioProblem) -> Result<HypothesisReport, ShapeError> {
    let derived = DerivedExprs::from_problem(p);
    let (lo, hi) = p.scan_interval();
    let mut warnings = Vec::new();
    let mut facet_errors = Vec::new();
    let mut strict_notes = Vec::new();

    let g_sign = match sign_scan(|x| evaluate(&p.g, &p.var, x, &p.cfg), lo, hi, p) {
        Ok(scan) => {
            if scan.zeros > 0 {
                strict_notes.push(format!(
                    "g touched zero at {} interior sample(s)",
                    scan.zeros
                ));
            }
            scan.class
        }
        Err(e) => {
            facet_errors.push(format!("g sign scan: {e}"));
            SignClass::Mixed(Vec::new())
        }
    };

    let gprime_sign = match sign_scan(|x| evaluate(&derived.gp, &p.var, x, &p.cfg), lo, hi, p) {
        Ok(scan) => {
            if scan.zeros > 0 {
                strict_notes.push(format!(
                    "g' touched zero at {} interior sample(s)",
                    scan.zeros
                ));
            }
            scan.class
        }
        Err(e) => {
            facet_errors.push(format!("g' sign scan: {e}"));
            SignClass::Mixed(Vec::new())
        }
    };

    let (hopital_segments, hopital_changes) =
        match segment_monotone(|x| evaluate(&derived.xi, &p.var, x, &p.cfg), lo, hi, &p.cfg) {
            Ok(seg) => {
                for w in &seg.warnings {
                    if w.contains("non-strictly") {
                        strict_notes.push(format!("f'/g': {w}"));
                    } else {
                        warnings.push(format!("f'/g': {w}"));
                    }
                }
                refine_changes(seg.segments, seg.changes, p, &derived)
            }
            Err(e) => {
                facet_errors.push(format!("f'/g' segmentation: {e}"));
                (Vec::new(), Vec::new())
            }
        };

    let endpoint_a = endpoint_data(p, &derived, WhichSide::A);
    let endpoint_b = endpoint_data(p, &derived, WhichSide::B);

    let strictness = if strict_notes.is_empty() {
        Strictness::Strict
    } else {
        Strictness::NonStrict(strict_notes)
    };

    Ok(HypothesisReport {
        g_sign,
        gprime_sign,
        hopital_segments,
        hopital_changes,
        endpoint_a,
        endpoint_b,
        strictness,
        warnings,
        facet_errors,
        derived,
    })
}

struct ScanOutcome {
    class: SignClass,
    zeros: usize,
}

/// Grid sign census. Exact zeros (typically underflow) are sign-neutral.
/// A crossing is an adjacent pair of opposite nonzero signs; each is
/// refined by Brent's method.
fn sign_scan<F>(mut f: F, lo: f64, hi: f64, p: &RatioProblem) -> Result<ScanOutcome, NumError>
where
    F: FnMut(f64) -> Result<f64, NumError>,
{
    let n = p.cfg.grid_n.max(16);
    let mut pos = 0usize;
    let mut neg = 0usize;
    let mut zeros = 0usize;
    // Track the last nonzero sample so runs of underflow zeros between two
    // opposite signs still register as one crossing.
    let mut last_nonzero: Option<(f64, f64)> = None;
    let mut crossings = Vec::new();
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let v = f(x)?;
        if v == 0.0 {
            zeros += 1;
            continue;
        }
        if v > 0.0 {
            pos += 1;
        } else {
            neg += 1;
        }
        if let Some((px, pv)) = last_nonzero {
            if pv * v < 0.0 && crossings.len() < 16 {
                let root = match find_root(&mut f, px, x, &p.cfg) {
                    Ok(r) => r.root,
                    Err(_) => 0.5 * (px + x),
                };
                crossings.push(root);
            }
        }
        last_nonzero = Some((x, v));
    }
    let class = if neg == 0 && pos > 0 {
        SignClass::Positive
    } else if pos == 0 && neg > 0 {
        SignClass::Negative
    } else {
        SignClass::Mixed(crossings)
    };
    Ok(ScanOutcome { class, zeros })
}

/// Re-refine grid-level direction changes of f'/g' against the symbolic
/// derivative (f'/g')' when it is evaluable: Brent on a one-cell bracket.
fn refine_changes(
    mut segments: Vec<crate::numerics::MonotoneSegment>,
    mut changes: Vec<f64>,
    p: &RatioProblem,
    derived: &DerivedExprs,
) -> (Vec<crate::numerics::MonotoneSegment>, Vec<f64>) {
    let (lo, hi) = p.scan_interval();
    let cell = (hi - lo) / (p.cfg.grid_n.max(16) - 1) as f64;
    for (k, c) in changes.iter_mut().enumerate() {
        let bl = (*c - cell).max(lo);
        let br = (*c + cell).min(hi);
        if let Ok(r) = find_root(
            |x| evaluate(&derived.xi_prime, &p.var, x, &p.cfg),
            bl,
            br,
            &p.cfg,
        ) {
            *c = r.root;
            if k < segments.len() {
                segments[k].hi = r.root;
                segments[k].breakpoint_residual = r.f_root.abs();
            }
            if k + 1 < segments.len() {
                segments[k + 1].lo = r.root;
            }
        }
    }
    (segments, changes)
}

#[derive(Clone, Copy, PartialEq)]
enum WhichSide {
    A,
    B,
}

fn endpoint_data(p: &RatioProblem, derived: &DerivedExprs, which: WhichSide) -> EndpointData {
    let at_inf = which == WhichSide::B && p.b == Bound::PosInf;
    if at_inf {
        return EndpointData {
            f: limit_value(&p.f, p, LimitPoint::PosInf),
            g: limit_value(&p.g, p, LimitPoint::PosInf),
            ratio: limit_value(
                &Expr::bin(BinOp::Div, p.f.clone(), p.g.clone()),
                p,
                LimitPoint::PosInf,
            ),
            hopital: limit_value(&derived.xi, p, LimitPoint::PosInf),
        };
    }

    let (x0, side) = match which {
        WhichSide::A => (p.a, Side::Above),
        WhichSide::B => (p.effective_hi(), Side::Below),
    };
    let lp = LimitPoint::Finite { x: x0, side };

    let f_end = value_or_limit(&p.f, p, x0, lp);
    let g_end = value_or_limit(&p.g, p, x0, lp);

    // Zero test for g at the endpoint, relative to g's interior size.
    let g_scale = interior_scale(&p.g, p);
    let g_zero = match g_end.estimate() {
        Some(v) => v.abs() <= 4.0 * f64::EPSILON * g_scale.max(1e-300),
        None => false,
    };

    let f_scale = interior_scale(&p.f, p);
    let f_zero = match f_end.estimate() {
        Some(v) => v.abs() <= 4.0 * f64::EPSILON * f_scale.max(1e-300),
        None => false,
    };

    let ratio = if g_zero {
        if f_zero {
            // 0/0: extrapolate the quotient itself.
            limit_value(&Expr::bin(BinOp::Div, p.f.clone(), p.g.clone()), p, lp)
        } else if let Some(fv) = f_end.estimate() {
            // f stays away from zero while g vanishes; g > 0 inside, so the
            // quotient runs off with the sign of f.
            EndpointValue::Diverges { sign: fv.signum() }
        } else if let Some(s) = f_end.diverges_sign() {
            EndpointValue::Diverges { sign: s }
        } else {
            limit_value(&Expr::bin(BinOp::Div, p.f.clone(), p.g.clone()), p, lp)
        }
    } else {
        match (f_end.estimate(), g_end.estimate()) {
            (Some(fv), Some(gv)) if gv != 0.0 => {
                let v = fv / gv;
                match (&f_end, &g_end) {
                    (EndpointValue::Value { .. }, EndpointValue::Value { .. }) => {
                        EndpointValue::Value { value: v }
                    }
                    _ => EndpointValue::Limit {
                        value: v,
                        error_estimate: 1e-8 * (1.0 + v.abs()),
                    },
                }
            }
            _ => limit_value(&Expr::bin(BinOp::Div, p.f.clone(), p.g.clone()), p, lp),
        }
    };

    // Hôpital derivative at the endpoint: direct evaluation, then one more
    // symbolic level (f''/g'' is the limit of f'/g' at a 0/0 point), then a
    // numeric limit.
    let hopital = match evaluate(&derived.xi, &p.var, x0, &p.cfg) {
        Ok(v) => EndpointValue::Value { value: v },
        Err(_) => {
            let fpp = simplify(&differentiate(&derived.fp, &p.var));
            let gpp = simplify(&differentiate(&derived.gp, &p.var));
            let xi2 = simplify(&Expr::bin(BinOp::Div, fpp, gpp));
            match evaluate(&xi2, &p.var, x0, &p.cfg) {
                Ok(v) => EndpointValue::Value { value: v },
                Err(_) => limit_value(&derived.xi, p, lp),
            }
        }
    };

    EndpointData {
        f: f_end,
        g: g_end,
        ratio,
        hopital,
    }
}

/// Max |expr| over a coarse interior grid; 0.0 if nothing evaluates.
pub(crate) fn interior_scale(e: &Expr, p: &RatioProblem) -> f64 {
    let (lo, hi) = p.scan_interval();
    let mut best = 0.0f64;
    for i in 0..64 {
        let x = lo + (hi - lo) * (i as f64 + 0.5) / 64.0;
        if let Ok(v) = evaluate(e, &p.var, x, &p.cfg) {
            best = best.max(v.abs());
        }
    }
    best
}

fn value_or_limit(e: &Expr, p: &RatioProblem, x0: f64, lp: LimitPoint) -> EndpointValue {
    match evaluate(e, &p.var, x0, &p.cfg) {
        Ok(v) => EndpointValue::Value { value: v },
        Err(_) => limit_value(e, p, lp),
    }
}

fn limit_value(e: &Expr, p: &RatioProblem, lp: LimitPoint) -> EndpointValue {
    match limit_at(|x| evaluate(e, &p.var, x, &p.cfg), lp, &p.cfg) {
        Ok(out) => match out.value {
            LimitValue::Finite(v) => EndpointValue::Limit {
                value: v,
                error_estimate: out.error_estimate,
            },
            LimitValue::Diverges(s) => EndpointValue::Diverges { sign: s },
        },
        Err(e) => EndpointValue::Unknown {
            reason: e.to_string(),
        },
    }
}
