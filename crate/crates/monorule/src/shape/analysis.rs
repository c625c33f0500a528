//! The analysis driver: hypothesis checks, denominator normalization,
//! splitting at sign changes of g', and the dispatch between the one-change
//! classifier and the oscillation stitcher.

use serde::Serialize;

use super::classify::{classify_with, Classification};
use super::oscillation::oscillation_bound_with;
use super::{
    Bound, Certificate, DirectedPiece, HypothesisReport, RatioProblem, ShapeClass, ShapeError,
    SignClass, TurnSense, TurningPoint,
};
use crate::expr::simplify;
use crate::numerics::{evaluate, find_root, Direction};

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case", tag = "outcome")]
pub enum AnalysisOutcome {
    Classified(Classification),
    /// g' changes sign; analysis needs the interval split at these points.
    SplitRequired { points: Vec<f64> },
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub hypotheses: HypothesisReport,
    #[serde(flatten)]
    pub outcome: AnalysisOutcome,
    pub notes: Vec<String>,
}

pub fn analyze(p: &RatioProblem, auto_split: bool) -> Result<AnalysisReport, ShapeError> {
    let hs = super::check_hypotheses(p)?;
    let mut notes = Vec::new();

    match &hs.g_sign {
        SignClass::Positive => {}
        SignClass::Negative => {
            let mut flipped = p.clone();
            flipped.g = simplify(&flipped.g.neg());
            let mut rep = analyze(&flipped, auto_split)?;
            if let AnalysisOutcome::Classified(c) = &mut rep.outcome {
                c.shape = c.shape.clone().flipped();
                c.notes
                    .push("g < 0: analyzed f/(-g) and mirrored the verdict".to_string());
            }
            return Ok(rep);
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

    if let SignClass::Mixed(points) = &hs.gprime_sign.clone() {
        if points.is_empty() {
            return Err(ShapeError::Ineligible(format!(
                "sign of g' could not be established: {}",
                hs.facet_errors.join("; ")
            )));
        }
        if !auto_split {
            return Ok(AnalysisReport {
                hypotheses: hs,
                outcome: AnalysisOutcome::SplitRequired {
                    points: points.clone(),
                },
                notes,
            });
        }
        let classification = split_and_stitch(p, points, &mut notes)?;
        return Ok(AnalysisReport {
            hypotheses: hs,
            outcome: AnalysisOutcome::Classified(classification),
            notes,
        });
    }

    let pattern = hs.xi_pattern();
    let classification = if pattern.len() >= 2 {
        oscillation_stitch(p, &hs, &mut notes)?
    } else {
        classify_with(p, &hs)?
    };

    Ok(AnalysisReport {
        hypotheses: hs,
        outcome: AnalysisOutcome::Classified(classification),
        notes,
    })
}

/// Analyze each g'-single-signed piece and join the directed runs.
fn split_and_stitch(
    p: &RatioProblem,
    points: &[f64],
    notes: &mut Vec<String>,
) -> Result<Classification, ShapeError> {
    let mut cuts = vec![p.a];
    cuts.extend_from_slice(points);
    notes.push(format!("interval split at g' sign changes: {points:?}"));

    let mut pieces: Vec<DirectedPiece> = Vec::new();
    let mut turning_points = Vec::new();
    let mut segments = Vec::new();
    let mut certified = true;

    for (i, &lo) in cuts.iter().enumerate() {
        let mut sub = p.clone();
        sub.a = lo;
        if i + 1 < cuts.len() {
            sub.b = Bound::Finite(cuts[i + 1]);
        }
        let rep = analyze(&sub, true)?;
        let AnalysisOutcome::Classified(c) = rep.outcome else {
            return Err(ShapeError::Ineligible(
                "split piece still needs splitting".to_string(),
            ));
        };
        certified &= c.certified;
        notes.extend(
            c.notes
                .iter()
                .map(|n| format!("[{:.6}, {:.6}]: {n}", sub.a, sub.effective_hi())),
        );
        pieces.extend(c.shape.directed_runs(sub.a, sub.effective_hi()));
        turning_points.extend(c.certificate.turning_points);
        segments.extend(c.certificate.segments);
    }

    let merged = merge_runs(pieces);
    Ok(Classification {
        shape: collapse(merged, &turning_points),
        certified,
        certificate: Certificate {
            rule: "piecewise".to_string(),
            case: "auto-split".to_string(),
            endpoint_checks: vec![],
            segments,
            turning_points,
            bound: None,
        },
        notes: vec![],
    })
}

fn merge_runs(pieces: Vec<DirectedPiece>) -> Vec<DirectedPiece> {
    let mut out: Vec<DirectedPiece> = Vec::new();
    for piece in pieces {
        match out.last_mut() {
            Some(last) if last.direction == piece.direction => last.hi = piece.hi,
            _ => out.push(piece),
        }
    }
    out
}

/// Piecewise runs collapse to a plainer class when they form one of the
/// simple shapes.
fn collapse(runs: Vec<DirectedPiece>, turns: &[TurningPoint]) -> ShapeClass {
    let turn_at = |x: f64, sense: TurnSense| -> TurningPoint {
        turns
            .iter()
            .find(|t| (t.c - x).abs() <= 1e-9 * (1.0 + x.abs()))
            .copied()
            .unwrap_or(TurningPoint {
                c: x,
                sense,
                residual: f64::NAN,
                bracket: (x, x),
            })
    };
    match runs.as_slice() {
        [one] if one.direction == Direction::Up => ShapeClass::Increasing,
        [one] if one.direction == Direction::Down => ShapeClass::Decreasing,
        [d, u] if d.direction == Direction::Down && u.direction == Direction::Up => {
            ShapeClass::DownUp {
                turn: turn_at(u.lo, TurnSense::DownUp),
            }
        }
        [u, d] if u.direction == Direction::Up && d.direction == Direction::Down => {
            ShapeClass::UpDown {
                turn: turn_at(d.lo, TurnSense::UpDown),
            }
        }
        _ => ShapeClass::Piecewise { pieces: runs },
    }
}

/// Multi-change path: bound the oscillation, locate every sign change of
/// D = f'·g − f·g', and read the shape off the sign runs.
fn oscillation_stitch(
    p: &RatioProblem,
    hs: &HypothesisReport,
    notes: &mut Vec<String>,
) -> Result<Classification, ShapeError> {
    let prof = oscillation_bound_with(p, hs)?;
    let turns = cross_turning_points(p, hs)?;
    let mut certified = hs.facet_errors.is_empty();

    if turns.len() > prof.bound {
        notes.push(format!(
            "{} ratio direction changes found but the bound is {}: numerics and theory disagree",
            turns.len(),
            prof.bound
        ));
        certified = false;
    }

    // Each located turn must land in a subinterval that allows its sense.
    for t in &turns {
        let allowed = prof
            .subintervals
            .iter()
            .zip(&prof.senses)
            .any(|(&(lo, hi), &s)| t.c >= lo && t.c <= hi && s == t.sense);
        if !allowed {
            notes.push(format!(
                "turn at {:.6} ({:?}) falls outside every admissible subinterval",
                t.c, t.sense
            ));
            certified = false;
        }
    }

    // Shape from the sign runs of D between turning points.
    let first_dir = match turns.first() {
        Some(t) => match t.sense {
            TurnSense::DownUp => Direction::Down,
            TurnSense::UpDown => Direction::Up,
        },
        None => {
            // No turns at all: monotone; direction from D's sign at midpoint.
            let mid = 0.5 * (p.a + p.effective_hi());
            let v = evaluate(&hs.derived.cross, &p.var, mid, &p.cfg)?;
            if v >= 0.0 {
                Direction::Up
            } else {
                Direction::Down
            }
        }
    };
    let mut pieces = Vec::new();
    let mut start = p.a;
    let mut dir = first_dir;
    for t in &turns {
        pieces.push(DirectedPiece {
            lo: start,
            hi: t.c,
            direction: dir,
        });
        start = t.c;
        dir = if dir == Direction::Up {
            Direction::Down
        } else {
            Direction::Up
        };
    }
    pieces.push(DirectedPiece {
        lo: start,
        hi: p.effective_hi(),
        direction: dir,
    });

    notes.extend(prof.notes.iter().cloned());
    let shape = collapse(pieces, &turns);
    Ok(Classification {
        shape,
        certified,
        certificate: Certificate {
            rule: "theorem3".to_string(),
            case: "stitched".to_string(),
            endpoint_checks: vec![],
            segments: hs.hopital_segments.clone(),
            turning_points: turns,
            bound: Some(prof),
        },
        notes: vec![],
    })
}

/// All sign changes of D on the scan interval, refined by Brent's method,
/// with their senses.
fn cross_turning_points(
    p: &RatioProblem,
    hs: &HypothesisReport,
) -> Result<Vec<TurningPoint>, ShapeError> {
    let (lo, hi) = p.scan_interval();
    let n = p.cfg.grid_n.max(16);
    let mut prev: Option<(f64, f64)> = None;
    let mut turns = Vec::new();
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let v = evaluate(&hs.derived.cross, &p.var, x, &p.cfg)?;
        if v == 0.0 {
            continue;
        }
        if let Some((px, pv)) = prev {
            if pv * v < 0.0 && turns.len() < 32 {
                let r = find_root(
                    |x| evaluate(&hs.derived.cross, &p.var, x, &p.cfg),
                    px,
                    x,
                    &p.cfg,
                )?;
                turns.push(TurningPoint {
                    c: r.root,
                    sense: if pv < 0.0 {
                        TurnSense::DownUp
                    } else {
                        TurnSense::UpDown
                    },
                    residual: r.f_root.abs(),
                    bracket: r.bracket,
                });
            }
        }
        prev = Some((x, v));
    }
    Ok(turns)
}
