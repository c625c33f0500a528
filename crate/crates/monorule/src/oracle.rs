//! Brute-force oracle: dense sampling of f/g itself.
//!
//! Deliberately independent of the rule engine — no Hôpital derivative, no
//! cross product, no shared segmentation. The oracle samples the quotient on
//! a uniform grid, reads direction runs off the samples with a relative
//! hysteresis, refines each turn by local re-sampling, and compares the
//! result against a claimed shape. If the two ever disagree, one of them is
//! wrong, which is the point.

use serde::Serialize;

use crate::expr::Expr;
use crate::numerics::{evaluate, Direction, NumError, NumericConfig};
use crate::shape::{DirectedPiece, RatioProblem, ShapeClass};

/// Relative hysteresis for calling two samples different.
pub const ORACLE_TOL: f64 = 1e-9;
/// A turn agrees with a prediction when within this fraction of the span.
pub const TURN_TOL: f64 = 1e-4;

#[derive(Debug, Clone, thiserror::Error)]
pub enum OracleError {
    #[error("oracle evaluation failed at x = {x}: {source}")]
    Eval { x: f64, source: NumError },
    #[error("trace needs at least 16 points, got {0}")]
    TooFew(usize),
}

#[derive(Debug, Clone)]
pub struct SampleTrace {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

/// Uniform samples of f/g on the inset interval. Any evaluation failure
/// aborts with its location: the oracle does not paper over bad points.
pub fn sample_trace(p: &RatioProblem, n: usize) -> Result<SampleTrace, OracleError> {
    if n < 16 {
        return Err(OracleError::TooFew(n));
    }
    let (lo, hi) = p.scan_interval();
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        xs.push(x);
        ys.push(ratio_at(p, x)?);
    }
    Ok(SampleTrace { xs, ys })
}

fn ratio_at(p: &RatioProblem, x: f64) -> Result<f64, OracleError> {
    let f = evaluate(&p.f, &p.var, x, &p.cfg).map_err(|source| OracleError::Eval { x, source })?;
    let g = evaluate(&p.g, &p.var, x, &p.cfg).map_err(|source| OracleError::Eval { x, source })?;
    if g == 0.0 {
        return Err(OracleError::Eval {
            x,
            source: NumError::Domain {
                what: "division by zero in f/g".to_string(),
                x,
            },
        });
    }
    Ok(f / g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectedTurn {
    pub x: f64,
    /// Up after the turn (a minimum) or down after the turn (a maximum).
    pub upward: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectedShape {
    pub pieces: Vec<DirectedPiece>,
    pub turns: Vec<DetectedTurn>,
}

impl DetectedShape {
    pub fn directions(&self) -> Vec<Direction> {
        self.pieces.iter().map(|p| p.direction).collect()
    }

    pub fn direction_changes(&self) -> usize {
        self.turns.len()
    }
}

/// Read direction runs off a trace. Adjacent samples closer than
/// `ORACLE_TOL·(1+scale)` are level; level stretches between same-direction
/// runs are absorbed, long level stretches become flat pieces. Each turn is
/// placed by a parabola through the three samples around the extremum.
pub fn detect_shape(trace: &SampleTrace) -> DetectedShape {
    let n = trace.xs.len();
    let classes: Vec<i8> = trace
        .ys
        .windows(2)
        .map(|w| {
            let tol = ORACLE_TOL * (1.0 + w[0].abs().max(w[1].abs()));
            let d = w[1] - w[0];
            if d > tol {
                1
            } else if d < -tol {
                -1
            } else {
                0
            }
        })
        .collect();

    // Run-length encode.
    let mut runs: Vec<(i8, usize, usize)> = Vec::new(); // (class, first cell, last cell)
    for (i, &c) in classes.iter().enumerate() {
        match runs.last_mut() {
            Some(r) if r.0 == c => r.2 = i,
            _ => runs.push((c, i, i)),
        }
    }

    // Short level runs between same-direction neighbours are slope noise;
    // absorb them. Long ones (or ones between opposite directions) stand.
    const FLAT_KEEP: usize = 24;
    let mut kept: Vec<(i8, usize, usize)> = Vec::new();
    for run in runs {
        if run.0 == 0 && run.2 - run.1 + 1 < FLAT_KEEP {
            continue;
        }
        match kept.last_mut() {
            Some(k) if k.0 == run.0 => k.2 = run.2,
            _ => kept.push(run),
        }
    }
    // Absorbing short flats can make same-direction runs adjacent.
    let mut merged: Vec<(i8, usize, usize)> = Vec::new();
    for run in kept {
        match merged.last_mut() {
            Some(k) if k.0 == run.0 => k.2 = run.2,
            _ => merged.push(run),
        }
    }

    let mut pieces = Vec::new();
    let mut turns = Vec::new();
    let mut start_x = trace.xs[0];
    for (ri, run) in merged.iter().enumerate() {
        let dir = match run.0 {
            1 => Direction::Up,
            -1 => Direction::Down,
            _ => Direction::Flat,
        };
        let end_x = if ri + 1 == merged.len() {
            trace.xs[n - 1]
        } else {
            // Boundary with the next run; refined below if it is a turn.
            trace.xs[run.2 + 1]
        };
        let mut boundary = end_x;
        if ri + 1 < merged.len() {
            let next = merged[ri + 1];
            if run.0 != 0 && next.0 == -run.0 {
                // A genuine turn: locate the extremal sample between the
                // run cores and refine with a parabola vertex.
                let span_lo = run.2;
                let span_hi = (next.1 + 1).min(n - 1);
                let want_max = run.0 == 1;
                let mut best = span_lo;
                for i in span_lo..=span_hi {
                    let better = if want_max {
                        trace.ys[i] > trace.ys[best]
                    } else {
                        trace.ys[i] < trace.ys[best]
                    };
                    if better {
                        best = i;
                    }
                }
                let x = parabola_vertex(trace, best);
                turns.push(DetectedTurn {
                    x,
                    upward: next.0 == 1,
                });
                boundary = x;
            }
        }
        pieces.push(DirectedPiece {
            lo: start_x,
            hi: boundary,
            direction: dir,
        });
        start_x = boundary;
    }
    if pieces.is_empty() {
        pieces.push(DirectedPiece {
            lo: trace.xs[0],
            hi: trace.xs[n - 1],
            direction: Direction::Flat,
        });
    }
    DetectedShape { pieces, turns }
}

/// Vertex of the parabola through samples i−1, i, i+1 (clamped inward).
fn parabola_vertex(trace: &SampleTrace, i: usize) -> f64 {
    let n = trace.xs.len();
    let i = i.clamp(1, n - 2);
    let (x0, x1, x2) = (trace.xs[i - 1], trace.xs[i], trace.xs[i + 1]);
    let (y0, y1, y2) = (trace.ys[i - 1], trace.ys[i], trace.ys[i + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    if denom == 0.0 || !denom.is_finite() {
        return x1;
    }
    let h = x1 - x0;
    let v = x1 + h * 0.5 * (y0 - y2) / denom;
    v.clamp(x0, x2)
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleVerdict {
    pub agrees: bool,
    /// Direction changes the oracle saw.
    pub oscillations_observed: usize,
    /// Largest |detected − predicted| over matched turning points.
    pub worst_discrepancy: f64,
    pub details: Vec<String>,
}

/// Check a claimed shape against dense ratio samples: the direction
/// sequences must match and each predicted turning point must sit within
/// `TURN_TOL`·span of the detected one (after local refinement).
pub fn verify(p: &RatioProblem, shape: &ShapeClass, n: usize) -> Result<OracleVerdict, OracleError> {
    let trace = sample_trace(p, n.max(64))?;
    let mut detected = detect_shape(&trace);

    // Refine each detected turn: three rounds of 10x re-sampling in a
    // shrinking window.
    let span = p.span();
    let mut refined_turns = Vec::new();
    for t in &detected.turns {
        let mut x = t.x;
        let mut w = span / (n.max(64) as f64) * 2.0;
        for _ in 0..3 {
            match refine_turn(p, x, w, t.upward) {
                Ok(nx) => x = nx,
                Err(_) => break,
            }
            w /= 10.0;
        }
        refined_turns.push(DetectedTurn { x, upward: t.upward });
    }
    detected.turns = refined_turns.clone();

    let predicted = shape.directed_runs(p.a, p.effective_hi());
    let mut details = Vec::new();

    let pred_dirs: Vec<Direction> = predicted.iter().map(|q| q.direction).collect();
    let det_dirs = detected.directions();
    let mut agrees = pred_dirs == det_dirs;
    if !agrees {
        // A flat run is "no detectable direction" — the samples sit below
        // the hysteresis band, as in an asymptotic tail — so it can never
        // contradict a monotone claim. Compare with flats elided.
        if resolved_dirs(&pred_dirs) == resolved_dirs(&det_dirs) {
            agrees = true;
            details.push(format!(
                "sequences match up to below-resolution flat stretches: \
                 predicted {pred_dirs:?}, observed {det_dirs:?}"
            ));
        } else {
            details.push(format!(
                "direction sequences differ: predicted {pred_dirs:?}, observed {det_dirs:?}"
            ));
        }
    }

    // Match turning points in order.
    let predicted_turns: Vec<(f64, bool)> = predicted
        .windows(2)
        .filter(|w| {
            w[0].direction != Direction::Flat
                && w[1].direction != Direction::Flat
                && w[0].direction != w[1].direction
        })
        .map(|w| (w[1].lo, w[1].direction == Direction::Up))
        .collect();

    let mut worst = 0.0f64;
    if predicted_turns.len() == refined_turns.len() {
        for (pt, dt) in predicted_turns.iter().zip(&refined_turns) {
            let dist = (pt.0 - dt.x).abs();
            worst = worst.max(dist);
            if pt.1 != dt.upward {
                agrees = false;
                details.push(format!(
                    "turn at {:.6}: predicted {} observed {}",
                    pt.0,
                    sense_name(pt.1),
                    sense_name(dt.upward)
                ));
            }
            if dist > TURN_TOL * span {
                agrees = false;
                details.push(format!(
                    "turn location off by {dist:.3e} (predicted {:.9}, observed {:.9})",
                    pt.0, dt.x
                ));
            }
        }
    } else if agrees {
        // Directions matched but turn counts differ (flat pieces involved).
        details.push(format!(
            "turn counts differ: predicted {}, observed {}",
            predicted_turns.len(),
            refined_turns.len()
        ));
    }

    Ok(OracleVerdict {
        agrees,
        oscillations_observed: detected.direction_changes(),
        worst_discrepancy: worst,
        details,
    })
}

fn sense_name(upward: bool) -> &'static str {
    if upward {
        "down-up"
    } else {
        "up-down"
    }
}

/// Direction sequence with flat runs dropped and adjacent equal runs merged.
fn resolved_dirs(dirs: &[Direction]) -> Vec<Direction> {
    let mut out: Vec<Direction> = Vec::new();
    for &d in dirs {
        if d == Direction::Flat {
            continue;
        }
        if out.last() != Some(&d) {
            out.push(d);
        }
    }
    out
}

/// One refinement round: 21 samples across [x−w, x+w] (clamped to the scan
/// interval), parabola vertex at the extremum.
fn refine_turn(p: &RatioProblem, x: f64, w: f64, upward: bool) -> Result<f64, OracleError> {
    let (lo, hi) = p.scan_interval();
    let a = (x - w).max(lo);
    let b = (x + w).min(hi);
    if !(a < b) {
        return Ok(x);
    }
    let m = 21usize;
    let mut xs = Vec::with_capacity(m);
    let mut ys = Vec::with_capacity(m);
    for i in 0..m {
        let xi = a + (b - a) * i as f64 / (m - 1) as f64;
        xs.push(xi);
        ys.push(ratio_at(p, xi)?);
    }
    let mut best = 0usize;
    for i in 1..m {
        let better = if upward { ys[i] < ys[best] } else { ys[i] > ys[best] };
        if better {
            best = i;
        }
    }
    let t = SampleTrace { xs, ys };
    Ok(parabola_vertex(&t, best))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convexity {
    Convex,
    Concave,
    Neither,
}

/// Midpoint-chord convexity test on low-discrepancy point pairs:
/// F((u+v)/2) ≤ (F(u)+F(v))/2 for all pairs ⟹ convex (within tolerance).
pub fn convexity_probe<F>(mut f: F, lo: f64, hi: f64) -> Result<Convexity, NumError>
where
    F: FnMut(f64) -> Result<f64, NumError>,
{
    // Weyl sequences with irrational strides decorrelate u and v.
    const PHI_CONJ: f64 = 0.618_033_988_749_894_9;
    const SQRT2_FRAC: f64 = 0.414_213_562_373_095_1;
    let span = hi - lo;
    let mut convex_ok = true;
    let mut concave_ok = true;
    for k in 1..=64u32 {
        let u = lo + span * ((k as f64 * PHI_CONJ).fract());
        let v = lo + span * ((k as f64 * SQRT2_FRAC).fract());
        if (u - v).abs() < span * 1e-3 {
            continue;
        }
        let fu = f(u)?;
        let fv = f(v)?;
        let fm = f(0.5 * (u + v))?;
        let chord = 0.5 * (fu + fv);
        let tol = 1e-10 * (1.0 + chord.abs().max(fm.abs()));
        if fm > chord + tol {
            convex_ok = false;
        }
        if fm < chord - tol {
            concave_ok = false;
        }
        if !convex_ok && !concave_ok {
            return Ok(Convexity::Neither);
        }
    }
    Ok(match (convex_ok, concave_ok) {
        (true, true) => Convexity::Convex, // affine: both hold
        (true, false) => Convexity::Convex,
        (false, true) => Convexity::Concave,
        (false, false) => Convexity::Neither,
    })
}

/// Convexity of an expression over [lo, hi].
pub fn convexity_probe_expr(
    e: &Expr,
    var: &str,
    lo: f64,
    hi: f64,
    cfg: &NumericConfig,
) -> Result<Convexity, NumError> {
    convexity_probe(|x| evaluate(e, var, x, cfg), lo, hi)
}

/// Convexity of f∘g⁻¹ on g([lo, hi]) for strictly monotone g: the chord test
/// runs in g-space, with g inverted by bisection on a bracketing table plus
/// a secant polish.
pub fn convexity_of_composition(
    f: &Expr,
    g: &Expr,
    p: &RatioProblem,
) -> Result<Convexity, NumError> {
    let (lo, hi) = p.scan_interval();
    // Monotone table of (x, g(x)).
    let n = 512usize;
    let mut table = Vec::with_capacity(n);
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        table.push((x, evaluate(g, &p.var, x, &p.cfg)?));
    }
    let increasing = table[n - 1].1 > table[0].1;
    let (ylo, yhi) = if increasing {
        (table[0].1, table[n - 1].1)
    } else {
        (table[n - 1].1, table[0].1)
    };

    let invert = |y: f64| -> Result<f64, NumError> {
        // Bracket from the table, then bisect g(x) − y.
        let mut i = 0;
        while i + 1 < n {
            let (alo, ahi) = (table[i].1, table[i + 1].1);
            let (mn, mx) = (alo.min(ahi), alo.max(ahi));
            if y >= mn && y <= mx {
                break;
            }
            i += 1;
        }
        if i + 1 >= n {
            return Err(NumError::NoBracket {
                lo: ylo,
                hi: yhi,
            });
        }
        let mut a = table[i].0;
        let mut b = table[i + 1].0;
        let mut fa = table[i].1 - y;
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            let fm = evaluate(g, &p.var, mid, &p.cfg)? - y;
            if fm == 0.0 || (b - a).abs() <= 1e-14 * (1.0 + mid.abs()) {
                return Ok(mid);
            }
            if (fa > 0.0) == (fm > 0.0) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    };

    convexity_probe(
        |y| {
            let x = invert(y)?;
            evaluate(f, &p.var, x, &p.cfg)
        },
        ylo,
        yhi,
    )
}
