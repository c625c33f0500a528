//! Monotone segmentation of a sampled function.
//!
//! A uniform grid is classified cell-by-cell into rising / falling / flat
//! (relative hysteresis), compressed into runs, and each direction change is
//! refined by bracketed root-finding on a central-difference derivative.
//! Plateaus are absorbed into the adjacent direction (recorded as non-strict
//! warnings) unless they open the interval or span it entirely, in which case
//! they surface as genuine flat segments — that is what a constant prefix
//! f ≡ λg looks like from the outside.

use super::{find_root, NumError, NumericConfig};

/// Relative threshold under which successive samples count as equal. Sampled
/// values route through quadrature and cancellation-prone subexpressions, so
/// their noise floor sits a few orders above f64 eps; 1e-11 absorbs that
/// while staying far below any step the classification rules act on.
pub const FLAT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Up,
    Down,
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MonotoneSegment {
    pub lo: f64,
    pub hi: f64,
    pub direction: Direction,
    /// |central-difference derivative| at the breakpoint that closes this
    /// segment (0 when the segment ends at the interval boundary or the
    /// breakpoint came from a plateau bisection).
    pub breakpoint_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    pub segments: Vec<MonotoneSegment>,
    /// Refined direction-change abscissae, one between consecutive segments.
    pub changes: Vec<f64>,
    pub warnings: Vec<String>,
}

impl Segmentation {
    /// Directions with flats dropped, e.g. [Up, Down] for a single hump.
    pub fn direction_pattern(&self) -> Vec<Direction> {
        self.segments
            .iter()
            .map(|s| s.direction)
            .filter(|d| *d != Direction::Flat)
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Run {
    class: i8, // +1 up, -1 down, 0 flat
    first_cell: usize,
    last_cell: usize,
}

pub fn segment_monotone<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    cfg: &NumericConfig,
) -> Result<Segmentation, NumError>
where
    F: FnMut(f64) -> Result<f64, NumError>,
{
    assert!(lo < hi, "segment_monotone needs a nonempty interval");
    let n = cfg.grid_n.max(16);
    let span = hi - lo;
    let xs: Vec<f64> = (0..n)
        .map(|i| lo + span * i as f64 / (n - 1) as f64)
        .collect();
    let mut ys = Vec::with_capacity(n);
    for &x in &xs {
        ys.push(f(x)?);
    }

    // Cell classification with relative hysteresis.
    let classes: Vec<i8> = ys
        .windows(2)
        .map(|w| {
            let scale = 1.0 + w[0].abs().max(w[1].abs());
            let d = w[1] - w[0];
            if d > FLAT_TOL * scale {
                1
            } else if d < -FLAT_TOL * scale {
                -1
            } else {
                0
            }
        })
        .collect();

    let mut runs: Vec<Run> = Vec::new();
    for (i, &cl) in classes.iter().enumerate() {
        match runs.last_mut() {
            Some(r) if r.class == cl => r.last_cell = i,
            _ => runs.push(Run {
                class: cl,
                first_cell: i,
                last_cell: i,
            }),
        }
    }

    let mut warnings = Vec::new();
    let mut segments: Vec<MonotoneSegment> = Vec::new();
    let mut changes: Vec<f64> = Vec::new();

    // Entirely flat?
    if runs.iter().all(|r| r.class == 0) {
        segments.push(MonotoneSegment {
            lo,
            hi,
            direction: Direction::Flat,
            breakpoint_residual: 0.0,
        });
        return Ok(Segmentation {
            segments,
            changes,
            warnings,
        });
    }

    let cell_w = span / (n - 1) as f64;
    let y_scale = 1.0 + ys.iter().fold(0.0f64, |m, v| m.abs().max(v.abs()));
    let tight = |a: usize, b: usize| -> bool {
        // Run values stay within the flat band end to end (no slow drift).
        let slice = &ys[a..=b + 1];
        let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in slice {
            mn = mn.min(v);
            mx = mx.max(v);
        }
        mx - mn <= 8.0 * FLAT_TOL * y_scale
    };

    // Reclassify drifting "flat" runs by their cumulative drift so that a
    // shallow slope is not mistaken for constancy.
    let runs: Vec<Run> = runs
        .into_iter()
        .map(|r| {
            if r.class == 0 && !tight(r.first_cell, r.last_cell) {
                let drift = ys[r.last_cell + 1] - ys[r.first_cell];
                Run {
                    class: if drift > 0.0 { 1 } else { -1 },
                    ..r
                }
            } else {
                r
            }
        })
        .collect();
    // Merge neighbours that collapsed into the same class.
    let mut merged: Vec<Run> = Vec::new();
    for r in runs {
        match merged.last_mut() {
            Some(m) if m.class == r.class => m.last_cell = r.last_cell,
            _ => merged.push(r),
        }
    }
    let runs = merged;

    let mut current_dir: Option<i8> = None;
    let mut seg_start = lo;
    let mut pending_flat: Option<Run> = None;
    let mut leading_flat: Option<Run> = None;

    let dir_of = |c: i8| if c > 0 { Direction::Up } else { Direction::Down };

    for (ri, run) in runs.iter().enumerate() {
        if run.class == 0 {
            if current_dir.is_none() {
                leading_flat = Some(*run);
            } else {
                pending_flat = Some(*run);
                let cells = run.last_cell - run.first_cell + 1;
                if cells >= 3 && ri + 1 == runs.len() {
                    warnings.push(format!(
                        "monotone only non-strictly: trailing plateau of {cells} cells absorbed"
                    ));
                }
            }
            continue;
        }
        match current_dir {
            None => {
                if let Some(fl) = leading_flat.take() {
                    let cells = fl.last_cell - fl.first_cell + 1;
                    if cells >= 3 && tight(fl.first_cell, fl.last_cell) {
                        // Genuine constant prefix; locate the departure point.
                        let flat_val = ys[fl.first_cell];
                        let a = xs[fl.last_cell];
                        let b = xs[run.first_cell + 1];
                        let alpha = bisect_departure(&mut f, a, b, flat_val, y_scale)?;
                        segments.push(MonotoneSegment {
                            lo,
                            hi: alpha,
                            direction: Direction::Flat,
                            breakpoint_residual: 0.0,
                        });
                        changes.push(alpha);
                        seg_start = alpha;
                    }
                    // Short or drifty leading flats just shift the start.
                }
                current_dir = Some(run.class);
            }
            Some(d) if d == run.class => {
                if let Some(fl) = pending_flat.take() {
                    let cells = fl.last_cell - fl.first_cell + 1;
                    if cells >= 3 {
                        warnings.push(format!(
                            "monotone only non-strictly: interior plateau of {cells} cells absorbed"
                        ));
                    }
                }
            }
            Some(d) => {
                // Direction change. The bracket runs from the end of the core
                // of the previous direction run to the start of this one,
                // spanning any plateau in between.
                let left_cell = match pending_flat.take() {
                    Some(fl) => fl.first_cell,
                    None => run.first_cell,
                }
                .saturating_sub(1);
                let xl = xs[left_cell];
                let xr = xs[(run.first_cell + 1).min(n - 1)];
                let (bp, residual, note) =
                    refine_change(&mut f, xl, xr, lo, hi, span, cfg)?;
                if let Some(msg) = note {
                    warnings.push(msg);
                }
                if bp - lo < cell_w || hi - bp < cell_w {
                    warnings.push(format!(
                        "direction change at {bp} sits within one grid cell of the boundary"
                    ));
                }
                if run.last_cell == run.first_cell && ri + 1 < runs.len() {
                    warnings.push(format!(
                        "single-cell run after the change at {bp}: grid resolution limit"
                    ));
                }
                segments.push(MonotoneSegment {
                    lo: seg_start,
                    hi: bp,
                    direction: dir_of(d),
                    breakpoint_residual: residual,
                });
                changes.push(bp);
                seg_start = bp;
                current_dir = Some(run.class);
            }
        }
    }

    if let Some(d) = current_dir {
        segments.push(MonotoneSegment {
            lo: seg_start,
            hi,
            direction: dir_of(d),
            breakpoint_residual: 0.0,
        });
    } else if let Some(fl) = leading_flat {
        // Directional runs never arrived; everything after reclassification
        // was flat (can happen when drift reclassification merged it all).
        let _ = fl;
        segments.push(MonotoneSegment {
            lo,
            hi,
            direction: Direction::Flat,
            breakpoint_residual: 0.0,
        });
    }

    Ok(Segmentation {
        segments,
        changes,
        warnings,
    })
}

/// Brent on a central-difference derivative; falls back to the bracket
/// midpoint when the derivative does not change sign across it (plateau of
/// exact zeros).
fn refine_change<F>(
    f: &mut F,
    xl: f64,
    xr: f64,
    lo: f64,
    hi: f64,
    span: f64,
    cfg: &NumericConfig,
) -> Result<(f64, f64, Option<String>), NumError>
where
    F: FnMut(f64) -> Result<f64, NumError>,
{
    let delta = span * 3e-6;
    // Keep the probe stencil inside the sampled interval; evaluability is
    // only guaranteed there.
    let xl = xl.max(lo + delta);
    let xr = xr.min(hi - delta);
    if xl >= xr {
        return Ok((
            0.5 * (xl + xr),
            0.0,
            Some("direction change hard against the boundary; midpoint taken".into()),
        ));
    }
    let mut d = |x: f64| -> Result<f64, NumError> {
        let a = f(x - delta)?;
        let b = f(x + delta)?;
        Ok((b - a) / (2.0 * delta))
    };
    match find_root(&mut d, xl, xr, cfg) {
        Ok(r) => Ok((r.root, r.f_root.abs(), None)),
        Err(NumError::NoBracket { .. }) => Ok((
            0.5 * (xl + xr),
            0.0,
            Some(format!(
                "no derivative sign change across [{xl}, {xr}]; breakpoint taken at the midpoint"
            )),
        )),
        Err(e) => Err(e),
    }
}

/// First abscissa in [a, b] where f leaves the flat band around `flat_val`.
fn bisect_departure<F>(
    f: &mut F,
    a: f64,
    b: f64,
    flat_val: f64,
    y_scale: f64,
) -> Result<f64, NumError>
where
    F: FnMut(f64) -> Result<f64, NumError>,
{
    let band = 8.0 * FLAT_TOL * y_scale;
    let departed = |v: f64| (v - flat_val).abs() > band;
    let mut lo = a;
    let mut hi = b;
    if !departed(f(b)?) {
        return Ok(b);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if departed(f(mid)?) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON * (1.0 + lo.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
