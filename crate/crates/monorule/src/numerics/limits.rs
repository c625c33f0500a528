//! One-sided limits by extrapolation ladders.
//!
//! Finite points get a geometric ladder with polynomial (Neville)
//! extrapolation in the offset h; if that fails to settle — the signature of
//! a logarithmic singularity, where corrections die like 1/log — a second
//! ladder walks x = point ∓ e^(-L) for evenly spaced L and extrapolates in
//! t = 1/L, first by a least-squares rational fit (quotients of log-singular
//! integrals are rational in 1/L up to exponentially small terms), then by
//! Neville. The L range trades the shallow end's e^(-L) residue against the
//! deep end's evaluation noise. At +infinity a doubling ladder
//! up to the truncation cap is scanned for stabilization, geometric decay to
//! zero, or growth.

use super::{NumError, NumericConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Side {
    /// x → point⁺
    Above,
    /// x → point⁻
    Below,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitPoint {
    Finite { x: f64, side: Side },
    PosInf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitValue {
    Finite(f64),
    /// Divergence with the recorded sign (+1.0 / -1.0).
    Diverges(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitMethod {
    DirectLadder,
    LogLadder,
    TailStabilize,
    TailExtrapolate,
    TailDecay,
    TailGrowth,
}

#[derive(Debug, Clone)]
pub struct LimitOutcome {
    pub value: LimitValue,
    /// Estimated absolute error of the extrapolation (0 for divergence).
    pub error_estimate: f64,
    pub method: LimitMethod,
    /// (abscissa, value) rungs actually used.
    pub ladder: Vec<(f64, f64)>,
}

const MODE_A_TOL: f64 = 1e-8;
const MODE_B_TOL: f64 = 4e-6;
const STAB_TOL: f64 = 1e-9;
const TAIL_EXTRAP_TOL: f64 = 1e-6;

pub fn limit_at<F>(mut f: F, at: LimitPoint, cfg: &NumericConfig) -> Result<LimitOutcome, NumError>
where
    F: FnMut(f64) -> Result<f64, NumError>,
{
    match at {
        LimitPoint::Finite { x, side } => finite_limit(&mut f, x, side, cfg),
        LimitPoint::PosInf => tail_limit(&mut f, cfg),
    }
}

/// Neville extrapolation of (t_j, v_j) to t = 0. Returns the final estimate
/// and the magnitude of the last diagonal correction.
fn neville_to_zero(ts: &[f64], vs: &[f64]) -> (f64, f64) {
    let n = ts.len();
    let mut tab = vs.to_vec();
    let mut prev = tab[0];
    let mut last_delta = f64::INFINITY;
    for m in 1..n {
        for j in 0..n - m {
            tab[j] = (ts[j] * tab[j + 1] - ts[j + m] * tab[j]) / (ts[j] - ts[j + m]);
        }
        last_delta = (tab[0] - prev).abs();
        prev = tab[0];
    }
    (tab[0], last_delta)
}

/// Least-squares fit of the rational model v = (a0 + a1·t + a2·t²)/(1 + b1·t)
/// to (t_j, v_j), returning the value at t = 0 (that is, a0) and an error
/// estimate. Quotients with a logarithmic singularity follow this model in
/// t = 1/L up to exponentially small terms, and fitting instead of
/// interpolating averages the per-rung noise down rather than amplifying it
/// — the deep rungs carry evaluation noise near the f64 quadrature floor.
/// The error estimate is twice the worst shift in a0 when either end node is
/// dropped, which tracks the model bias. None when the design is degenerate
/// (e.g. near-constant data, where the columns go collinear).
fn lsrat_to_zero(ts: &[f64], vs: &[f64]) -> Option<(f64, f64)> {
    let n = ts.len();
    if n < 5 {
        return None;
    }
    let a0 = lsrat_fit(ts, vs)?;
    let mut worst = 0.0f64;
    for drop in [0, n - 1] {
        let sub_t: Vec<f64> = (0..n).filter(|&j| j != drop).map(|j| ts[j]).collect();
        let sub_v: Vec<f64> = (0..n).filter(|&j| j != drop).map(|j| vs[j]).collect();
        let a = lsrat_fit(&sub_t, &sub_v)?;
        worst = worst.max((a - a0).abs());
    }
    a0.is_finite().then_some((a0, 2.0 * worst))
}

/// Solve min ‖[1, t, t², -v·t]·coef - v‖₂ by Householder QR (columns
/// equilibrated to unit norm) and return the extrapolated coef[0].
fn lsrat_fit(ts: &[f64], vs: &[f64]) -> Option<f64> {
    let n = ts.len();
    let mut cols: [Vec<f64>; 4] = [
        vec![1.0; n],
        ts.to_vec(),
        ts.iter().map(|t| t * t).collect(),
        ts.iter().zip(vs).map(|(t, v)| -t * v).collect(),
    ];
    let mut scale = [0.0f64; 4];
    for (k, col) in cols.iter_mut().enumerate() {
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        col.iter_mut().for_each(|x| *x /= norm);
        scale[k] = norm;
    }
    let mut rhs = vs.to_vec();
    // Householder triangularization of the n×4 design.
    for k in 0..4 {
        let alpha = cols[k][k..].iter().map(|x| x * x).sum::<f64>().sqrt();
        if alpha < 1e-12 {
            return None; // effectively rank-deficient
        }
        let alpha = -alpha.copysign(cols[k][k]);
        let mut v: Vec<f64> = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2 = v.iter().map(|x| x * x).sum::<f64>();
        if vnorm2 == 0.0 {
            continue;
        }
        for col in cols.iter_mut().skip(k) {
            let dot: f64 = v.iter().zip(&col[k..]).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vnorm2;
            col[k..].iter_mut().zip(&v).for_each(|(c, a)| *c -= f * a);
        }
        let dot: f64 = v.iter().zip(&rhs[k..]).map(|(a, b)| a * b).sum();
        let f = 2.0 * dot / vnorm2;
        rhs[k..].iter_mut().zip(&v).for_each(|(c, a)| *c -= f * a);
    }
    // Back-substitute the 4×4 upper triangle.
    let mut coef = [0.0f64; 4];
    for k in (0..4).rev() {
        let mut s = rhs[k];
        for j in k + 1..4 {
            s -= cols[j][k] * coef[j];
        }
        coef[k] = s / cols[k][k];
    }
    Some(coef[0] / scale[0])
}

fn finite_limit<F>(
    f: &mut F,
    x0: f64,
    side: Side,
    cfg: &NumericConfig,
) -> Result<LimitOutcome, NumError>
where
    F: FnMut(f64) -> Result<f64, NumError>,
{
    let dir = match side {
        Side::Above => 1.0,
        Side::Below => -1.0,
    };
    let k = cfg.limit_steps.clamp(4, 24);

    // Shrink the ladder start until every rung evaluates.
    let mut h0 = 0.05 * (1.0 + x0.abs());
    let mut ladder: Option<Vec<(f64, f64)>> = None;
    let mut last_err = None;
    'outer: for _ in 0..40 {
        let mut rungs = Vec::with_capacity(k);
        for j in 0..k {
            let h = h0 / (1 << j) as f64;
            let x = x0 + dir * h;
            match f(x) {
                Ok(v) => rungs.push((h, v)),
                Err(e) => {
                    last_err = Some(e);
                    h0 /= 4.0;
                    continue 'outer;
                }
            }
        }
        ladder = Some(rungs);
        break;
    }
    let rungs = match ladder {
        Some(r) => r,
        None => {
            return Err(last_err
                .unwrap_or_else(|| NumError::NonConvergence("no evaluable ladder".into())))
        }
    };

    // Divergence screen on raw magnitudes.
    if let Some(sign) = diverging(&rungs.iter().map(|&(_, v)| v).collect::<Vec<_>>()) {
        return Ok(LimitOutcome {
            value: LimitValue::Diverges(sign),
            error_estimate: 0.0,
            method: LimitMethod::DirectLadder,
            ladder: rungs,
        });
    }

    let hs: Vec<f64> = rungs.iter().map(|&(h, _)| h).collect();
    let vs: Vec<f64> = rungs.iter().map(|&(_, v)| v).collect();
    let (est, delta) = neville_to_zero(&hs, &vs);
    if est.is_finite() && delta <= MODE_A_TOL * (1.0 + est.abs()) {
        return Ok(LimitOutcome {
            value: LimitValue::Finite(est),
            error_estimate: delta,
            method: LimitMethod::DirectLadder,
            ladder: rungs,
        });
    }

    // Log ladder. The shallow end starts at L = 14 so that O(e^{-L}) terms in
    // the 1/L expansion sit below the target accuracy. The deep end is capped
    // twice over: by the spacing of floats near x0 (the representation error
    // of x0 itself distorts deeper rungs) and at L = 26, past which integrand
    // features of width e^{-L} span too few representable abscissas for the
    // quadrature to resolve, so rung values silently lose digits.
    let ulp = (x0.abs().max(1.0) * f64::EPSILON).max(f64::MIN_POSITIVE);
    let l_cap = (-(16.0 * ulp).ln() - 0.3).min(26.0);
    let mut levels = Vec::new();
    let mut l = 14.0;
    while l <= l_cap && levels.len() < 7 {
        levels.push(l);
        l += 2.0;
    }
    let mut ts = Vec::new();
    let mut vs2 = Vec::new();
    let mut rungs2 = Vec::new();
    for &l in &levels {
        let eps = (-l).exp();
        let x = x0 + dir * eps;
        if let Ok(v) = f(x) {
            ts.push(1.0 / l);
            vs2.push(v);
            rungs2.push((eps, v));
        }
    }
    if vs2.len() >= 5 {
        if let Some(sign) = diverging(&vs2) {
            return Ok(LimitOutcome {
                value: LimitValue::Diverges(sign),
                error_estimate: 0.0,
                method: LimitMethod::LogLadder,
                ladder: rungs2,
            });
        }
        let rat = lsrat_to_zero(&ts, &vs2)
            .filter(|(est, dy)| est.is_finite() && *dy <= MODE_B_TOL * (1.0 + est.abs()));
        if let Some((est2, delta2)) = rat {
            return Ok(LimitOutcome {
                value: LimitValue::Finite(est2),
                error_estimate: delta2,
                method: LimitMethod::LogLadder,
                ladder: rungs2,
            });
        }
        let (est2, delta2) = neville_to_zero(&ts, &vs2);
        if est2.is_finite() && delta2 <= MODE_B_TOL * (1.0 + est2.abs()) {
            return Ok(LimitOutcome {
                value: LimitValue::Finite(est2),
                error_estimate: delta2,
                method: LimitMethod::LogLadder,
                ladder: rungs2,
            });
        }
    }

    Err(NumError::NonConvergence(format!(
        "one-sided limit at {x0} did not settle (last direct-ladder correction {delta:.3e})"
    )))
}

/// Growth screen: magnitudes at least doubling across the last three steps
/// and large at the end.
fn diverging(vs: &[f64]) -> Option<f64> {
    let n = vs.len();
    if n < 4 {
        return None;
    }
    let tail = &vs[n - 4..];
    let growing = tail.windows(2).all(|w| w[1].abs() >= 1.8 * w[0].abs());
    // Rungs shrink toward the point, so "later" in the ladder means closer;
    // growth along the ladder means blow-up at the point.
    if growing && tail[3].abs() > 1e8 {
        Some(tail[3].signum())
    } else {
        None
    }
}

fn tail_limit<F>(f: &mut F, cfg: &NumericConfig) -> Result<LimitOutcome, NumError>
where
    F: FnMut(f64) -> Result<f64, NumError>,
{
    let k = 8usize;
    let cap = cfg.infinity_cap;
    let mut pts: Vec<(f64, Result<f64, NumError>)> = Vec::with_capacity(k);
    for j in 0..k {
        let x = cap / (1u64 << (k - 1 - j)) as f64;
        pts.push((x, f(x)));
    }

    // Longest contiguous evaluable run, preferring the one reaching deepest
    // into the tail. Underflow-driven 0/0 failures cut the far end; domain
    // restrictions near zero cut the near end.
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (i, (_, r)) in pts.iter().enumerate() {
        match (r.is_ok(), start) {
            (true, None) => start = Some(i),
            (true, Some(_)) => {}
            (false, Some(s)) => {
                if best.map_or(true, |(bs, be)| i - s >= be - bs) {
                    best = Some((s, i));
                }
                start = None;
            }
            (false, None) => {}
        }
    }
    if let Some(s) = start {
        if best.map_or(true, |(bs, be)| k - s >= be - bs) {
            best = Some((s, k));
        }
    }
    let (s, e) = match best {
        Some(range) => range,
        None => {
            let (x, r) = pts.into_iter().next().unwrap();
            let _ = x;
            return Err(r.unwrap_err());
        }
    };
    let run: Vec<(f64, f64)> = pts[s..e]
        .iter()
        .map(|(x, r)| (*x, *r.as_ref().unwrap()))
        .collect();
    if run.len() < 3 {
        return Err(NumError::NonConvergence(
            "tail ladder has too few evaluable points".into(),
        ));
    }
    let vals: Vec<f64> = run.iter().map(|&(_, v)| v).collect();
    let n = vals.len();

    // 1) Already stabilized.
    let d1 = (vals[n - 1] - vals[n - 2]).abs();
    let d2 = (vals[n - 2] - vals[n - 3]).abs();
    let scale = 1.0 + vals[n - 1].abs();
    if d1 <= STAB_TOL * scale && d2 <= STAB_TOL * scale {
        return Ok(LimitOutcome {
            value: LimitValue::Finite(vals[n - 1]),
            error_estimate: d1,
            method: LimitMethod::TailStabilize,
            ladder: run,
        });
    }

    // 2) Polynomial extrapolation in 1/x.
    let ts: Vec<f64> = run.iter().map(|&(x, _)| 1.0 / x).collect();
    let (est, delta) = neville_to_zero(&ts, &vals);
    if est.is_finite() && delta <= TAIL_EXTRAP_TOL * (1.0 + est.abs()) {
        return Ok(LimitOutcome {
            value: LimitValue::Finite(est),
            error_estimate: delta,
            method: LimitMethod::TailExtrapolate,
            ladder: run,
        });
    }

    // 3) Geometric decay to zero. Magnitude ratios stay near 1 for a nonzero
    //    limit, so halving (or faster) across the tail pins the limit at 0.
    let m = n.min(4);
    let tail = &vals[n - m..];
    let decaying = tail
        .windows(2)
        .all(|w| w[1].abs() <= 0.5 * w[0].abs().max(f64::MIN_POSITIVE));
    if decaying && tail[m - 1].abs() <= 1e-3 * (1.0 + vals[0].abs()) {
        return Ok(LimitOutcome {
            value: LimitValue::Finite(0.0),
            error_estimate: tail[m - 1].abs(),
            method: LimitMethod::TailDecay,
            ladder: run,
        });
    }

    // 4) Growth.
    let growing = tail.windows(2).all(|w| w[1].abs() >= 2.0 * w[0].abs());
    if growing && tail[m - 1].abs() >= 1e6 * (1.0 + vals[0].abs()) {
        return Ok(LimitOutcome {
            value: LimitValue::Diverges(tail[m - 1].signum()),
            error_estimate: 0.0,
            method: LimitMethod::TailGrowth,
            ladder: run,
        });
    }

    Err(NumError::NonConvergence(
        "tail of the ladder neither stabilizes, decays, nor grows cleanly".into(),
    ))
}
