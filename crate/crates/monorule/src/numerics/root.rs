//! Brent's method over fallible functions.

use super::{NumError, NumericConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult {
    pub root: f64,
    pub f_root: f64,
    pub iterations: u32,
    /// Final bracketing interval.
    pub bracket: (f64, f64),
}

const MAX_ITER: u32 = 200;

/// Finds a root of `f` on `[lo, hi]`, which must bracket a sign change.
/// Terminates when the bracket width is at most `root_tol·(1+|root|)`.
pub fn find_root<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    cfg: &NumericConfig,
) -> Result<RootResult, NumError>
where
    F: FnMut(f64) -> Result<f64, NumError>,
{
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(RootResult {
            root: a,
            f_root: 0.0,
            iterations: 0,
            bracket: (a, a),
        });
    }
    if fb == 0.0 {
        return Ok(RootResult {
            root: b,
            f_root: 0.0,
            iterations: 0,
            bracket: (b, b),
        });
    }
    if fa.signum() == fb.signum() {
        return Err(NumError::NoBracket { lo, hi });
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = b - a;

    for iter in 1..=MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 0.5 * cfg.root_tol * (1.0 + b.abs());
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(RootResult {
                root: b,
                f_root: fb,
                iterations: iter,
                bracket: if b <= c { (b, c) } else { (c, b) },
            });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Inverse quadratic interpolation / secant step.
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q0 * (q0 - r) - (b - a) * (r - 1.0)),
                    (q0 - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 {
            d
        } else {
            tol1.copysign(xm)
        };
        fb = f(b)?;
    }
    Err(NumError::MaxIterations(format!(
        "root bracket [{a}, {b}] did not shrink below tolerance"
    )))
}
