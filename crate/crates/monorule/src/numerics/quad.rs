//! Adaptive Gauss–Kronrod quadrature (7–15 pair) over fallible integrands.

use super::{NumError, NumericConfig};

// 15-point Kronrod abscissae (positive half) and weights, with the embedded
// 7-point Gauss weights. Classic QUADPACK values.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct Cell {
    result: f64,
    err: f64,
    /// ∫|f| estimate: the roundoff floor for this cell's achievable error.
    res_abs: f64,
}

fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<Cell, NumError>
where
    F: FnMut(f64) -> Result<f64, NumError>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center)?;

    let mut res_gauss = 0.0;
    let mut res_kronrod = f_center * WGK[7];
    let mut res_abs = res_kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for (j, wg) in WG.iter().enumerate().take(3) {
        let jtw = j * 2 + 1;
        let absc = half * XGK[jtw];
        let v1 = f(center - absc)?;
        let v2 = f(center + absc)?;
        fv1[jtw] = v1;
        fv2[jtw] = v2;
        res_gauss += wg * (v1 + v2);
        res_kronrod += WGK[jtw] * (v1 + v2);
        res_abs += WGK[jtw] * (v1.abs() + v2.abs());
    }
    res_gauss += WG[3] * f_center;
    for j in 0..4 {
        let jtwm1 = j * 2;
        if jtwm1 == 7 {
            continue;
        }
        let absc = half * XGK[jtwm1];
        let v1 = f(center - absc)?;
        let v2 = f(center + absc)?;
        fv1[jtwm1] = v1;
        fv2[jtwm1] = v2;
        res_kronrod += WGK[jtwm1] * (v1 + v2);
        res_abs += WGK[jtwm1] * (v1.abs() + v2.abs());
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let raw_err = ((res_kronrod - res_gauss) * half).abs();
    res_abs *= half.abs();
    res_asc *= half.abs();

    // QUADPACK error rescaling: sharpen the raw Gauss/Kronrod difference.
    let mut err = raw_err;
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }

    Ok(Cell {
        result: res_kronrod * half,
        err,
        res_abs,
    })
}

const MAX_DEPTH: u32 = 60;

fn refine<F>(f: &mut F, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64, NumError>
where
    F: FnMut(f64) -> Result<f64, NumError>,
{
    let cell = gk15(f, a, b)?;
    // The halved tolerance passed down the tree can drop below what a cell
    // can achieve in double precision; a cell at its roundoff floor is done.
    if cell.err <= tol
        || cell.err <= 64.0 * f64::EPSILON * cell.res_abs
        || b - a <= f64::EPSILON * (1.0 + a.abs() + b.abs())
    {
        return Ok(cell.result);
    }
    if depth >= MAX_DEPTH {
        return Err(NumError::NonConvergence(format!(
            "quadrature cell [{a}, {b}] still has error {:.3e} at depth {depth}",
            cell.err
        )));
    }
    let mid = 0.5 * (a + b);
    let left = refine(f, a, mid, 0.5 * tol, depth + 1)?;
    let right = refine(f, mid, b, 0.5 * tol, depth + 1)?;
    Ok(left + right)
}

/// Width above which the pilot pass splits the range uniformly: the 15
/// Kronrod nodes of a single panel this wide could straddle (and miss)
/// mass concentrated at a scale of ~1 near one end.
const PANEL_WIDTH: f64 = 50.0;

/// ∫_a^b f. Antisymmetric in the bounds; relative tolerance `cfg.quad_tol`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, cfg: &NumericConfig) -> Result<f64, NumError>
where
    F: FnMut(f64) -> Result<f64, NumError>,
{
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let panels = (((hi - lo) / PANEL_WIDTH).ceil() as usize).clamp(1, 64);

    // Pilot pass over the initial panels to set the relative scale.
    let mut cells = Vec::with_capacity(panels);
    let mut total = 0.0;
    for i in 0..panels {
        let pa = lo + (hi - lo) * i as f64 / panels as f64;
        let pb = lo + (hi - lo) * (i + 1) as f64 / panels as f64;
        let cell = gk15(&mut f, pa, pb)?;
        total += cell.result;
        cells.push((pa, pb, cell));
    }

    let tol = cfg.quad_tol * (1.0 + total.abs());
    let per_panel = tol / panels as f64;
    let mut v = 0.0;
    for (pa, pb, cell) in cells {
        if cell.err <= per_panel || cell.err <= 64.0 * f64::EPSILON * cell.res_abs {
            v += cell.result;
        } else {
            v += refine(&mut f, pa, pb, per_panel, 0)?;
        }
    }
    Ok(sign * v)
}
