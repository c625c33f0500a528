use monorule::catalog::b1_closed_form;
use monorule::expr::parse;
use monorule::numerics::{
    erf, evaluate, find_root, integrate, limit_at, segment_monotone, Direction, LimitMethod,
    LimitPoint, LimitValue, NumericConfig, Side,
};

const SQRT_PI: f64 = 1.7724538509055160273;

fn cfg() -> NumericConfig {
    NumericConfig::default()
}

fn ok(x: f64) -> Result<f64, monorule::numerics::NumError> {
    Ok(x)
}

// --- quadrature --------------------------------------------------------------

#[test]
fn gaussian_integral_matches_erf() {
    let c = cfg();
    for x in [0.1, 0.5, 1.0, 2.0, 3.0, 5.0] {
        let got = integrate(|t| ok((-t * t).exp()), 0.0, x, &c).unwrap();
        let want = 0.5 * SQRT_PI * erf(x);
        assert!(
            (got - want).abs() <= 1e-10 * (1.0 + want.abs()),
            "x={x}: {got} vs {want}"
        );
    }
}

#[test]
fn integrate_constant_and_orientation() {
    let c = cfg();
    let one = integrate(|_| ok(1.0), 0.0, 1.0, &c).unwrap();
    assert!((one - 1.0).abs() < 1e-14);
    let fwd = integrate(|t| ok(t.cos()), 0.25, 1.5, &c).unwrap();
    let rev = integrate(|t| ok(t.cos()), 1.5, 0.25, &c).unwrap();
    assert_eq!(fwd.to_bits(), (-rev).to_bits(), "swap of bounds flips sign");
    assert!((fwd - (1.5f64.sin() - 0.25f64.sin())).abs() < 1e-12);
}

/// Fixed-grid composite Simpson, used only as an independent cross-check.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn log_sec_integrand_matches_simpson() {
    let c = cfg();
    let f = |t: f64| (1.0 + 1.0 / t.cos()) * (1.0 / t.cos()).ln();
    let got = integrate(|t| ok(f(t)), 0.0, 0.5, &c).unwrap();
    let want = simpson(f, 1e-9, 0.5, 1_000_000);
    assert!((got - want).abs() <= 1e-9 * (1.0 + want.abs()), "{got} vs {want}");
}

#[test]
fn wide_range_gaussian_tail() {
    // The integrand underflows to zero over most of [0, x]; panel splitting
    // must not lose the mass near the origin.
    let c = cfg();
    for x in [20.0, 30.0, 40.0] {
        let got = integrate(|t| ok((-t * t).exp()), 0.0, x, &c).unwrap();
        let want = 0.5 * SQRT_PI;
        assert!((got - want).abs() <= 1e-10 * want, "x={x}: {got}");
    }
}

// --- evaluation of integral nodes --------------------------------------------

#[test]
fn integral_node_evaluates() {
    let c = cfg();
    let h = parse("int(exp(-t^2), t, 0, x)").unwrap();
    assert_eq!(evaluate(&h, "x", 0.0, &c).unwrap(), 0.0);
    let v1 = evaluate(&h, "x", 1.0, &c).unwrap();
    assert!((v1 - 0.5 * SQRT_PI * erf(1.0)).abs() < 1e-10);
    let vcap = evaluate(&h, "x", 40.0, &c).unwrap();
    assert!((vcap - 0.5 * SQRT_PI).abs() < 1e-10);
}

#[test]
fn erf_reference_points() {
    assert_eq!(erf(0.0), 0.0);
    assert!((erf(1.0) - 0.8427007929497149).abs() < 1e-14);
    assert!((erf(-1.0) + erf(1.0)).abs() < 1e-16);
    assert!((erf(5.0) - 0.9999999999984626).abs() < 1e-14);
}

// --- root finding -------------------------------------------------------------

#[test]
fn sqrt2_root() {
    let c = cfg();
    let r = find_root(|x| ok(x * x - 2.0), 1.0, 2.0, &c).unwrap();
    assert!((r.root - 2f64.sqrt()).abs() < 1e-10);
    let (lo, hi) = r.bracket;
    assert!(lo <= r.root && r.root <= hi);
    assert!(hi - lo <= 1e-9);
}

#[test]
fn quartic_root_matches_closed_form() {
    // 1 + 2x^2 - 4x^4 has its positive root at sqrt((1+sqrt(5))/4).
    let c = cfg();
    let r = find_root(|x| ok(1.0 + 2.0 * x * x - 4.0 * x.powi(4)), 0.5, 1.5, &c).unwrap();
    assert!((r.root - b1_closed_form()).abs() < 1e-10, "{} vs {}", r.root, b1_closed_form());
}

#[test]
fn quartic_sign_change_location() {
    // 2 - 11y + 2y^2 + 12y^3 - 8y^4 crosses zero once in (0, 1), just below 0.2.
    let c = cfg();
    let p = |y: f64| 2.0 + y * (-11.0 + y * (2.0 + y * (12.0 - 8.0 * y)));
    let r = find_root(|y| ok(p(y)), 0.0, 1.0, &c).unwrap();
    assert!(r.root > 0.19 && r.root < 0.20, "root at {}", r.root);
}

// --- one-sided limits -----------------------------------------------------------

#[test]
fn sinc_limit_direct_ladder() {
    let c = cfg();
    let out = limit_at(
        |x| ok(x.sin() / x),
        LimitPoint::Finite { x: 0.0, side: Side::Above },
        &c,
    )
    .unwrap();
    assert_eq!(out.method, LimitMethod::DirectLadder);
    match out.value {
        LimitValue::Finite(v) => assert!((v - 1.0).abs() < 1e-8, "{v}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn log_ladder_resolves_reciprocal_log_corrections() {
    // (1/2 + 0.3/L)/(1 + 0.7/L) with L = -ln x: corrections die like 1/log,
    // far too slowly for the direct ladder, and the limit is exactly 1/2.
    let c = cfg();
    let out = limit_at(
        |x| {
            let t = -1.0 / x.ln();
            ok((0.5 + 0.3 * t) / (1.0 + 0.7 * t))
        },
        LimitPoint::Finite { x: 0.0, side: Side::Above },
        &c,
    )
    .unwrap();
    assert_eq!(out.method, LimitMethod::LogLadder);
    match out.value {
        LimitValue::Finite(v) => assert!((v - 0.5).abs() < 1e-6, "{v}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn divergent_limits_are_signed() {
    let c = cfg();
    let up = limit_at(
        |x| ok(1.0 / x),
        LimitPoint::Finite { x: 0.0, side: Side::Above },
        &c,
    )
    .unwrap();
    assert_eq!(up.value, LimitValue::Diverges(1.0));
    let down = limit_at(
        |x| ok(1.0 / (x - 2.0)),
        LimitPoint::Finite { x: 2.0, side: Side::Below },
        &c,
    )
    .unwrap();
    assert_eq!(down.value, LimitValue::Diverges(-1.0));
}

#[test]
fn tail_limits() {
    let c = cfg();
    let rational = limit_at(|x| ok((2.0 * x + 1.0) / (x + 3.0)), LimitPoint::PosInf, &c).unwrap();
    match rational.value {
        LimitValue::Finite(v) => assert!((v - 2.0).abs() < 1e-6, "{v}"),
        other => panic!("{other:?}"),
    }
    let decay = limit_at(|x| ok((-x).exp()), LimitPoint::PosInf, &c).unwrap();
    assert_eq!(decay.value, LimitValue::Finite(0.0));
    assert_eq!(decay.method, LimitMethod::TailDecay);
    let grow = limit_at(|x| ok(x.exp()), LimitPoint::PosInf, &c).unwrap();
    assert_eq!(grow.value, LimitValue::Diverges(1.0));
}

// --- monotone segmentation -----------------------------------------------------

#[test]
fn segment_linear_is_single_up() {
    let c = cfg();
    let seg = segment_monotone(|x| ok(2.0 * x + 1.0), 0.0, 1.0, &c).unwrap();
    assert_eq!(seg.segments.len(), 1);
    assert_eq!(seg.segments[0].direction, Direction::Up);
    assert_eq!(seg.segments[0].lo, 0.0);
    assert_eq!(seg.segments[0].hi, 1.0);
    assert!(seg.changes.is_empty());
}

#[test]
fn segment_finds_quartic_exponential_peak() {
    // 2x exp(x^2 - x^4) rises then falls on (0, 3); the peak solves
    // 1 + 2x^2 - 4x^4 = 0.
    let c = cfg();
    let seg = segment_monotone(
        |x| ok(2.0 * x * (x * x - x.powi(4)).exp()),
        0.0,
        3.0,
        &c,
    )
    .unwrap();
    let dirs: Vec<Direction> = seg.direction_pattern();
    assert_eq!(dirs, vec![Direction::Up, Direction::Down]);
    assert_eq!(seg.changes.len(), 1);
    assert!(
        (seg.changes[0] - b1_closed_form()).abs() < 1e-6,
        "breakpoint {} vs {}",
        seg.changes[0],
        b1_closed_form()
    );
    // Segments tile the interval.
    assert_eq!(seg.segments.first().unwrap().lo, 0.0);
    assert_eq!(seg.segments.last().unwrap().hi, 3.0);
    for w in seg.segments.windows(2) {
        assert_eq!(w[0].hi, w[1].lo);
    }
}

// --- determinism -----------------------------------------------------------------

#[test]
fn repeated_runs_are_bitwise_identical() {
    let c = cfg();
    let e = parse("int(exp(-t^2), t, 0, x)/(1 + x^2)").unwrap();
    let a = evaluate(&e, "x", 1.3, &c).unwrap();
    let b = evaluate(&e, "x", 1.3, &c).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());

    let i1 = integrate(|t| ok((1.0 + t.sin()).ln()), 0.0, 1.0, &c).unwrap();
    let i2 = integrate(|t| ok((1.0 + t.sin()).ln()), 0.0, 1.0, &c).unwrap();
    assert_eq!(i1.to_bits(), i2.to_bits());

    let r1 = find_root(|x| ok(x.cos() - x), 0.0, 1.0, &c).unwrap().root;
    let r2 = find_root(|x| ok(x.cos() - x), 0.0, 1.0, &c).unwrap().root;
    assert_eq!(r1.to_bits(), r2.to_bits());

    let l1 = limit_at(|x| ok(x.sin() / x), LimitPoint::Finite { x: 0.0, side: Side::Above }, &c)
        .unwrap();
    let l2 = limit_at(|x| ok(x.sin() / x), LimitPoint::Finite { x: 0.0, side: Side::Above }, &c)
        .unwrap();
    match (l1.value, l2.value) {
        (LimitValue::Finite(a), LimitValue::Finite(b)) => assert_eq!(a.to_bits(), b.to_bits()),
        other => panic!("{other:?}"),
    }
}
