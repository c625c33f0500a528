use monorule::expr::{differentiate, parse, render, simplify};
use monorule::numerics::{evaluate, NumericConfig};

#[test]
fn smoke() {
    let cfg = NumericConfig::default();
    // parse + render round trip
    let e = parse("2*x*exp(x^2 - x^4)").unwrap();
    assert_eq!(parse(&render(&e)).unwrap(), e);
    let h = parse("int(exp(-t^2), t, 0, x)").unwrap();
    assert_eq!(parse(&render(&h)).unwrap(), h);
    // h(1)
    let v = evaluate(&h, "x", 1.0, &cfg).unwrap();
    println!("h(1) = {v:.16} want 0.7468241328124270");
    assert!((v - 0.7468241328124270254).abs() < 1e-12);
    // derivative of h = exp(-x^2)
    let dh = simplify(&differentiate(&h, "x"));
    println!("h' = {}", render(&dh));
    let vv = evaluate(&dh, "x", 0.7, &cfg).unwrap();
    assert!((vv - (-0.49f64).exp()).abs() < 1e-14);
    // simplify: x^2*x^2 -> x^4
    let p = simplify(&parse("x^2*x^2").unwrap());
    println!("x^2*x^2 -> {}", render(&p));
    assert_eq!(p, parse("x^4").unwrap());
    // exp merge
    let m = simplify(&parse("exp(x^2)*exp(-x^4)").unwrap());
    println!("exp merge -> {}", render(&m));
    // 1*x + 0 -> x
    assert_eq!(simplify(&parse("1*x + 0").unwrap()), parse("x").unwrap());
    // div cancellation: (exp(-x^2)*(1-2*x^2))/exp(-x^2) -> 1 - 2x^2 evaluable at 40
    let q = simplify(&parse("(exp(-x^2)*(1 - 2*x^2))/exp(-x^2)").unwrap());
    println!("cancel -> {}", render(&q));
    let at40 = evaluate(&q, "x", 40.0, &cfg).unwrap();
    println!("at 40: {at40}");
    assert!((at40 - (1.0 - 2.0 * 1600.0)).abs() < 1e-9);
    // xi of example 1 via symbolic derivative of f=h(x^2), g=x*h(x)
    let f = parse("int(exp(-t^2), t, 0, x^2)").unwrap();
    let g = parse("x*int(exp(-t^2), t, 0, x)").unwrap();
    let fp = simplify(&differentiate(&f, "x"));
    let gp = simplify(&differentiate(&g, "x"));
    println!("f' = {}", render(&fp));
    println!("g' = {}", render(&gp));
    let xi = simplify(&monorule::expr::Expr::bin(monorule::expr::BinOp::Div, fp, gp));
    println!("xi = {}", render(&xi));
    let xi_at = evaluate(&xi, "x", 0.5, &cfg).unwrap();
    // reference: 2*0.5*exp(-0.0625)/(h(0.5)+0.5*exp(-0.25))
    let h05 = evaluate(&parse("int(exp(-t^2), t, 0, x)").unwrap(), "x", 0.5, &cfg).unwrap();
    let want = 2.0*0.5*(-0.0625f64).exp() / (h05 + 0.5*(-0.25f64).exp());
    println!("xi(0.5) = {xi_at} want {want}");
    assert!((xi_at - want).abs() < 1e-12);
    // parse errors
    let e1 = parse("x + ").unwrap_err();
    println!("err1: {e1}");
    let e2 = parse("(x").unwrap_err();
    println!("err2: {e2}");
    let e3 = parse("sinn(x)").unwrap_err();
    println!("err3: {e3}");
    let e4 = parse("exp(x, 2)").unwrap_err();
    println!("err4: {e4}");
}

#[test]
fn smoke_shape() {
    use monorule::shape::{
        analyze, classify, corollary4_certify, corollary5_certify, AnalysisOutcome, Bound,
        CertifyStatus, RatioProblem, ShapeClass,
    };
    let parse = monorule::expr::parse;

    // g(0) = 0, f(0) = 0: case 1, increasing (ratio is x).
    let p = RatioProblem::new(
        parse("x^2").unwrap(),
        parse("x").unwrap(),
        0.0,
        Bound::Finite(2.0),
    )
    .unwrap();
    let c = classify(&p).unwrap();
    println!("x^2/x: {:?} rule={} case={}", c.shape, c.certificate.rule, c.certificate.case);
    assert_eq!(c.shape, ShapeClass::Increasing);
    assert!(c.certified);
    assert_eq!(c.certificate.case, "1");

    // (1+x^2)/x on (0,2): down-up with turn at 1.
    let p = RatioProblem::new(
        parse("1 + x^2").unwrap(),
        parse("x").unwrap(),
        0.0,
        Bound::Finite(2.0),
    )
    .unwrap();
    let c = classify(&p).unwrap();
    println!("(1+x^2)/x: {:?} case={}", c.shape, c.certificate.case);
    match &c.shape {
        ShapeClass::DownUp { turn } => assert!((turn.c - 1.0).abs() < 1e-9),
        other => panic!("expected DownUp, got {other:?}"),
    }
    assert_eq!(c.certificate.case, "2iii");
    assert!(c.certified);

    // f' / g' = 0 flat, offset C = 1: ratio 1/(1+x) decreasing.
    let p = RatioProblem::new(
        parse("1").unwrap(),
        parse("1 + x").unwrap(),
        0.0,
        Bound::Finite(10.0),
    )
    .unwrap();
    let c = classify(&p).unwrap();
    println!("1/(1+x): {:?} rule={} case={}", c.shape, c.certificate.rule, c.certificate.case);
    assert_eq!(c.shape, ShapeClass::Decreasing);
    assert!(c.certified);

    // lambda-g: 3x / x constant.
    let p = RatioProblem::new(
        parse("3*x").unwrap(),
        parse("x").unwrap(),
        0.0,
        Bound::Finite(1.0),
    )
    .unwrap();
    let c = classify(&p).unwrap();
    println!("3x/x: {:?} rule={}", c.shape, c.certificate.rule);
    match &c.shape {
        ShapeClass::ConstantPrefix { lambda, tail, .. } => {
            assert!((lambda - 3.0).abs() < 1e-9);
            assert!(tail.is_none());
        }
        other => panic!("expected constant, got {other:?}"),
    }

    // Decreasing denominator, Corollary-2 case 1: (1-x^2)/(1-x) = 1+x.
    let p = RatioProblem::new(
        parse("1 - x^2").unwrap(),
        parse("1 - x").unwrap(),
        0.0,
        Bound::Finite(1.0),
    )
    .unwrap();
    let c = classify(&p).unwrap();
    println!("(1-x^2)/(1-x): {:?} rule={} case={}", c.shape, c.certificate.rule, c.certificate.case);
    assert_eq!(c.shape, ShapeClass::Increasing);
    assert_eq!(c.certificate.rule, "corollary2");
    assert!(c.certified);

    // Concave up-down: (x - x^2/2)/(1+x) turns at sqrt(3)-1.
    let p = RatioProblem::new(
        parse("x - x^2/2").unwrap(),
        parse("1 + x").unwrap(),
        0.0,
        Bound::Finite(2.0),
    )
    .unwrap();
    let c = classify(&p).unwrap();
    println!("(x-x^2/2)/(1+x): {:?} case={}", c.shape, c.certificate.case);
    match &c.shape {
        ShapeClass::UpDown { turn } => assert!((turn.c - (3f64.sqrt() - 1.0)).abs() < 1e-9),
        other => panic!("expected UpDown, got {other:?}"),
    }

    // Corollary 4 on (x + x^3)/x: D = 2x^3 >= 0, certified.
    let p = RatioProblem::new(
        parse("x + x^3").unwrap(),
        parse("x").unwrap(),
        0.0,
        Bound::Finite(1.0),
    )
    .unwrap();
    let cert = corollary4_certify(&p).unwrap();
    println!("cor4 (x+x^3)/x: {:?} reasons={:?}", cert.status, cert.reasons);
    assert_eq!(cert.status, CertifyStatus::CertifiedIncreasing);

    // Corollary 5: xi = 2x^3-9x^2+12x has pattern up-down-up on (0,3);
    // D = 1.5 x^2 (x-2)^2 >= 0 with equality exactly at b2 = 2.
    let p = RatioProblem::new(
        parse("x^4/2 - 3*x^3 + 6*x^2").unwrap(),
        parse("x").unwrap(),
        0.0,
        Bound::Finite(3.0),
    )
    .unwrap();
    let cert = corollary5_certify(&p).unwrap();
    println!("cor5: {:?} reasons={:?}", cert.status, cert.reasons);
    assert_eq!(cert.status, CertifyStatus::CertifiedIncreasing);
    let rep = analyze(&p, false).unwrap();
    match &rep.outcome {
        AnalysisOutcome::Classified(c) => {
            println!("cor5 analyze: {:?} certified={} rule={}", c.shape, c.certified, c.certificate.rule);
            assert_eq!(c.shape, ShapeClass::Increasing);
        }
        other => panic!("unexpected outcome {other:?}"),
    }
}

#[test]
fn smoke_oracle() {
    use monorule::oracle::{convexity_probe_expr, detect_shape, sample_trace, verify, Convexity};
    use monorule::shape::{classify, Bound, RatioProblem};
    let parse = monorule::expr::parse;
    let cfg = monorule::numerics::NumericConfig::default();

    // (1+x^2)/x: classify then verify.
    let p = RatioProblem::new(
        parse("1 + x^2").unwrap(),
        parse("x").unwrap(),
        0.0,
        Bound::Finite(2.0),
    )
    .unwrap();
    let c = classify(&p).unwrap();
    let v = verify(&p, &c.shape, 2048).unwrap();
    println!("verify (1+x^2)/x: agrees={} osc={} worst={:.3e} {:?}",
        v.agrees, v.oscillations_observed, v.worst_discrepancy, v.details);
    assert!(v.agrees);
    assert_eq!(v.oscillations_observed, 1);
    assert!(v.worst_discrepancy < 2e-4);

    // sin(x)/1 on (0, 3pi): three turns near pi/2, 3pi/2, 5pi/2.
    let p = RatioProblem::new(
        parse("sin(x)").unwrap(),
        parse("1").unwrap(),
        0.0,
        Bound::Finite(3.0 * std::f64::consts::PI),
    )
    .unwrap();
    let t = sample_trace(&p, 2048).unwrap();
    let d = detect_shape(&t);
    println!("sin turns: {:?}", d.turns.iter().map(|t| t.x).collect::<Vec<_>>());
    assert_eq!(d.turns.len(), 3);
    let pi = std::f64::consts::PI;
    for (got, want) in d.turns.iter().zip([0.5 * pi, 1.5 * pi, 2.5 * pi]) {
        assert!((got.x - want).abs() < 0.02, "turn {got:?} vs {want}");
    }

    // Convexity probes.
    let cx = convexity_probe_expr(&parse("x^2").unwrap(), "x", 0.1, 3.0, &cfg).unwrap();
    assert_eq!(cx, Convexity::Convex);
    let cc = convexity_probe_expr(&parse("log(x)").unwrap(), "x", 0.1, 3.0, &cfg).unwrap();
    assert_eq!(cc, Convexity::Concave);
    let cn = convexity_probe_expr(&parse("sin(x)").unwrap(), "x", 0.1, 6.0, &cfg).unwrap();
    assert_eq!(cn, Convexity::Neither);
    println!("convexity probes ok");
}

#[test]
fn smoke_catalog_examples() {
    use monorule::catalog;
    use monorule::numerics::NumericConfig;
    let cfg = NumericConfig::default();
    for run in catalog::all_examples(&cfg) {
        println!("== {} — {}", run.name, run.title);
        for line in &run.lines {
            let mark = if line.ok { "ok " } else { "FAIL" };
            match &line.outcome {
                catalog::CheckOutcome::Numeric { computed, reference, delta, tol } => {
                    println!("  [{mark}] {}: computed {computed:.15}, reference {reference:.15}, |d| {delta:.3e} (tol {tol:.0e})", line.label);
                }
                catalog::CheckOutcome::Flag { detail } => {
                    println!("  [{mark}] {}: {detail}", line.label);
                }
            }
        }
        println!("   -> pass: {}", run.pass);
    }
}

#[test]
fn smoke_corpus() {
    use monorule::catalog;
    let corpus = catalog::randomized_corpus(catalog::CORPUS_SEED, 20);
    assert_eq!(corpus.len(), 20);
    let mut by_changes = [0usize; 4];
    for c in &corpus {
        by_changes[c.planted_changes] += 1;
        println!(
            "#{:02} g={:<6} a={:.2} b={:.2} planted={}",
            c.id, c.g_kind, c.problem.a, c.problem.effective_hi(), c.planted_changes
        );
    }
    println!("planted histogram: {by_changes:?}");
}
