use monorule::catalog;
use monorule::numerics::NumericConfig;

fn main() {
    let which: String = std::env::args().nth(1).unwrap_or_else(|| "example1".into());
    let cfg = NumericConfig::default();
    let t0 = std::time::Instant::now();
    let run = match which.as_str() {
        "example1" => catalog::example1(&cfg),
        "example2" => catalog::example2(&cfg),
        "example3" => catalog::example3(&cfg),
        "example4" => catalog::example4(&cfg),
        "hlp147" => catalog::hlp147(&cfg),
        other => panic!("unknown example {other}"),
    };
    eprintln!("{} finished in {:?}", run.name, t0.elapsed());
    for line in &run.lines {
        let mark = if line.ok { "ok " } else { "FAIL" };
        match &line.outcome {
            catalog::CheckOutcome::Numeric { computed, reference, delta, tol } => {
                eprintln!("  [{mark}] {}: computed {computed:.15}, reference {reference:.15}, |d| {delta:.3e} (tol {tol:.0e})", line.label);
            }
            catalog::CheckOutcome::Flag { detail } => {
                eprintln!("  [{mark}] {}: {detail}", line.label);
            }
        }
    }
    eprintln!("   -> pass: {}", run.pass);
}
