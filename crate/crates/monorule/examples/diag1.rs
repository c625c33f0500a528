use monorule::{catalog, oracle, shape};
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let corpus = catalog::randomized_corpus(catalog::CORPUS_SEED, 200);
    println!("generate 200: {:?}", t0.elapsed());

    let mut worst = std::time::Duration::ZERO;
    let t1 = Instant::now();
    let mut certified = 0;
    let mut failures = 0;
    for c in &corpus {
        let t = Instant::now();
        match shape::analyze(&c.problem, true) {
            Ok(rep) => {
                if let shape::AnalysisOutcome::Classified(cl) = &rep.outcome {
                    if cl.certified {
                        certified += 1;
                        let v = oracle::verify(&c.problem, &cl.shape, 512).unwrap();
                        if !v.agrees {
                            failures += 1;
                            println!("#{} DISAGREE {:?}", c.id, v.details);
                        }
                    }
                }
            }
            Err(e) => println!("#{} analyze error: {e}", c.id),
        }
        worst = worst.max(t.elapsed());
    }
    println!(
        "analyze+verify 200: {:?} (worst single {:?}), certified {certified}, disagreements {failures}",
        t1.elapsed(),
        worst
    );
}
