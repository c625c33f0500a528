//! Command-line front end: analyze ad-hoc quotient problems, cross-check a
//! verdict against the sampling oracle, reproduce the catalog pipelines, and
//! dump plot data.
//!
//! Exit codes: 0 when the verdict is certified (and, for `verify`, the
//! oracle agrees), 2 when the analysis is inconclusive or the oracle
//! disagrees, 1 on usage, parse, or evaluation errors.

use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use monorule::catalog::{self, CheckOutcome, ExampleRun};
use monorule::expr::{differentiate, parse, simplify, BinOp, Expr};
use monorule::numerics::{evaluate, NumericConfig};
use monorule::oracle::{self, OracleVerdict};
use monorule::shape::{
    analyze, AnalysisOutcome, AnalysisReport, Bound, RatioProblem, ShapeClass, ShapeError,
    SignClass,
};
use serde::Serialize;

const SCHEMA_VERSION: &str = "1";

#[derive(Parser)]
#[command(name = "monorule", version, about = "Monotonicity analysis of quotients f/g")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify the shape of f/g on [a, b] and print the certificate.
    Analyze(ProblemArgs),
    /// Classify, then cross-check the verdict against the sampling oracle.
    Verify {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Sample count for the oracle trace.
        #[arg(long, default_value_t = 2048)]
        oracle_n: usize,
    },
    /// Run a canned reproduction pipeline and compare against its references.
    Reproduce {
        /// example1 | example2 | example3 | example4 | hlp147 | all
        name: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Sample f/g and f'/g' on a uniform grid and write CSV rows x,ratio,hopital.
    PlotData {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Output path for the CSV file.
        #[arg(short)]
        o: String,
        /// Number of grid rows.
        #[arg(short, default_value_t = 256)]
        n: usize,
    },
}

#[derive(Args)]
struct ProblemArgs {
    /// Numerator expression.
    #[arg(short)]
    f: String,
    /// Denominator expression.
    #[arg(short)]
    g: String,
    /// Left endpoint.
    #[arg(short, allow_negative_numbers = true)]
    a: f64,
    /// Right endpoint (a real number, or "inf").
    #[arg(short, allow_hyphen_values = true)]
    b: String,
    /// Treat the left endpoint as open (excluded).
    #[arg(long)]
    open_left: bool,
    /// Treat the right endpoint as open (excluded).
    #[arg(long)]
    open_right: bool,
    /// When g' changes sign, split there and stitch the pieces instead of stopping.
    #[arg(long)]
    auto_split: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Numeric-config override KEY=VALUE (repeatable); see --tol help in docs.
    #[arg(long, value_name = "KEY=VALUE")]
    tol: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Top-level JSON document for `analyze` and `verify`.
#[derive(Serialize)]
struct Report {
    schema_version: &'static str,
    problem: RatioProblem,
    #[serde(flatten)]
    analysis: AnalysisReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<OracleVerdict>,
    timings: Timings,
}

#[derive(Serialize)]
struct Timings {
    analyze_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_ms: Option<f64>,
}

fn main() -> ExitCode {
    // Route usage errors to exit code 1; 2 is reserved for "analysis ran but
    // was inconclusive".
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.cmd {
        Cmd::Analyze(args) => {
            let p = build_problem(&args)?;
            let t0 = Instant::now();
            let rep = analyze(&p, args.auto_split);
            let analyze_ms = ms(t0);
            finish_analysis(&p, rep, None, analyze_ms, None, args.format)
        }
        Cmd::Verify { problem: args, oracle_n } => {
            let p = build_problem(&args)?;
            let t0 = Instant::now();
            let rep = analyze(&p, args.auto_split);
            let analyze_ms = ms(t0);
            let mut verdict = None;
            let mut oracle_ms = None;
            if let Ok(r) = &rep {
                if let AnalysisOutcome::Classified(c) = &r.outcome {
                    let t1 = Instant::now();
                    verdict = Some(oracle::verify(&p, &c.shape, oracle_n)?);
                    oracle_ms = Some(ms(t1));
                }
            }
            finish_analysis(&p, rep, verdict, analyze_ms, oracle_ms, args.format)
        }
        Cmd::Reproduce { name, format } => reproduce(&name, format),
        Cmd::PlotData { problem: args, o, n } => plot_data(&args, &o, n),
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn build_problem(args: &ProblemArgs) -> anyhow::Result<RatioProblem> {
    let f = parse(&args.f).map_err(|e| anyhow::anyhow!("in -f: {e}"))?;
    let g = parse(&args.g).map_err(|e| anyhow::anyhow!("in -g: {e}"))?;
    let b = match args.b.trim() {
        "inf" | "+inf" | "infinity" => Bound::PosInf,
        s => Bound::Finite(
            s.parse::<f64>()
                .map_err(|_| anyhow::anyhow!("in -b: expected a real number or \"inf\", got {s:?}"))?,
        ),
    };
    let cfg = load_config(&args.tol)?;
    Ok(RatioProblem::new(f, g, args.a, b)?
        .with_open(args.open_left, args.open_right)
        .with_cfg(cfg))
}

/// Numeric configuration: defaults, then the MONORULE_CONFIG file, then
/// --tol flags, each layer overriding the previous.
fn load_config(tol_flags: &[String]) -> anyhow::Result<NumericConfig> {
    let mut cfg = NumericConfig::default();
    if let Ok(path) = std::env::var("MONORULE_CONFIG") {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| anyhow::anyhow!("MONORULE_CONFIG {path:?}: {e}"))?;
        let over: ConfigOverride =
            toml::from_str(&text).map_err(|e| anyhow::anyhow!("MONORULE_CONFIG {path:?}: {e}"))?;
        over.apply(&mut cfg);
    }
    for flag in tol_flags {
        let (key, val) = flag
            .split_once('=')
            .ok_or_else(|| anyhow::anyhow!("--tol expects KEY=VALUE, got {flag:?}"))?;
        set_key(&mut cfg, key.trim(), val.trim())?;
    }
    Ok(cfg)
}

#[derive(Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigOverride {
    quad_tol: Option<f64>,
    root_tol: Option<f64>,
    limit_steps: Option<usize>,
    grid_n: Option<usize>,
    infinity_cap: Option<f64>,
    endpoint_eps: Option<f64>,
    margin: Option<f64>,
}

impl ConfigOverride {
    fn apply(&self, cfg: &mut NumericConfig) {
        macro_rules! put {
            ($($k:ident),*) => { $( if let Some(v) = self.$k { cfg.$k = v; } )* };
        }
        put!(quad_tol, root_tol, limit_steps, grid_n, infinity_cap, endpoint_eps, margin);
    }
}

fn set_key(cfg: &mut NumericConfig, key: &str, val: &str) -> anyhow::Result<()> {
    let bad = |e: &dyn std::fmt::Display| anyhow::anyhow!("--tol {key}: {e}");
    match key {
        "quad_tol" => cfg.quad_tol = val.parse().map_err(|e| bad(&e))?,
        "root_tol" => cfg.root_tol = val.parse().map_err(|e| bad(&e))?,
        "limit_steps" => cfg.limit_steps = val.parse().map_err(|e| bad(&e))?,
        "grid_n" => cfg.grid_n = val.parse().map_err(|e| bad(&e))?,
        "infinity_cap" => cfg.infinity_cap = val.parse().map_err(|e| bad(&e))?,
        "endpoint_eps" => cfg.endpoint_eps = val.parse().map_err(|e| bad(&e))?,
        "margin" => cfg.margin = val.parse().map_err(|e| bad(&e))?,
        other => anyhow::bail!(
            "--tol: unknown key {other:?} (expected quad_tol, root_tol, limit_steps, \
             grid_n, infinity_cap, endpoint_eps, or margin)"
        ),
    }
    Ok(())
}

fn finish_analysis(
    p: &RatioProblem,
    rep: Result<AnalysisReport, ShapeError>,
    verification: Option<OracleVerdict>,
    analyze_ms: f64,
    oracle_ms: Option<f64>,
    format: Format,
) -> anyhow::Result<ExitCode> {
    let rep = match rep {
        Ok(r) => r,
        // Hypothesis failures are findings, not faults: report and signal
        // "inconclusive". Evaluation breakdowns stay hard errors.
        Err(e @ (ShapeError::GMixed(_) | ShapeError::Ineligible(_))) => {
            eprintln!("inconclusive: {e}");
            return Ok(ExitCode::from(2));
        }
        Err(e) => return Err(e.into()),
    };

    let certified = match &rep.outcome {
        AnalysisOutcome::Classified(c) => c.certified,
        AnalysisOutcome::SplitRequired { .. } => false,
    };
    let agrees = verification.as_ref().map(|v| v.agrees);

    let report = Report {
        schema_version: SCHEMA_VERSION,
        problem: p.clone(),
        analysis: rep,
        verification,
        timings: Timings { analyze_ms, oracle_ms },
    };

    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        Format::Text => print!("{}", render_text(&report)),
    }

    Ok(if certified && agrees != Some(false) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn render_text(r: &Report) -> String {
    let mut out = String::new();
    let p = &r.problem;
    let b = match p.b {
        Bound::Finite(v) => v.to_string(),
        Bound::PosInf => "inf".to_string(),
    };
    let lb = if p.open_left { '(' } else { '[' };
    let rb = if p.open_right || p.b == Bound::PosInf { ')' } else { ']' };
    let _ = writeln!(out, "problem: ({}) / ({}) on {lb}{}, {b}{rb}", p.f, p.g, p.a);

    let hs = &r.analysis.hypotheses;
    let _ = writeln!(
        out,
        "hypotheses: g {}, g' {}; f'/g' pattern {}",
        sign_word(&hs.g_sign),
        sign_word(&hs.gprime_sign),
        pattern_word(hs.hopital_segments.iter().map(|s| s.direction)),
    );
    for w in &hs.warnings {
        let _ = writeln!(out, "  warning: {w}");
    }
    for e in &hs.facet_errors {
        let _ = writeln!(out, "  facet error: {e}");
    }

    match &r.analysis.outcome {
        AnalysisOutcome::SplitRequired { points } => {
            let _ = writeln!(
                out,
                "verdict: split required at g' sign changes {points:?} (rerun with --auto-split)"
            );
        }
        AnalysisOutcome::Classified(c) => {
            let _ = writeln!(
                out,
                "verdict: {}{}",
                shape_word(&c.shape),
                if c.certified { " (certified)" } else { " (not certified)" }
            );
            let _ = writeln!(out, "rule: {} case {}", c.certificate.rule, c.certificate.case);
            for chk in &c.certificate.endpoint_checks {
                let _ = writeln!(
                    out,
                    "  endpoint {}: {} {} (margin {:e}{})",
                    chk.endpoint,
                    chk.what,
                    chk.relation,
                    chk.margin,
                    if chk.resolved_by_probe { ", by probe" } else { "" }
                );
            }
            for n in &c.notes {
                let _ = writeln!(out, "  note: {n}");
            }
        }
    }
    for n in &r.analysis.notes {
        let _ = writeln!(out, "note: {n}");
    }

    if let Some(v) = &r.verification {
        let _ = writeln!(
            out,
            "oracle: {} ({} direction change(s) observed, worst discrepancy {:e})",
            if v.agrees { "agrees" } else { "DISAGREES" },
            v.oscillations_observed,
            v.worst_discrepancy,
        );
        for d in &v.details {
            let _ = writeln!(out, "  oracle: {d}");
        }
    }
    let _ = writeln!(out, "timings: analyze {:.1} ms", r.timings.analyze_ms);
    if let Some(o) = r.timings.oracle_ms {
        let _ = writeln!(out, "timings: oracle {o:.1} ms");
    }
    out
}

fn sign_word(s: &SignClass) -> String {
    match s {
        SignClass::Positive => "positive".into(),
        SignClass::Negative => "negative".into(),
        SignClass::Mixed(pts) => format!("mixed (crossings near {pts:?})"),
    }
}

fn pattern_word(dirs: impl Iterator<Item = monorule::numerics::Direction>) -> String {
    use monorule::numerics::Direction;
    let words: Vec<&str> = dirs
        .map(|d| match d {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Flat => "flat",
        })
        .collect();
    if words.is_empty() {
        "(none)".into()
    } else {
        words.join(", ")
    }
}

fn shape_word(s: &ShapeClass) -> String {
    match s {
        ShapeClass::Increasing => "increasing".into(),
        ShapeClass::Decreasing => "decreasing".into(),
        ShapeClass::DownUp { turn } => format!("down-up, turn at x = {}", turn.c),
        ShapeClass::UpDown { turn } => format!("up-down, turn at x = {}", turn.c),
        ShapeClass::ConstantPrefix { alpha, lambda, tail } => {
            let tail_word = tail
                .as_ref()
                .map(|t| format!(", then {}", shape_word(t)))
                .unwrap_or_default();
            format!("constant f = {lambda}·g up to x = {alpha}{tail_word}")
        }
        ShapeClass::Piecewise { pieces } => {
            let runs = pattern_word(pieces.iter().map(|q| q.direction));
            format!("piecewise ({runs})")
        }
    }
}

fn reproduce(name: &str, format: Format) -> anyhow::Result<ExitCode> {
    let cfg = NumericConfig::default();
    let runs: Vec<ExampleRun> = match name {
        "example1" => vec![catalog::example1(&cfg)],
        "example2" => vec![catalog::example2(&cfg)],
        "example3" => vec![catalog::example3(&cfg)],
        "example4" => vec![catalog::example4(&cfg)],
        "hlp147" => vec![catalog::hlp147(&cfg)],
        "all" => catalog::all_examples(&cfg),
        other => anyhow::bail!(
            "unknown pipeline {other:?} (expected example1..example4, hlp147, or all)"
        ),
    };

    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                schema_version: &'static str,
                runs: &'a [ExampleRun],
                pass: bool,
            }
            let pass = runs.iter().all(|r| r.pass);
            println!(
                "{}",
                serde_json::to_string_pretty(&Doc { schema_version: SCHEMA_VERSION, runs: &runs, pass })?
            );
        }
        Format::Text => {
            for run in &runs {
                println!("{}: {}", run.name, run.title);
                for line in &run.lines {
                    let mark = if line.ok { "ok " } else { "FAIL" };
                    match &line.outcome {
                        CheckOutcome::Numeric { computed, reference, delta, tol } => println!(
                            "  [{mark}] {}: computed {computed}, reference {reference}, |d| {delta:.3e} (tol {tol:e})",
                            line.label
                        ),
                        CheckOutcome::Flag { detail } => {
                            println!("  [{mark}] {}: {detail}", line.label)
                        }
                    }
                }
                println!("  -> {}", if run.pass { "pass" } else { "FAIL" });
            }
        }
    }

    Ok(if runs.iter().all(|r| r.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

/// Uniform grid over the problem's inset scan interval; one CSV row per
/// point with the ratio and the Hôpital derivative f'/g'.
fn plot_data(args: &ProblemArgs, out_path: &str, n: usize) -> anyhow::Result<ExitCode> {
    anyhow::ensure!(n >= 2, "-n must be at least 2");
    let p = build_problem(args)?;
    let fp = simplify(&differentiate(&p.f, &p.var));
    let gp = simplify(&differentiate(&p.g, &p.var));
    let xi = simplify(&Expr::bin(BinOp::Div, fp, gp));

    let (lo, hi) = p.scan_interval();
    let mut csv = String::from("x,ratio,hopital\n");
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let f = evaluate(&p.f, &p.var, x, &p.cfg)?;
        let g = evaluate(&p.g, &p.var, x, &p.cfg)?;
        anyhow::ensure!(g != 0.0, "g vanishes at grid point x = {x}");
        let h = evaluate(&xi, &p.var, x, &p.cfg)?;
        let _ = writeln!(csv, "{x},{},{h}", f / g);
    }
    std::fs::write(out_path, csv)?;
    Ok(ExitCode::SUCCESS)
}
