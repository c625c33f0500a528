//! Rewriting to a compact pointwise-equal form.
//!
//! Additive and multiplicative spines are flattened, constants folded,
//! structurally equal factors collected into integer powers, exponentials
//! merged (`exp(a)*exp(b) → exp(a+b)`, across division too), and common
//! factors cancelled between numerator and denominator. The cancellation is
//! load-bearing: Hôpital quotients routinely share an underflowing factor
//! (e.g. `exp(-x^2)` on both sides) whose cancelled form stays evaluable far
//! beyond the underflow threshold of the raw quotient.

use super::{BinOp, Expr, Func};

pub fn simplify(e: &Expr) -> Expr {
    let mut cur = e.clone();
    for _ in 0..4 {
        let next = simp(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

fn c(v: f64) -> Expr {
    Expr::Const(v)
}

fn is_const(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Const(x) if *x == v)
}

fn as_const(e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(v) => Some(*v),
        _ => None,
    }
}

fn is_integer(v: f64) -> bool {
    v.fract() == 0.0 && v.abs() < 1e15
}

fn simp(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Var(_) => e.clone(),
        Expr::Neg(u) => match simp(u) {
            Expr::Const(v) => c(-v),
            Expr::Neg(inner) => *inner,
            other => other.neg(),
        },
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => {
            let mut terms = Vec::new();
            collect_terms(e, 1.0, &mut terms);
            rebuild_sum(terms)
        }
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => {
            let mut acc = MulAcc::new();
            if collect_factors(e, 1.0, &mut acc) {
                rebuild_product(acc)
            } else {
                // Hit a non-foldable constant situation (e.g. /0); keep the
                // node with simplified children and let evaluation report it.
                match e {
                    Expr::Bin(op, a, b) => Expr::bin(*op, simp(a), simp(b)),
                    _ => unreachable!(),
                }
            }
        }
        Expr::Bin(BinOp::Pow, a, b) => {
            let (a, b) = (simp(a), simp(b));
            if let (Some(x), Some(y)) = (as_const(&a), as_const(&b)) {
                let ok = !(x < 0.0 && !is_integer(y)) && !(x == 0.0 && y < 0.0);
                if ok {
                    let v = x.powf(y);
                    if v.is_finite() {
                        return c(v);
                    }
                }
            }
            if is_const(&b, 1.0) {
                return a;
            }
            if is_const(&b, 0.0) {
                return c(1.0);
            }
            if let Expr::Bin(BinOp::Pow, base, inner) = &a {
                if let (Some(j), Some(k)) = (as_const(inner), as_const(&b)) {
                    if is_integer(j) && is_integer(k) {
                        return simp(&base.as_ref().clone().pow(c(j * k)));
                    }
                }
            }
            a.pow(b)
        }
        Expr::Call(f, u) => {
            let u = simp(u);
            if let Some(v) = as_const(&u) {
                if let Some(folded) = fold_call(*f, v) {
                    return c(folded);
                }
            }
            Expr::call(*f, u)
        }
        Expr::Integral {
            integrand,
            var,
            lo,
            hi,
        } => {
            let integrand = simp(integrand);
            let lo = simp(lo);
            let hi = simp(hi);
            if is_const(&integrand, 0.0) || lo == hi {
                return c(0.0);
            }
            Expr::Integral {
                integrand: Box::new(integrand),
                var: var.clone(),
                lo: Box::new(lo),
                hi: Box::new(hi),
            }
        }
    }
}

fn fold_call(f: Func, v: f64) -> Option<f64> {
    let out = match f {
        Func::Exp => v.exp(),
        Func::Log => {
            if v <= 0.0 {
                return None;
            }
            v.ln()
        }
        Func::Sin => v.sin(),
        Func::Cos => v.cos(),
        Func::Tan => v.tan(),
        Func::Sec => {
            let cv = v.cos();
            if cv == 0.0 {
                return None;
            }
            1.0 / cv
        }
        Func::Sqrt => {
            if v < 0.0 {
                return None;
            }
            v.sqrt()
        }
        Func::Abs => v.abs(),
        // The error function is evaluated in the numerics layer; leave it
        // symbolic here.
        Func::Erf => return None,
    };
    out.is_finite().then_some(out)
}

// ---- additive collection ----

fn collect_terms(e: &Expr, sign: f64, out: &mut Vec<(f64, Expr)>) {
    match e {
        Expr::Bin(BinOp::Add, a, b) => {
            collect_terms(a, sign, out);
            collect_terms(b, sign, out);
        }
        Expr::Bin(BinOp::Sub, a, b) => {
            collect_terms(a, sign, out);
            collect_terms(b, -sign, out);
        }
        Expr::Neg(u) => collect_terms(u, -sign, out),
        other => {
            let s = simp(other);
            match &s {
                // A child may simplify back into an additive spine.
                Expr::Bin(BinOp::Add | BinOp::Sub, ..) | Expr::Neg(_) => {
                    collect_terms(&s, sign, out)
                }
                Expr::Const(v) => out.push((sign * v, c(1.0))),
                _ => {
                    let (k, base) = split_coeff(&s);
                    out.push((sign * k, base));
                }
            }
        }
    }
}

fn split_coeff(e: &Expr) -> (f64, Expr) {
    match e {
        Expr::Bin(BinOp::Mul, a, b) => {
            if let Some(k) = as_const(a) {
                return (k, b.as_ref().clone());
            }
            (1.0, e.clone())
        }
        _ => (1.0, e.clone()),
    }
}

fn rebuild_sum(terms: Vec<(f64, Expr)>) -> Expr {
    // Merge structurally equal bases, preserving first-occurrence order.
    let mut merged: Vec<(f64, Expr)> = Vec::new();
    for (k, base) in terms {
        if let Some(slot) = merged.iter_mut().find(|(_, b)| *b == base) {
            slot.0 += k;
        } else {
            merged.push((k, base));
        }
    }
    merged.retain(|(k, _)| *k != 0.0);
    if merged.is_empty() {
        return c(0.0);
    }
    if let Some(e) = extract_common(&merged) {
        return e;
    }
    let make = |k: f64, base: &Expr| -> Expr {
        if is_const(base, 1.0) {
            c(k)
        } else if k == 1.0 {
            base.clone()
        } else {
            c(k) * base.clone()
        }
    };
    let (k0, b0) = &merged[0];
    let mut acc = if *k0 < 0.0 && !is_const(b0, 1.0) {
        make(-*k0, b0).neg()
    } else {
        make(*k0, b0)
    };
    for (k, base) in &merged[1..] {
        acc = if *k < 0.0 {
            acc - make(-*k, base)
        } else {
            acc + make(*k, base)
        };
    }
    acc
}

/// Pull factors shared by every term out of a sum: `e^u·p − e^u·q → e^u·(p − q)`.
/// This keeps downstream quotients evaluable: division merges the extracted
/// factor structurally (`e^u/e^v → e^{u−v}`) where the unfactored sums would
/// both underflow to 0 and evaluate as 0/0.
fn extract_common(merged: &[(f64, Expr)]) -> Option<Expr> {
    if merged.len() < 2 {
        return None;
    }
    let decomps: Vec<(f64, Vec<(Expr, f64)>)> =
        merged.iter().map(|(_, b)| factor_powers(b)).collect();
    // Only factors of the first term can be common; keep the min power seen.
    let mut common: Vec<(Expr, f64)> = Vec::new();
    for (base, p0) in &decomps[0].1 {
        let mut m = *p0;
        for (_, d) in &decomps[1..] {
            m = m.min(d.iter().find(|(b, _)| b == base).map_or(0.0, |(_, p)| *p));
        }
        if m > 0.0 {
            common.push((base.clone(), m));
        }
    }
    if common.is_empty() {
        return None;
    }
    let residual: Vec<(f64, Expr)> = merged
        .iter()
        .zip(&decomps)
        .map(|((k, _), (cf, d))| {
            let mut facs = d.clone();
            for (base, m) in &common {
                if let Some(slot) = facs.iter_mut().find(|(b, _)| b == base) {
                    slot.1 -= m;
                }
            }
            (k * cf, powers_product(&facs))
        })
        .collect();
    let inner = rebuild_sum(residual);
    let mut acc = MulAcc::new();
    for (base, m) in common {
        acc.absorb(base, m);
    }
    match as_const(&inner) {
        Some(v) => acc.coeff *= v,
        None => acc.push(inner, 1.0),
    }
    Some(rebuild_product(acc))
}

/// Decompose a simplified term into a constant coefficient and factor powers.
fn factor_powers(e: &Expr) -> (f64, Vec<(Expr, f64)>) {
    let mut coeff = 1.0;
    let mut out = Vec::new();
    walk_powers(e, 1.0, &mut coeff, &mut out);
    (coeff, out)
}

fn walk_powers(e: &Expr, pow: f64, coeff: &mut f64, out: &mut Vec<(Expr, f64)>) {
    match e {
        Expr::Bin(BinOp::Mul, a, b) => {
            walk_powers(a, pow, coeff, out);
            walk_powers(b, pow, coeff, out);
        }
        Expr::Bin(BinOp::Div, a, b) => {
            walk_powers(a, pow, coeff, out);
            walk_powers(b, -pow, coeff, out);
        }
        Expr::Neg(u) => {
            *coeff = -*coeff;
            walk_powers(u, pow, coeff, out);
        }
        Expr::Const(v) => *coeff *= v.powf(pow),
        Expr::Bin(BinOp::Pow, b, k) => match as_const(k) {
            Some(k) => push_power(out, b, k * pow),
            None => push_power(out, e, pow),
        },
        _ => push_power(out, e, pow),
    }
}

fn push_power(out: &mut Vec<(Expr, f64)>, base: &Expr, p: f64) {
    if let Some(slot) = out.iter_mut().find(|(b, _)| b == base) {
        slot.1 += p;
    } else {
        out.push((base.clone(), p));
    }
}

/// Canonical product of factor powers (zero powers dropped).
fn powers_product(facs: &[(Expr, f64)]) -> Expr {
    let mut acc = MulAcc::new();
    for (base, p) in facs {
        if *p != 0.0 {
            acc.absorb(base.clone(), *p);
        }
    }
    rebuild_product(acc)
}

// ---- multiplicative collection ----

struct MulAcc {
    coeff: f64,
    /// (base, exponent, first-occurrence rank)
    factors: Vec<(Expr, f64, usize)>,
    /// additive terms of a merged exp() argument
    exp_terms: Vec<(f64, Expr)>,
    exp_rank: Option<usize>,
    next_rank: usize,
}

impl MulAcc {
    fn new() -> Self {
        MulAcc {
            coeff: 1.0,
            factors: Vec::new(),
            exp_terms: Vec::new(),
            exp_rank: None,
            next_rank: 0,
        }
    }

    fn push(&mut self, base: Expr, pow: f64) {
        if let Some(slot) = self.factors.iter_mut().find(|(b, _, _)| *b == base) {
            slot.1 += pow;
        } else {
            self.factors.push((base, pow, self.next_rank));
            self.next_rank += 1;
        }
    }

    /// Like `push`, but routes exponentials into the merged exp() argument.
    fn absorb(&mut self, base: Expr, pow: f64) {
        if let Expr::Call(Func::Exp, arg) = &base {
            if self.exp_rank.is_none() {
                self.exp_rank = Some(self.next_rank);
                self.next_rank += 1;
            }
            collect_terms(arg, pow, &mut self.exp_terms);
        } else {
            self.push(base, pow);
        }
    }
}

/// Returns false when folding ran into a constant division by zero or a
/// non-finite constant; the caller keeps the original node in that case.
fn collect_factors(e: &Expr, pow: f64, acc: &mut MulAcc) -> bool {
    match e {
        Expr::Bin(BinOp::Mul, a, b) => {
            collect_factors(a, pow, acc) && collect_factors(b, pow, acc)
        }
        Expr::Bin(BinOp::Div, a, b) => {
            collect_factors(a, pow, acc) && collect_factors(b, -pow, acc)
        }
        Expr::Neg(u) => {
            acc.coeff = -acc.coeff;
            collect_factors(u, pow, acc)
        }
        other => {
            let s = simp(other);
            if matches!(s, Expr::Bin(BinOp::Mul | BinOp::Div, ..) | Expr::Neg(_)) {
                // The child simplified back into a multiplicative spine.
                return collect_factors(&s, pow, acc);
            }
            match s {
                Expr::Const(v) => {
                    if pow > 0.0 {
                        acc.coeff *= v;
                    } else {
                        if v == 0.0 {
                            return false;
                        }
                        acc.coeff /= v;
                    }
                    acc.coeff.is_finite()
                }
                Expr::Bin(BinOp::Pow, base, exponent) => {
                    if let Some(k) = as_const(&exponent) {
                        acc.push(*base, k * pow);
                    } else {
                        acc.push(Expr::Bin(BinOp::Pow, base, exponent), pow);
                    }
                    true
                }
                other_s => {
                    acc.absorb(other_s, pow);
                    true
                }
            }
        }
    }
}

fn rebuild_product(mut acc: MulAcc) -> Expr {
    if acc.coeff == 0.0 {
        return c(0.0);
    }
    acc.factors.retain(|(_, p, _)| *p != 0.0);

    // Fold the merged exponential argument; it may cancel entirely.
    let exp_factor: Option<(Expr, usize)> = if acc.exp_terms.is_empty() {
        None
    } else {
        let arg = rebuild_sum(std::mem::take(&mut acc.exp_terms));
        match as_const(&arg) {
            Some(v) => {
                let ev = v.exp();
                if ev.is_finite() && ev != 0.0 {
                    acc.coeff *= ev;
                    None
                } else {
                    Some((arg.exp(), acc.exp_rank.unwrap()))
                }
            }
            None => Some((arg.exp(), acc.exp_rank.unwrap())),
        }
    };

    let mut num: Vec<(Expr, usize)> = Vec::new();
    let mut den: Vec<(Expr, usize)> = Vec::new();
    for (base, p, rank) in acc.factors {
        let (target, p) = if p > 0.0 {
            (&mut num, p)
        } else {
            (&mut den, -p)
        };
        let piece = if p == 1.0 { base } else { base.pow(c(p)) };
        target.push((piece, rank));
    }
    if let Some((ef, rank)) = exp_factor {
        num.push((ef, rank));
    }
    num.sort_by_key(|&(_, r)| r);
    den.sort_by_key(|&(_, r)| r);

    let product = |parts: Vec<(Expr, usize)>| -> Option<Expr> {
        let mut it = parts.into_iter().map(|(e, _)| e);
        let first = it.next()?;
        Some(it.fold(first, |a, b| a * b))
    };

    let num_core = product(num);
    let den_core = product(den);

    let numerator = match num_core {
        Some(n) => {
            if acc.coeff == 1.0 {
                n
            } else if acc.coeff == -1.0 {
                n.neg()
            } else {
                c(acc.coeff) * n
            }
        }
        None => c(acc.coeff),
    };
    match den_core {
        Some(d) => numerator / d,
        None => numerator,
    }
}
