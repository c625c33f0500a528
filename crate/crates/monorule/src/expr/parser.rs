//! Pratt parser for the expression surface syntax.
//!
//! Grammar (see docs/grammar.md): infix `+ - * / ^` with conventional
//! precedence, `^` right-associative, unary minus binding between `*` and `^`,
//! calls `name(arg)` for the fixed function set, and the integral form
//! `int(integrand, t, lo, hi)` whose second argument names the bound variable.
//! At most one free variable may appear in a parsed expression.

use super::{BinOp, Expr, Func};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedToken,
    UnbalancedParen,
    UnknownFunction,
    Arity,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParseErrorKind::UnexpectedToken => "unexpected-token",
            ParseErrorKind::UnbalancedParen => "unbalanced-paren",
            ParseErrorKind::UnknownFunction => "unknown-function",
            ParseErrorKind::Arity => "arity",
        };
        f.write_str(s)
    }
}

/// Parse failure at a byte position of the input.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at position {position}: {message} [{kind}]")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

fn err(position: usize, kind: ParseErrorKind, message: impl Into<String>) -> ParseError {
    ParseError {
        position,
        kind,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '0'..='9' | '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| {
                    err(
                        start,
                        ParseErrorKind::UnexpectedToken,
                        format!("malformed number `{text}`"),
                    )
                })?;
                out.push((Tok::Num(v), start));
                continue;
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            other => {
                return Err(err(
                    start,
                    ParseErrorKind::UnexpectedToken,
                    format!("unexpected character `{other}`"),
                ));
            }
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    /// (name, source position) of every variable occurrence, in parse order.
    var_uses: Vec<(String, usize)>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn next(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str, kind: ParseErrorKind) -> Result<(), ParseError> {
        match self.next() {
            Some((t, _)) if t == want => Ok(()),
            Some((_, p)) => Err(err(p, kind, format!("expected {what}"))),
            None => Err(err(self.end, kind, format!("expected {what}, found end of input"))),
        }
    }

    fn expr_bp(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = match self.next() {
            Some((Tok::Num(v), _)) => Expr::Const(v),
            Some((Tok::Ident(name), p)) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.call(&name, p)?
                } else if name == "int" || Func::from_name(&name).is_some() {
                    return Err(err(
                        p,
                        ParseErrorKind::UnexpectedToken,
                        format!("`{name}` is a function name; call it with parentheses"),
                    ));
                } else {
                    self.var_uses.push((name.clone(), p));
                    Expr::Var(name)
                }
            }
            Some((Tok::LParen, p)) => {
                let e = self.expr_bp(0)?;
                match self.next() {
                    Some((Tok::RParen, _)) => e,
                    Some((_, q)) => {
                        return Err(err(
                            q,
                            ParseErrorKind::UnbalancedParen,
                            "expected `)`",
                        ))
                    }
                    None => {
                        return Err(err(
                            p,
                            ParseErrorKind::UnbalancedParen,
                            "unclosed `(`",
                        ))
                    }
                }
            }
            Some((Tok::Minus, _)) => {
                let rhs = self.expr_bp(25)?;
                match rhs {
                    // Fold at parse time so `-2` is the literal -2.
                    Expr::Const(v) => Expr::Const(-v),
                    other => Expr::Neg(Box::new(other)),
                }
            }
            Some((t, p)) => {
                return Err(err(
                    p,
                    ParseErrorKind::UnexpectedToken,
                    format!("expected an operand, found `{t:?}`"),
                ))
            }
            None => {
                return Err(err(
                    self.end,
                    ParseErrorKind::UnexpectedToken,
                    "expected an operand, found end of input",
                ))
            }
        };

        loop {
            let (op, lbp, rbp) = match self.peek() {
                Some(Tok::Plus) => (BinOp::Add, 10, 11),
                Some(Tok::Minus) => (BinOp::Sub, 10, 11),
                Some(Tok::Star) => (BinOp::Mul, 20, 21),
                Some(Tok::Slash) => (BinOp::Div, 20, 21),
                Some(Tok::Caret) => (BinOp::Pow, 30, 30),
                _ => break,
            };
            if lbp < min_bp {
                break;
            }
            self.next();
            let rhs = self.expr_bp(rbp)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn call(&mut self, name: &str, at: usize) -> Result<Expr, ParseError> {
        self.next(); // consume `(`
        if name == "int" {
            let integrand = self.expr_bp(0)?;
            self.expect(Tok::Comma, "`,` (int takes 4 arguments)", ParseErrorKind::Arity)?;
            let (bvar, bpos) = match self.next() {
                Some((Tok::Ident(v), p)) => (v, p),
                Some((_, p)) => {
                    return Err(err(
                        p,
                        ParseErrorKind::UnexpectedToken,
                        "the second argument of int names the bound variable",
                    ))
                }
                None => {
                    return Err(err(
                        self.end,
                        ParseErrorKind::UnexpectedToken,
                        "the second argument of int names the bound variable",
                    ))
                }
            };
            if Func::from_name(&bvar).is_some() || bvar == "int" {
                return Err(err(
                    bpos,
                    ParseErrorKind::UnexpectedToken,
                    format!("`{bvar}` is a function name, not a usable bound variable"),
                ));
            }
            self.expect(Tok::Comma, "`,` (int takes 4 arguments)", ParseErrorKind::Arity)?;
            let lo = self.expr_bp(0)?;
            self.expect(Tok::Comma, "`,` (int takes 4 arguments)", ParseErrorKind::Arity)?;
            let hi = self.expr_bp(0)?;
            match self.next() {
                Some((Tok::RParen, _)) => {}
                Some((Tok::Comma, p)) => {
                    return Err(err(p, ParseErrorKind::Arity, "int takes exactly 4 arguments"))
                }
                Some((_, p)) => return Err(err(p, ParseErrorKind::UnbalancedParen, "expected `)`")),
                None => return Err(err(self.end, ParseErrorKind::UnbalancedParen, "unclosed `(`")),
            }
            return Ok(Expr::Integral {
                integrand: Box::new(integrand),
                var: bvar,
                lo: Box::new(lo),
                hi: Box::new(hi),
            });
        }
        let func = Func::from_name(name).ok_or_else(|| {
            err(
                at,
                ParseErrorKind::UnknownFunction,
                format!("unknown function `{name}`"),
            )
        })?;
        let arg = self.expr_bp(0)?;
        match self.next() {
            Some((Tok::RParen, _)) => Ok(Expr::call(func, arg)),
            Some((Tok::Comma, p)) => Err(err(
                p,
                ParseErrorKind::Arity,
                format!("{name} takes exactly one argument"),
            )),
            Some((_, p)) => Err(err(p, ParseErrorKind::UnbalancedParen, "expected `)`")),
            None => Err(err(self.end, ParseErrorKind::UnbalancedParen, "unclosed `(`")),
        }
    }
}

/// Walks `e` with scope tracking; emits, per variable occurrence in parse
/// order, whether that occurrence is free. Parse order equals source order
/// for every grammar production, which lets the caller zip this against the
/// recorded token positions.
fn free_flags(e: &Expr, bound: &mut Vec<String>, out: &mut Vec<bool>) {
    match e {
        Expr::Const(_) => {}
        Expr::Var(v) => out.push(!bound.iter().any(|b| b == v)),
        Expr::Neg(u) => free_flags(u, bound, out),
        Expr::Bin(_, a, b) => {
            free_flags(a, bound, out);
            free_flags(b, bound, out);
        }
        Expr::Call(_, u) => free_flags(u, bound, out),
        Expr::Integral {
            integrand,
            var,
            lo,
            hi,
        } => {
            bound.push(var.clone());
            free_flags(integrand, bound, out);
            bound.pop();
            free_flags(lo, bound, out);
            free_flags(hi, bound, out);
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
        var_uses: Vec::new(),
    };
    let e = p.expr_bp(0)?;
    if let Some((tok, at)) = p.toks.get(p.pos).cloned() {
        let kind = if tok == Tok::RParen {
            ParseErrorKind::UnbalancedParen
        } else {
            ParseErrorKind::UnexpectedToken
        };
        return Err(err(at, kind, format!("trailing input `{tok:?}`")));
    }

    // Enforce "at most one free variable". Bound occurrences are legal under
    // any name; a second distinct free name is rejected at its first use.
    let mut flags = Vec::new();
    free_flags(&e, &mut Vec::new(), &mut flags);
    debug_assert_eq!(flags.len(), p.var_uses.len());
    let mut analysis_var: Option<&str> = None;
    for ((name, at), free) in p.var_uses.iter().zip(flags.iter()) {
        if !free {
            continue;
        }
        match analysis_var {
            None => analysis_var = Some(name),
            Some(v) if v == name => {}
            Some(v) => {
                return Err(err(
                    *at,
                    ParseErrorKind::UnknownFunction,
                    format!("unknown identifier `{name}`: the free variable is already `{v}`"),
                ));
            }
        }
    }
    Ok(e)
}
