//! Monotonicity and oscillation analysis of quotients f/g on an interval,
//! built on Hôpital-style monotone rules: the behaviour of f'/g' plus
//! endpoint comparisons classifies the shape of f/g, with certificates, and
//! an independent sampling oracle cross-checks every verdict.

pub mod catalog;
pub mod expr;
pub mod numerics;
pub mod oracle;
pub mod shape;
