use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("x = {x} is outside the domain [{lo}, {hi}] of `{label}`")]
    Domain { label: String, x: f64, lo: f64, hi: f64 },

    #[error("non-finite argument or value at x = {x} ({context})")]
    NonFinite { x: f64, context: String },

    #[error("singular coefficient: {what} vanishes at x = {x}")]
    Singular { what: String, x: f64 },

    #[error("pole of the kernel at w = {at} (excluded points: {excluded:?})")]
    Pole { at: f64, excluded: Vec<f64> },

    #[error("kernel overflow near w = {w}: {detail}")]
    Overflow { w: f64, detail: String },

    #[error("radicand {value} <= 0 at x = {x}")]
    Radicand { x: f64, value: f64 },

    #[error("no sign change on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("quadrature accuracy not reached: estimate {estimate}, error bound {error_bound}")]
    Accuracy { estimate: f64, error_bound: f64 },

    #[error("integration failed at t = {t} (x = {x}, xdot = {xdot}): {reason}")]
    Integration { t: f64, x: f64, xdot: f64, reason: String },

    #[error("time {t} outside the solution window [{lo}, {hi}]")]
    Range { t: f64, lo: f64, hi: f64 },

    #[error("windows do not overlap: [{a_lo}, {a_hi}] vs [{b_lo}, {b_hi}]")]
    Window { a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64 },

    #[error("inversion failed: {0}")]
    Inversion(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
