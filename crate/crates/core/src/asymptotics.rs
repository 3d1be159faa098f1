//! Limiting forms of the exact solution for small and large `w`, the
//! small-`x` and large-`x` laws for linear damping, and `erfi`.
//!
//! The kernel here is normalised so that `E(w) = w h(w)` with `h(0) != 1` in
//! general. The small-`w` law therefore reads `R = C_inv h(0) w` and the
//! large-`w` law `R = C_inv sgn(w) e^{F(+-inf)} e^{-k/2w^2}`; the constant in
//! front of `w` (or of the exponential) is what the linear-damping laws call
//! `1/C`. See [`small_w_slope`] and [`large_w_level`].

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::integrability::LienardSystem;
use crate::kernel::log_h;
use crate::kernel::quadrature::{integrate_fallible, QuadratureOptions};
use crate::solver::{invert_ratio, ChielliniParams, TIME_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AsymptoticTag {
    SmallW,
    LargeW,
    SmallX,
    LargeX,
}

/// Which limit an approximation belongs to and whether the point evaluated
/// actually lies inside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticRegime {
    pub tag: AsymptoticTag,
    /// The quantity the validity inequality is stated in.
    pub measure: f64,
    pub threshold: f64,
    pub valid: bool,
}

impl AsymptoticRegime {
    fn below(tag: AsymptoticTag, measure: f64, threshold: f64) -> Self {
        AsymptoticRegime { tag, measure, threshold, valid: measure < threshold }
    }

    fn above(tag: AsymptoticTag, measure: f64, threshold: f64) -> Self {
        AsymptoticRegime { tag, measure, threshold, valid: measure > threshold }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Approximation {
    pub x: f64,
    pub t: f64,
    pub regime: AsymptoticRegime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticOptions {
    /// Small `w` means `|w| < small_w_factor * |k|`.
    pub small_w_factor: f64,
    /// Large `w` means `|w| > large_w_factor * max(|k|, 1)`.
    pub large_w_factor: f64,
    /// Small `x` means `|a x / 2| < small_x_factor * |b|`.
    pub small_x_factor: f64,
    /// Large `x` means `|a x| > large_x_factor * |b|`.
    pub large_x_factor: f64,
    /// `(w, t)` pair the time quadratures start from; defaults to the fitted
    /// initial point.
    pub anchor: Option<(f64, f64)>,
}

impl Default for AsymptoticOptions {
    fn default() -> Self {
        AsymptoticOptions {
            small_w_factor: 0.1,
            large_w_factor: 10.0,
            small_x_factor: 0.1,
            large_x_factor: 10.0,
            anchor: None,
        }
    }
}

/// `C_inv h(0)`, the slope of `R` against `w` near `w = 0`.
pub fn small_w_slope(params: &ChielliniParams) -> Result<f64> {
    Ok(params.c_inv * log_h(0.0, &params.regime)?.exp())
}

/// `C_inv sgn(w) e^{F(+-inf)}`, the limit of `R` as `w` runs to `+-inf`.
pub fn large_w_level(params: &ChielliniParams, positive: bool) -> f64 {
    let sign = if positive { 1.0 } else { -1.0 };
    params.c_inv * sign * params.regime.f_at_infinity(positive).exp()
}

fn anchor(params: &ChielliniParams, opts: &AsymptoticOptions) -> (f64, f64) {
    opts.anchor.unwrap_or((params.w0, params.t0))
}

/// Time from the anchor to `w` under `dt = dw / (f(x(w)) weight(w))`, with
/// `x(w)` taken from the approximate relation.
fn approximate_time(
    sys: &LienardSystem,
    params: &ChielliniParams,
    x_of: impl Fn(f64) -> Result<f64>,
    weight: impl Fn(f64) -> f64,
    w: f64,
    opts: &AsymptoticOptions,
) -> Result<f64> {
    let (wa, ta) = anchor(params, opts);
    let dt = integrate_fallible(
        |s| Ok(1.0 / (sys.f.evaluate(x_of(s)?)? * weight(s))),
        wa,
        w,
        &QuadratureOptions::with_tol(TIME_TOL.max(1e-11)),
    )?;
    Ok(ta + dt.value)
}

/// Small-`w` limit: `R(x) = C_inv h(0) w` and `t - t0 = (1/k) int dw / f`.
///
/// Outside the regime the values are still computed and the flag is cleared.
pub fn approx_small_w(
    sys: &LienardSystem,
    params: &ChielliniParams,
    w: f64,
    opts: &AsymptoticOptions,
) -> Result<Approximation> {
    let slope = small_w_slope(params)?;
    let k = params.k;
    let x_of = |s: f64| invert_ratio(sys, k, slope * s, params.x0, 1e-2);
    let x = x_of(w)?;
    let t = approximate_time(sys, params, x_of, |_| k, w, opts)?;
    let regime = AsymptoticRegime::below(AsymptoticTag::SmallW, w.abs(), opts.small_w_factor * k.abs());
    Ok(Approximation { x, t, regime })
}

/// Large-`w` limit: `R(x) = C_inv sgn(w) e^{F(+-inf)} e^{-k/2w^2}` and
/// `t - t0 = int dw / (f w^2)`.
pub fn approx_large_w(
    sys: &LienardSystem,
    params: &ChielliniParams,
    w: f64,
    opts: &AsymptoticOptions,
) -> Result<Approximation> {
    if w == 0.0 {
        return Err(Error::Invalid("large-w law evaluated at w = 0".into()));
    }
    let level = large_w_level(params, w > 0.0);
    let k = params.k;
    let x_of = |s: f64| invert_ratio(sys, k, level * (-k / (2.0 * s * s)).exp(), params.x0, 1e-2);
    let x = x_of(w)?;
    let t = approximate_time(sys, params, x_of, |s| s * s, w, opts)?;
    let regime =
        AsymptoticRegime::above(AsymptoticTag::LargeW, w.abs(), opts.large_w_factor * k.abs().max(1.0));
    Ok(Approximation { x, t, regime })
}

/// Small-`x` law for `f = a x + b`: `x = e^{a (t - t0) / (b C)} / (a b k) - b/a`.
///
/// `c` is the inverse of the small-`w` slope.
pub fn approx_linear_f_small_x(
    a: f64,
    b: f64,
    k: f64,
    c: f64,
    t0: f64,
    t: f64,
    opts: &AsymptoticOptions,
) -> Result<Approximation> {
    if a == 0.0 || b == 0.0 || k == 0.0 || c == 0.0 {
        return Err(Error::Invalid("small-x law needs nonzero a, b, k and C".into()));
    }
    let x = (a * (t - t0) / (b * c)).exp() / (a * b * k) - b / a;
    // the neglected term is a x^2 / 2 against b x
    let regime = AsymptoticRegime::below(AsymptoticTag::SmallX, (a * x / 2.0).abs(), opts.small_x_factor * b.abs());
    Ok(Approximation { x, t, regime })
}

/// Large-`x` law for `f = a x + b`: `x = sqrt(2 / (C k a)) e^{-k/4w^2}` and
/// `t - t0 = -sqrt(pi C / 2a) erfi(sqrt(k) / 2w)`.
///
/// `c` is the inverse of the large-`w` level. The time law also needs
/// `a x >> b`, which is what the flag reports.
pub fn approx_linear_f_large_x(
    a: f64,
    b: f64,
    k: f64,
    c: f64,
    t0: f64,
    w: f64,
    opts: &AsymptoticOptions,
) -> Result<Approximation> {
    let scale = 2.0 / (c * k * a);
    if !(scale > 0.0) || w == 0.0 {
        return Err(Error::Invalid(format!("large-x law needs C k a > 0 and w != 0 (C k a = {})", c * k * a)));
    }
    let x = scale.sqrt() * (-k / (4.0 * w * w)).exp();
    let t = t0 - (PI * c / (2.0 * a)).sqrt() * erfi(k.sqrt() / (2.0 * w));
    let measure = if b == 0.0 { f64::INFINITY } else { (a * x / b).abs() };
    let regime = AsymptoticRegime::above(AsymptoticTag::LargeX, measure, opts.large_x_factor);
    Ok(Approximation { x, t, regime })
}

const SERIES_LIMIT: f64 = 3.0;

/// Imaginary error function `(2/sqrt(pi)) int_0^z e^{s^2} ds`.
///
/// Maclaurin series up to `|z| = 3`, beyond that `(2/sqrt(pi)) e^{z^2} D(z)`
/// with the Dawson integral `D`. Overflows to infinity past `|z| ~ 26.6`.
pub fn erfi(z: f64) -> f64 {
    if z.abs() <= SERIES_LIMIT {
        // sum z^{2n+1} / (n! (2n+1)), all terms of one sign
        let z2 = z * z;
        let mut power = z;
        let mut sum = z;
        let mut n = 0.0;
        loop {
            n += 1.0;
            power *= z2 / n;
            let term = power / (2.0 * n + 1.0);
            sum += term;
            if term.abs() <= f64::EPSILON * 0.25 * sum.abs() {
                break;
            }
        }
        2.0 / PI.sqrt() * sum
    } else {
        2.0 / PI.sqrt() * (z * z).exp() * dawson(z)
    }
}

/// Dawson integral `D(z) = e^{-z^2} int_0^z e^{s^2} ds`.
///
/// From the `erfi` series up to `|z| = 3`, by Rybicki's sampling formula
/// beyond.
pub fn dawson(z: f64) -> f64 {
    const H: f64 = 0.2;
    const TERMS: usize = 20;
    let x = z.abs();
    if x <= SERIES_LIMIT {
        return (-z * z).exp() * PI.sqrt() / 2.0 * erfi(z);
    }
    let n0 = 2.0 * (0.5 * x / H).round();
    let xp = x - n0 * H;
    let mut e1 = (2.0 * xp * H).exp();
    let e2 = e1 * e1;
    let (mut d1, mut d2) = (n0 + 1.0, n0 - 1.0);
    let mut sum = 0.0;
    for i in 0..TERMS {
        let c = (-((2 * i + 1) as f64 * H).powi(2)).exp();
        sum += c * (e1 / d1 + 1.0 / (d2 * e1));
        d1 += 2.0;
        d2 -= 2.0;
        e1 *= e2;
    }
    z.signum() / PI.sqrt() * (-xp * xp).exp() * sum
}
