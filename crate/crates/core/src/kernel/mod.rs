//! The kernel `F(w, k) = k * int dw / (w (w^2 + w + k))`, the companion
//! integral `G0`, and the numerical primitives shared by the rest of the crate.
//!
//! `F` is evaluated in closed form on three analytic regimes of `k`. Every
//! closed form is written as `F = ln|w| + log_h(w)`, where `log_h` stays
//! finite at `w = 0`; the signed quantity `E(w) = w * exp(log_h(w))` equals
//! `sgn(w) e^F` and is continuous through the origin.

pub mod quadrature;
pub mod roots;

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use quadrature::{integrate, QuadratureOptions};
pub use roots::{bracketed_root, bracketed_root_fallible, real_cubic_roots, DEFAULT_ROOT_TOL};

/// Half-width of the band around `k = 1/4` where the double-root form is used.
pub const TRANSITION_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeTag {
    AboveQuarter,
    Quarter,
    BelowQuarter,
    Zero,
}

impl std::fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RegimeTag::AboveQuarter => "k>1/4",
            RegimeTag::Quarter => "k=1/4",
            RegimeTag::BelowQuarter => "k<1/4",
            RegimeTag::Zero => "k=0",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelRegime {
    pub tag: RegimeTag,
    pub k: f64,
    pub band: f64,
}

impl KernelRegime {
    pub fn new(k: f64) -> Self {
        Self::with_band(k, TRANSITION_BAND)
    }

    pub fn with_band(k: f64, band: f64) -> Self {
        let tag = if k == 0.0 {
            RegimeTag::Zero
        } else if (k - 0.25).abs() <= band {
            RegimeTag::Quarter
        } else if k > 0.25 {
            RegimeTag::AboveQuarter
        } else {
            RegimeTag::BelowQuarter
        };
        KernelRegime { tag, k, band }
    }

    /// `sqrt(|4k - 1|)`; zero in the double-root band.
    pub fn q(&self) -> f64 {
        match self.tag {
            RegimeTag::Quarter => 0.0,
            _ => (4.0 * self.k - 1.0).abs().sqrt(),
        }
    }

    /// Real roots of `w^2 + w + k`, ascending.
    pub fn quadratic_roots(&self) -> Vec<f64> {
        match self.tag {
            RegimeTag::AboveQuarter => vec![],
            RegimeTag::Quarter => vec![-0.5],
            RegimeTag::BelowQuarter | RegimeTag::Zero => {
                let s = self.q();
                vec![(-1.0 - s) / 2.0, (-1.0 + s) / 2.0]
            }
        }
    }

    /// Real roots of `w (w^2 + w + k)`, ascending and deduplicated.
    pub fn excluded_points(&self) -> Vec<f64> {
        let mut pts = self.quadratic_roots();
        pts.push(0.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// `lim F(w)` as `w -> +inf` (`positive`) or `-inf`.
    pub fn f_at_infinity(&self, positive: bool) -> f64 {
        match self.tag {
            RegimeTag::AboveQuarter => {
                let v = PI / (2.0 * self.q());
                if positive {
                    -v
                } else {
                    v
                }
            }
            _ => 0.0,
        }
    }

    /// Ratio applied to the signed kernel each time `w` passes through infinity:
    /// `-exp(F(+inf) - F(-inf))`.
    pub fn sheet_factor(&self) -> f64 {
        -(self.f_at_infinity(true) - self.f_at_infinity(false)).exp()
    }

    fn check_pole(&self, w: f64, include_zero: bool) -> Result<()> {
        if !w.is_finite() {
            return Err(Error::NonFinite { x: w, context: "kernel argument".into() });
        }
        let hits_root = self.quadratic_roots().contains(&w);
        if hits_root || (include_zero && w == 0.0) {
            return Err(Error::Pole { at: w, excluded: self.excluded_points() });
        }
        Ok(())
    }
}

/// Continuous part of the kernel written on the angle `phi = atan(w)`,
/// `|phi| <= pi/2`, with `s = sin phi`, `c = cos phi >= 0`.
fn angular_extra(s: f64, c: f64, r: &KernelRegime) -> f64 {
    match r.tag {
        RegimeTag::AboveQuarter => {
            let q = r.q();
            -(c + 2.0 * s).atan2(q * c) / q
        }
        RegimeTag::Quarter => c / (c + 2.0 * s),
        RegimeTag::BelowQuarter => {
            let q = r.q();
            let lo = (-1.0 - q) / 2.0;
            let hi = (-1.0 + q) / 2.0;
            ((s - lo * c) / (s - hi * c)).abs().ln() / (2.0 * q)
        }
        RegimeTag::Zero => 0.0,
    }
}

/// `D(phi) = cos^2(phi) (w^2 + w + k)`.
pub fn angular_quadratic(phi: f64, k: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    s * s + s * c + k * c * c
}

fn saturate(v: f64, w: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow { w, detail: format!("{what} evaluated to {v}") })
    }
}

/// `log_h(w) = F(w, k) - ln|w|`, finite at `w = 0` for `k != 0`.
pub fn log_h(w: f64, regime: &KernelRegime) -> Result<f64> {
    regime.check_pole(w, regime.tag == RegimeTag::Zero)?;
    let k = regime.k;
    let v = match regime.tag {
        RegimeTag::AboveQuarter => {
            let q = regime.q();
            -0.5 * (w * w + w + k).ln() - ((1.0 + 2.0 * w) / q).atan() / q
        }
        RegimeTag::Quarter => {
            let u = 1.0 + 2.0 * w;
            std::f64::consts::LN_2 - u.abs().ln() + 1.0 / u
        }
        RegimeTag::BelowQuarter => {
            let q = regime.q();
            let (lo, hi) = ((-1.0 - q) / 2.0, (-1.0 + q) / 2.0);
            -0.5 * (w - hi).abs().ln() - 0.5 * (w - lo).abs().ln() - (2.0 * (w - hi) / q).abs().ln() / (2.0 * q)
                + (2.0 * (w - lo) / q).abs().ln() / (2.0 * q)
        }
        RegimeTag::Zero => -w.abs().ln(),
    };
    saturate(v, w, "log_h")
}

/// Closed-form `F(w, k)`.
pub fn f_closed(w: f64, regime: &KernelRegime) -> Result<f64> {
    regime.check_pole(w, true)?;
    if regime.tag == RegimeTag::Zero {
        return Ok(0.0);
    }
    saturate(w.abs().ln() + log_h(w, regime)?, w, "F")
}

/// Signed kernel `E(w) = sgn(w) e^{F(w,k)}`, continuous through `w = 0`.
pub fn signed_kernel(w: f64, regime: &KernelRegime) -> Result<f64> {
    if regime.tag == RegimeTag::Zero {
        regime.check_pole(w, true)?;
        return Ok(w.signum());
    }
    regime.check_pole(w, false)?;
    Ok(w * log_h(w, regime)?.exp())
}

/// `dF/dw = k / (w (w^2 + w + k))`.
pub fn f_derivative(w: f64, k: f64) -> f64 {
    k / (w * (w * w + w + k))
}

/// Kernel quantities at a point of the angle chart, `w = tan(phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularKernel {
    /// `E(w)`, finite at both ends of the sheet.
    pub signed: f64,
    /// `h(w) = E(w) / w`, zero at `w = +-inf`.
    pub h: f64,
    /// `D(phi)`.
    pub quad: f64,
}

/// Evaluates the kernel at `w = tan(phi)` for `phi` in `[-pi/2, pi/2]`,
/// including the end points where `w` is infinite.
pub fn angular_kernel(phi: f64, regime: &KernelRegime) -> Result<AngularKernel> {
    let (s, c) = if phi.abs() >= FRAC_PI_2 { (phi.signum(), 0.0) } else { phi.sin_cos() };
    let c = c.max(0.0);
    let quad = s * s + s * c + regime.k * c * c;
    if regime.tag == RegimeTag::Zero {
        return Err(Error::Invalid("angle chart is undefined for k = 0".into()));
    }
    if quad == 0.0 {
        return Err(Error::Pole { at: s / c, excluded: regime.excluded_points() });
    }
    let base = -0.5 * quad.abs().ln() + angular_extra(s, c, regime);
    let signed = s.signum() * (s.abs().ln() + base).exp();
    let signed = if s == 0.0 { 0.0 } else { signed };
    let h = if c == 0.0 { 0.0 } else { (c.ln() + base).exp() };
    if !signed.is_finite() || !h.is_finite() {
        return Err(Error::Overflow { w: s / c, detail: "angular kernel".into() });
    }
    Ok(AngularKernel { signed, h, quad })
}

/// `k * int_{w_ref}^{w} ds / (s (s^2 + s + k))` by adaptive quadrature.
pub fn f_quadrature(w: f64, w_ref: f64, k: f64) -> Result<f64> {
    f_quadrature_with(w, w_ref, k, &QuadratureOptions::default())
}

pub fn f_quadrature_with(w: f64, w_ref: f64, k: f64, opts: &QuadratureOptions) -> Result<f64> {
    if w == w_ref {
        return Ok(0.0);
    }
    let regime = KernelRegime::new(k);
    let (lo, hi) = (w.min(w_ref), w.max(w_ref));
    let excluded = regime.excluded_points();
    if let Some(&p) = excluded.iter().find(|&&p| lo <= p && p <= hi) {
        return Err(Error::Pole { at: p, excluded });
    }
    Ok(integrate(|s| k / (s * (s * s + s + k)), w_ref, w, opts)?.value)
}

/// `int_{s_ref}^{s} du / (u^3 + u^2 + k1 u + k2)` by adaptive quadrature.
pub fn g0(s: f64, s_ref: f64, k1: f64, k2: f64) -> Result<f64> {
    if s == s_ref {
        return Ok(0.0);
    }
    let roots = real_cubic_roots(1.0, k1, k2);
    let (lo, hi) = (s.min(s_ref), s.max(s_ref));
    if let Some(&p) = roots.iter().find(|&&p| lo <= p && p <= hi) {
        return Err(Error::Pole { at: p, excluded: roots });
    }
    let opts = QuadratureOptions::default();
    Ok(integrate(|u| 1.0 / (((u + 1.0) * u + k1) * u + k2), s_ref, s, &opts)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regime(k: f64) -> KernelRegime {
        KernelRegime::new(k)
    }

    #[test]
    fn classifies_regimes() {
        assert_eq!(regime(1.0).tag, RegimeTag::AboveQuarter);
        assert_eq!(regime(0.25 + 5e-7).tag, RegimeTag::Quarter);
        assert_eq!(regime(0.1).tag, RegimeTag::BelowQuarter);
        assert_eq!(regime(-1.0).tag, RegimeTag::BelowQuarter);
        assert_eq!(regime(0.0).tag, RegimeTag::Zero);
    }

    #[test]
    fn closed_form_at_unit_argument() {
        let want = -0.5 * 3f64.ln() - PI / (3.0 * 3f64.sqrt());
        assert!((f_closed(1.0, &regime(1.0)).unwrap() - want).abs() < 1e-14);
        assert!((want + 1.1540).abs() < 1e-4);
        let quarter = (2.0f64 / 3.0).ln() + 1.0 / 3.0;
        assert!((f_closed(1.0, &regime(0.25)).unwrap() - quarter).abs() < 1e-14);
        assert!((quarter + 0.0721).abs() < 1e-4);
    }

    #[test]
    fn derivative_identity_at_unit_argument() {
        let r = regime(1.0);
        let h = 1e-5;
        let fd = (f_closed(1.0 + h, &r).unwrap() - f_closed(1.0 - h, &r).unwrap()) / (2.0 * h);
        assert!((fd - 1.0 / 3.0).abs() < 1e-9);
        assert_eq!(f_derivative(1.0, 1.0), 1.0 / 3.0);
    }

    #[test]
    fn quadrature_matches_closed_differences() {
        for k in [1.0, 0.1, 0.25, -1.0, 3.0] {
            let r = regime(k);
            let want = f_closed(2.0, &r).unwrap() - f_closed(1.0, &r).unwrap();
            assert!((f_quadrature(2.0, 1.0, k).unwrap() - want).abs() < 1e-9, "k = {k}");
        }
        assert_eq!(f_quadrature(1.0, 1.0, 0.7).unwrap(), 0.0);
        assert!(matches!(f_quadrature(1.0, -1.0, 1.0), Err(Error::Pole { .. })));
    }

    #[test]
    fn poles_are_rejected() {
        assert!(matches!(f_closed(0.0, &regime(1.0)), Err(Error::Pole { .. })));
        let r = regime(0.1);
        let root = r.quadratic_roots()[1];
        assert!(matches!(f_closed(root, &r), Err(Error::Pole { .. })));
        assert!(matches!(f_closed(-0.5, &regime(0.25)), Err(Error::Pole { .. })));
    }

    #[test]
    fn limits_at_infinity() {
        for k in [0.5, 1.0, 4.0, 0.1, 0.25, -2.0] {
            let r = regime(k);
            for (w, positive) in [(1e9, true), (-1e9, false)] {
                let f = f_closed(w, &r).unwrap();
                assert!((f - r.f_at_infinity(positive)).abs() < 1e-8, "k = {k}, w = {w}");
            }
        }
    }

    #[test]
    fn signed_kernel_is_continuous_at_origin() {
        let r = regime(1.0);
        let e = signed_kernel(1e-9, &r).unwrap();
        let h0 = log_h(0.0, &r).unwrap().exp();
        assert!((e / 1e-9 - h0).abs() < 1e-8);
        assert_eq!(signed_kernel(0.0, &r).unwrap(), 0.0);
        assert!(signed_kernel(-1e-9, &r).unwrap() < 0.0);
    }

    #[test]
    fn angular_form_agrees_with_closed_form() {
        for k in [1.0, 0.3, 0.25, 0.1, -1.0] {
            let r = regime(k);
            for w in [-7.0, -2.5, -0.3, 0.2, 1.0, 4.0, 50.0] {
                if r.quadratic_roots().iter().any(|p| (p - w).abs() < 1e-9) {
                    continue;
                }
                let a = angular_kernel(w.atan(), &r).unwrap();
                let e = signed_kernel(w, &r).unwrap();
                assert!((a.signed - e).abs() <= 1e-12 * e.abs().max(1.0), "k = {k}, w = {w}");
                assert!((a.h - e / w).abs() <= 1e-12 * (e / w).abs().max(1.0));
            }
            let top = angular_kernel(PI / 2.0, &r).unwrap();
            assert!((top.signed - r.f_at_infinity(true).exp()).abs() < 1e-12);
            assert_eq!(top.h, 0.0);
        }
    }

    #[test]
    fn g0_examples() {
        // Simpson oracle on a fine grid
        let n = 20_000;
        let h = 1.0 / n as f64;
        let f = |s: f64| 1.0 / (s * s * s + s * s + 1.0);
        let mut simpson = f(0.0) + f(1.0);
        for i in 1..n {
            simpson += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        simpson *= h / 3.0;
        let v = g0(1.0, 0.0, 0.0, 1.0).unwrap();
        assert!((v - simpson).abs() < 1e-12);
        assert!((v - 0.709_275_411_9).abs() < 1e-10);
        assert_eq!(g0(0.4, 0.4, 1.0, 1.0).unwrap(), 0.0);
        let k = 0.7;
        let r = regime(k);
        let df = f_closed(3.0, &r).unwrap() - f_closed(0.5, &r).unwrap();
        assert!((k * g0(3.0, 0.5, k, 0.0).unwrap() - df).abs() < 1e-9);
        assert!(matches!(g0(1.0, -1.0, 0.0, 0.0), Err(Error::Pole { .. })));
    }
}
