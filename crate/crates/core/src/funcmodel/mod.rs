//! Coefficient functions of one real variable.
//!
//! A [`FunctionSpec`] is either a [`Polynomial`] with exact rational
//! coefficients, which supports exact calculus, or a [`BlackBox`] evaluator
//! whose antiderivative and derivative are computed numerically.

mod polynomial;

use std::fmt;
use std::sync::Arc;

pub use polynomial::{from_f64, int, parse_rational, ratio, to_f64, Polynomial, Rational};

use crate::error::{Error, Result};
use crate::kernel::quadrature::{integrate, QuadratureOptions};

/// Closed real interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn whole() -> Self {
        Interval::new(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// `n` cell midpoints; the midpoint grid avoids symmetric zeros at the centre.
    pub fn midpoint_grid(&self, n: usize) -> Vec<f64> {
        let h = self.width() / n as f64;
        (0..n).map(|i| self.lo + (i as f64 + 0.5) * h).collect()
    }

    /// `n >= 2` equally spaced points including both ends.
    pub fn linspace(&self, n: usize) -> Vec<f64> {
        let h = self.width() / (n - 1) as f64;
        (0..n)
            .map(|i| if i == n - 1 { self.hi } else { self.lo + i as f64 * h })
            .collect()
    }
}

pub type Evaluator = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// Opaque deterministic function of one variable.
#[derive(Clone)]
pub struct BlackBox {
    label: String,
    domain: Interval,
    eval: Evaluator,
    derivative: Option<Evaluator>,
    anchor: Option<f64>,
}

impl BlackBox {
    pub fn new(
        label: impl Into<String>,
        domain: Interval,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::fallible(label, domain, move |x| Ok(f(x)))
    }

    pub fn fallible(
        label: impl Into<String>,
        domain: Interval,
        f: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        BlackBox {
            label: label.into(),
            domain,
            eval: Arc::new(f),
            derivative: None,
            anchor: None,
        }
    }

    /// Attaches an exact derivative.
    pub fn with_derivative(mut self, d: impl Fn(f64) -> Result<f64> + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    /// Reference point of a quadrature-backed antiderivative.
    pub fn anchor(&self) -> Option<f64> {
        self.anchor
    }

    fn call(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFinite { x, context: self.label.clone() });
        }
        if !self.domain.contains(x) {
            return Err(Error::Domain {
                label: self.label.clone(),
                x,
                lo: self.domain.lo,
                hi: self.domain.hi,
            });
        }
        (self.eval)(x)
    }
}

/// A real function of one real variable.
#[derive(Clone)]
pub enum FunctionSpec {
    Polynomial(Polynomial),
    BlackBox(BlackBox),
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Polynomial(p) => write!(f, "Polynomial({p})"),
            FunctionSpec::BlackBox(b) => write!(f, "BlackBox({})", b.label),
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Polynomial(p) => write!(f, "{p}"),
            FunctionSpec::BlackBox(b) => write!(f, "{}", b.label),
        }
    }
}

impl From<Polynomial> for FunctionSpec {
    fn from(p: Polynomial) -> Self {
        FunctionSpec::Polynomial(p)
    }
}

impl From<BlackBox> for FunctionSpec {
    fn from(b: BlackBox) -> Self {
        FunctionSpec::BlackBox(b)
    }
}

/// Central-difference step `cbrt(eps) * max(1, |x|)`.
pub fn fd_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

impl FunctionSpec {
    pub fn poly(coeffs: &[i64]) -> Self {
        Polynomial::from_ints(coeffs).into()
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        match self {
            FunctionSpec::Polynomial(p) => Some(p),
            FunctionSpec::BlackBox(_) => None,
        }
    }

    pub fn is_zero_polynomial(&self) -> bool {
        self.as_polynomial().is_some_and(Polynomial::is_zero)
    }

    pub fn domain(&self) -> Interval {
        match self {
            FunctionSpec::Polynomial(_) => Interval::whole(),
            FunctionSpec::BlackBox(b) => b.domain,
        }
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        match self {
            FunctionSpec::Polynomial(p) => {
                if !x.is_finite() {
                    return Err(Error::NonFinite { x, context: "polynomial".into() });
                }
                Ok(p.eval(x))
            }
            FunctionSpec::BlackBox(b) => b.call(x),
        }
    }

    /// Antiderivative anchored at 0.
    pub fn antiderivative(&self) -> FunctionSpec {
        self.antiderivative_from(0.0)
    }

    /// Antiderivative `x -> int_{x_ref}^x f`. Polynomials ignore `x_ref` and keep
    /// a zero constant term, which coincides with anchoring at 0.
    pub fn antiderivative_from(&self, x_ref: f64) -> FunctionSpec {
        match self {
            FunctionSpec::Polynomial(p) => p.antiderivative().into(),
            FunctionSpec::BlackBox(b) => {
                let inner = b.clone();
                let integrand = b.clone();
                let opts = QuadratureOptions::default();
                let mut out = BlackBox::fallible(
                    format!("int[{}]", b.label),
                    b.domain,
                    move |x| {
                        if !inner.domain.contains(x_ref) {
                            return Err(Error::Domain {
                                label: format!("anchor of int[{}]", inner.label),
                                x: x_ref,
                                lo: inner.domain.lo,
                                hi: inner.domain.hi,
                            });
                        }
                        let mut failure = None;
                        let value = integrate(
                            |s| match inner.call(s) {
                                Ok(v) => v,
                                Err(e) => {
                                    failure.get_or_insert(e);
                                    f64::NAN
                                }
                            },
                            x_ref,
                            x,
                            &opts,
                        );
                        if let Some(e) = failure {
                            return Err(e);
                        }
                        Ok(value?.value)
                    },
                )
                .with_derivative(move |x| integrand.call(x));
                out.anchor = Some(x_ref);
                out.into()
            }
        }
    }

    pub fn derivative(&self) -> FunctionSpec {
        match self {
            FunctionSpec::Polynomial(p) => p.derivative().into(),
            FunctionSpec::BlackBox(b) => match &b.derivative {
                Some(d) => {
                    let mut out = b.clone();
                    out.label = format!("d[{}]", b.label);
                    out.eval = d.clone();
                    out.derivative = None;
                    out.anchor = None;
                    out.into()
                }
                None => {
                    let inner = b.clone();
                    BlackBox::fallible(format!("d[{}]", b.label), b.domain, move |x| {
                        let h = fd_step(x);
                        Ok((inner.call(x + h)? - inner.call(x - h)?) / (2.0 * h))
                    })
                    .into()
                }
            },
        }
    }

    /// Derivative value at a point without building a new spec.
    pub fn derivative_at(&self, x: f64) -> Result<f64> {
        match self {
            FunctionSpec::Polynomial(p) => Ok(p.derivative().eval(x)),
            FunctionSpec::BlackBox(b) => match &b.derivative {
                Some(d) => {
                    b.call(x)?;
                    d(x)
                }
                None => {
                    let h = fd_step(x);
                    Ok((b.call(x + h)? - b.call(x - h)?) / (2.0 * h))
                }
            },
        }
    }

    /// Black box computing `x -> op(self(x))`.
    pub fn map(&self, label: impl Into<String>, op: impl Fn(f64) -> f64 + Send + Sync + 'static) -> FunctionSpec {
        let inner = self.clone();
        BlackBox::fallible(label, self.domain(), move |x| Ok(op(inner.evaluate(x)?))).into()
    }

    /// Black box computing `x -> op(self(x), other(x))`.
    pub fn zip(
        &self,
        other: &FunctionSpec,
        label: impl Into<String>,
        op: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> FunctionSpec {
        let (a, b) = (self.clone(), other.clone());
        let da = self.domain();
        let db = other.domain();
        let domain = Interval::new(da.lo.max(db.lo), da.hi.min(db.hi));
        BlackBox::fallible(label, domain, move |x| Ok(op(a.evaluate(x)?, b.evaluate(x)?))).into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_polynomials() {
        assert_eq!(FunctionSpec::poly(&[0, 1]).evaluate(3.0).unwrap(), 3.0);
        assert_eq!(FunctionSpec::poly(&[1, 1]).evaluate(2.0).unwrap(), 3.0);
        let g = Polynomial::new(vec![int(1), int(2), ratio(3, 2), ratio(1, 2)]);
        assert_eq!(FunctionSpec::from(g).evaluate(1.0).unwrap(), 5.0);
    }

    #[test]
    fn polynomial_antiderivatives() {
        let f = FunctionSpec::poly(&[1, 1]);
        let expected = Polynomial::new(vec![int(0), int(1), ratio(1, 2)]);
        assert_eq!(f.antiderivative().as_polynomial(), Some(&expected));

        let vdp = FunctionSpec::poly(&[-1, 0, 1]);
        let expected = Polynomial::new(vec![int(0), int(-1), int(0), ratio(1, 3)]);
        assert_eq!(vdp.antiderivative().as_polynomial(), Some(&expected));

        assert!(FunctionSpec::poly(&[0]).antiderivative().is_zero_polynomial());
    }

    #[test]
    fn polynomial_derivatives() {
        let half_sq = FunctionSpec::from(Polynomial::new(vec![int(0), int(0), ratio(1, 2)]));
        assert_eq!(half_sq.derivative().as_polynomial(), Some(&Polynomial::x()));
        let sq = FunctionSpec::poly(&[0, 0, 1]);
        assert_eq!(sq.derivative().as_polynomial(), Some(&Polynomial::from_ints(&[0, 2])));
    }

    #[test]
    fn blackbox_derivative_by_central_difference() {
        let sin = FunctionSpec::from(BlackBox::new("sin", Interval::whole(), f64::sin));
        assert!((sin.derivative().evaluate(0.0).unwrap() - 1.0).abs() < 1e-8);
        assert!((sin.derivative_at(1.0).unwrap() - 1f64.cos()).abs() < 1e-8);
    }

    #[test]
    fn blackbox_antiderivative_is_anchored() {
        let cos = FunctionSpec::from(BlackBox::new("cos", Interval::whole(), f64::cos));
        let sin = cos.antiderivative();
        match &sin {
            FunctionSpec::BlackBox(b) => assert_eq!(b.anchor(), Some(0.0)),
            _ => panic!("expected a black box"),
        }
        assert!((sin.evaluate(1.2).unwrap() - 1.2f64.sin()).abs() < 1e-11);
        let shifted = cos.antiderivative_from(1.0);
        assert!((shifted.evaluate(2.0).unwrap() - (2f64.sin() - 1f64.sin())).abs() < 1e-11);
        // exact derivative is the integrand itself
        assert_eq!(sin.derivative_at(0.3).unwrap(), 0.3f64.cos());
    }

    #[test]
    fn blackbox_domain_is_enforced() {
        let ln = FunctionSpec::from(BlackBox::new("ln", Interval::new(1e-9, 1e9), f64::ln));
        assert!(matches!(ln.evaluate(-1.0), Err(Error::Domain { .. })));
        assert!(matches!(ln.evaluate(f64::NAN), Err(Error::NonFinite { .. })));
        let broken = ln.antiderivative();
        assert!(matches!(broken.evaluate(2.0), Err(Error::Domain { .. })));
        assert!(ln.antiderivative_from(1.0).evaluate(2.0).is_ok());
    }
}
