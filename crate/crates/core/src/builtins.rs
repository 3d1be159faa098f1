//! Named integrable families.

use crate::error::Result;
use crate::funcmodel::{to_f64, FunctionSpec, Interval, Polynomial, Rational};
use crate::integrability::{construct_f_from_g, construct_g_from_f, ratio_from_g, LienardSystem};
use crate::solver::families::ClosedFamily;

/// `f = a x + b` with `g = f (C1 + k int f)`, a cubic restoring force.
pub fn linear_damping(a: &Rational, b: &Rational, k: &Rational, c1: &Rational) -> LienardSystem {
    let f = FunctionSpec::from(Polynomial::new(vec![b.clone(), a.clone()]));
    let g = construct_g_from_f(&f, k, c1);
    let mut sys = LienardSystem::new(f, g).named("eq48");
    sys.known_k = Some(to_f64(k));
    sys.family = Some(ClosedFamily::LinearDamping {
        a: to_f64(a),
        b: to_f64(b),
        k: to_f64(k),
        c1: to_f64(c1),
    });
    sys
}

/// `g = c x + d` with `f = sign * g / sqrt(C2 + 2k int g)`.
pub fn linear_restoring(c: &Rational, d: &Rational, k: &Rational, c2: &Rational, sign: f64) -> Result<LienardSystem> {
    let g = FunctionSpec::from(Polynomial::new(vec![d.clone(), c.clone()]));
    let (kf, c2f) = (to_f64(k), to_f64(c2));
    let f = construct_f_from_g(&g, kf, c2f, sign, None)?;
    let mut sys = LienardSystem::new(f, g.clone()).named("eq53");
    sys.ratio = Some(ratio_from_g(&g, kf, c2f, sign));
    sys.known_k = Some(kf);
    sys.family = Some(ClosedFamily::LinearRestoring {
        c: to_f64(c),
        d: to_f64(d),
        k: kf,
        c2: c2f,
        sign,
    });
    // keep the checker grid away from the zero of g, where f also vanishes
    let zero = if c.numer().sign() == num::bigint::Sign::NoSign { 0.0 } else { -to_f64(d) / to_f64(c) };
    sys.domain = Interval::new(zero + 0.25, zero + 2.25);
    Ok(sys)
}

/// `f = -mu (1 - x^2)` with `g = f (C1 + k int f)`, a quintic restoring force.
pub fn generalized_van_der_pol(mu: &Rational, k: &Rational, c1: &Rational) -> LienardSystem {
    let f = FunctionSpec::from(Polynomial::new(vec![-mu.clone(), Rational::from_integer(0.into()), mu.clone()]));
    let g = construct_g_from_f(&f, k, c1);
    let mut sys = LienardSystem::new(f, g).named("gvdp");
    sys.known_k = Some(to_f64(k));
    sys.family = Some(ClosedFamily::VanDerPol {
        mu: to_f64(mu),
        k: to_f64(k),
        c1: to_f64(c1),
    });
    sys
}
