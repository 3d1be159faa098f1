//! Integrability conditions for Lienard and Abel equations.
//!
//! A Lienard system `x'' + f(x) x' + g(x) = 0` is integrable here when the
//! ratio `R = g / f` satisfies `R' = k f` for a constant `k`.

use std::fmt;

use crate::error::{Error, Result};
use crate::funcmodel::{from_f64, to_f64, BlackBox, FunctionSpec, Interval, Polynomial, Rational};
use crate::solver::families::ClosedFamily;

/// Default grid used by the checkers when a system has no finite domain.
pub const DEFAULT_CHECK_DOMAIN: Interval = Interval { lo: -2.0, hi: 2.0 };
/// Residual tolerance when every coefficient is an exact polynomial.
pub const EXACT_TOL: f64 = 1e-9;
/// Residual tolerance when a black-box coefficient is involved.
pub const BLACKBOX_TOL: f64 = 1e-6;
/// `|k|` at or below this is reported as the degenerate `k = 0` case.
pub const DEGENERATE_K: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LienardSystem {
    pub name: String,
    pub f: FunctionSpec,
    pub g: FunctionSpec,
    /// Interval sampled by the checkers.
    pub domain: Interval,
    /// Closed form of `g / f` valid where `f` vanishes, if known.
    pub ratio: Option<FunctionSpec>,
    pub known_k: Option<f64>,
    pub family: Option<ClosedFamily>,
}

impl LienardSystem {
    pub fn new(f: FunctionSpec, g: FunctionSpec) -> Self {
        let domain = match (f.domain(), g.domain()) {
            (a, b) if a.lo.is_finite() || a.hi.is_finite() || b.lo.is_finite() || b.hi.is_finite() => {
                Interval::new(a.lo.max(b.lo).max(-1e6), a.hi.min(b.hi).min(1e6))
            }
            _ => DEFAULT_CHECK_DOMAIN,
        };
        let ratio = match (f.as_polynomial(), g.as_polynomial()) {
            (Some(pf), Some(pg)) => pg.exact_div(pf).map(FunctionSpec::from),
            _ => None,
        };
        LienardSystem {
            name: "custom".into(),
            f,
            g,
            domain,
            ratio,
            known_k: None,
            family: None,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_domain(mut self, domain: Interval) -> Self {
        self.domain = domain;
        self
    }

    pub fn is_polynomial(&self) -> bool {
        self.f.as_polynomial().is_some() && self.g.as_polynomial().is_some()
    }

    /// `g(x) / f(x)`, through the stored closed form when there is one.
    pub fn ratio_at(&self, x: f64) -> Result<f64> {
        if let Some(r) = &self.ratio {
            return r.evaluate(x);
        }
        let f = self.f.evaluate(x)?;
        if f == 0.0 {
            return Err(Error::Singular { what: "f".into(), x });
        }
        Ok(self.g.evaluate(x)? / f)
    }

    /// Right-hand side `x'' = -f(x) x' - g(x)`.
    pub fn acceleration(&self, x: f64, xdot: f64) -> Result<f64> {
        Ok(-self.f.evaluate(x)? * xdot - self.g.evaluate(x)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Integrable,
    DegenerateKZero,
    NotIntegrable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Integrable => "integrable",
            Verdict::DegenerateKZero => "degenerate: use k=0 branch",
            Verdict::NotIntegrable => "not integrable",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChielliniCertificate {
    pub holds: bool,
    pub k: f64,
    /// Exact `k` when the check went through polynomial division.
    pub exact_k: Option<Rational>,
    pub residual: f64,
    pub tolerance: f64,
    pub grid: Vec<f64>,
    pub verdict: Verdict,
}

impl fmt::Display for ChielliniCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match &self.exact_k {
            Some(r) => r.to_string(),
            None => format!("{}", self.k),
        };
        write!(
            f,
            "holds={} k={} residual={:e} tolerance={:e} verdict={}",
            self.holds, k, self.residual, self.tolerance, self.verdict
        )
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn finite_grid(domain: Interval, grid_size: usize) -> Result<Vec<f64>> {
    if grid_size < 8 {
        return Err(Error::Invalid(format!("grid size {grid_size} is below the minimum of 8")));
    }
    if !(domain.lo.is_finite() && domain.hi.is_finite() && domain.lo < domain.hi) {
        return Err(Error::Invalid(format!("cannot sample the domain [{}, {}]", domain.lo, domain.hi)));
    }
    Ok(domain.midpoint_grid(grid_size))
}

fn verdict_for(holds: bool, k: f64) -> Verdict {
    match (holds, k.abs() <= DEGENERATE_K) {
        (false, _) => Verdict::NotIntegrable,
        (true, true) => Verdict::DegenerateKZero,
        (true, false) => Verdict::Integrable,
    }
}

/// Tests `d/dx (g/f) = k f` and estimates `k`.
pub fn check_chiellini(sys: &LienardSystem, grid_size: usize) -> Result<ChielliniCertificate> {
    let grid = finite_grid(sys.domain, grid_size)?;
    let exact = sys.is_polynomial();
    let tolerance = if exact { EXACT_TOL } else { BLACKBOX_TOL };
    for &x in &grid {
        if sys.f.evaluate(x)? == 0.0 {
            return Err(Error::Singular { what: "f".into(), x });
        }
    }

    if let (Some(pf), Some(pg)) = (sys.f.as_polynomial(), sys.g.as_polynomial()) {
        if let Some(ratio) = pg.exact_div(pf) {
            let slope = ratio.derivative();
            if let Some(k) = slope.proportionality(pf) {
                let kf = to_f64(&k);
                return Ok(ChielliniCertificate {
                    holds: true,
                    k: kf,
                    verdict: if k == Rational::from_integer(0.into()) {
                        Verdict::DegenerateKZero
                    } else {
                        verdict_for(true, kf)
                    },
                    exact_k: Some(k),
                    residual: 0.0,
                    tolerance,
                    grid,
                });
            }
        }
    }

    let mut slopes = Vec::with_capacity(grid.len());
    let mut fs = Vec::with_capacity(grid.len());
    for &x in &grid {
        let f = sys.f.evaluate(x)?;
        let g = sys.g.evaluate(x)?;
        let slope = (sys.g.derivative_at(x)? * f - g * sys.f.derivative_at(x)?) / (f * f);
        slopes.push(slope);
        fs.push(f);
    }
    let mut ratios: Vec<f64> = slopes.iter().zip(&fs).map(|(s, f)| s / f).collect();
    let k = median(&mut ratios);
    let residual = slopes
        .iter()
        .zip(&fs)
        .map(|(s, f)| (s - k * f).abs())
        .fold(0.0, f64::max);
    let holds = residual <= tolerance;
    Ok(ChielliniCertificate {
        holds,
        k,
        exact_k: None,
        residual,
        tolerance,
        grid,
        verdict: verdict_for(holds, k),
    })
}

/// `g = f (C1 + k int f)`; exact when `f` is a polynomial.
pub fn construct_g_from_f(f: &FunctionSpec, k: &Rational, c1: &Rational) -> FunctionSpec {
    match f {
        FunctionSpec::Polynomial(p) => {
            let inner = &Polynomial::constant(c1.clone()) + &p.antiderivative().scale(k);
            (p * &inner).into()
        }
        FunctionSpec::BlackBox(_) => {
            let (kf, c1f) = (to_f64(k), to_f64(c1));
            f.zip(&f.antiderivative(), format!("{f} * ({c1f} + {kf} * int[{f}])"), move |fv, int| {
                fv * (c1f + kf * int)
            })
        }
    }
}

/// `f = sign * g / sqrt(C2 + 2k int g)`.
///
/// When `interval` is given the radicand is checked on a 1001-point grid and
/// the first violating point is reported.
pub fn construct_f_from_g(
    g: &FunctionSpec,
    k: f64,
    c2: f64,
    sign: f64,
    interval: Option<Interval>,
) -> Result<FunctionSpec> {
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::Invalid(format!("sign must be +1 or -1, got {sign}")));
    }
    let radicand = radicand_fn(g, k, c2);
    if let Some(iv) = interval {
        for x in iv.linspace(1001) {
            let value = radicand(x)?;
            if value <= 0.0 {
                return Err(Error::Radicand { x, value });
            }
        }
    }
    let domain = interval.unwrap_or_else(|| g.domain());
    let gg = g.clone();
    let rad = radicand_fn(g, k, c2);
    let rad_d = radicand_fn(g, k, c2);
    let gd = g.clone();
    let f = BlackBox::fallible(format!("{sign} * ({g}) / sqrt({c2} + 2*{k}*int[{g}])"), domain, move |x| {
        let p = rad(x)?;
        if p <= 0.0 {
            return Err(Error::Radicand { x, value: p });
        }
        Ok(sign * gg.evaluate(x)? / p.sqrt())
    })
    .with_derivative(move |x| {
        let p = rad_d(x)?;
        if p <= 0.0 {
            return Err(Error::Radicand { x, value: p });
        }
        let gv = gd.evaluate(x)?;
        Ok(sign * (gd.derivative_at(x)? * p - k * gv * gv) / (p * p.sqrt()))
    });
    Ok(f.into())
}

fn radicand_fn(g: &FunctionSpec, k: f64, c2: f64) -> impl Fn(f64) -> Result<f64> + Send + Sync + 'static {
    let int_g = g.antiderivative();
    move |x| Ok(c2 + 2.0 * k * int_g.evaluate(x)?)
}

/// `R = g / f = sign * sqrt(C2 + 2k int g)` for a system built by
/// [`construct_f_from_g`]; its derivative is `k f`.
pub fn ratio_from_g(g: &FunctionSpec, k: f64, c2: f64, sign: f64) -> FunctionSpec {
    let rad = radicand_fn(g, k, c2);
    let rad_d = radicand_fn(g, k, c2);
    let gd = g.clone();
    BlackBox::fallible(format!("{sign} * sqrt({c2} + 2*{k}*int[{g}])"), g.domain(), move |x| {
        let p = rad(x)?;
        if p < 0.0 {
            return Err(Error::Radicand { x, value: p });
        }
        Ok(sign * p.sqrt())
    })
    .with_derivative(move |x| {
        let p = rad_d(x)?;
        if p <= 0.0 {
            return Err(Error::Radicand { x, value: p });
        }
        Ok(sign * k * gd.evaluate(x)? / p.sqrt())
    })
    .into()
}

/// Coefficients of `dv/dx = a + b v + f v^2 + g v^3`.
#[derive(Debug, Clone)]
pub struct GeneralAbel {
    pub a: FunctionSpec,
    pub b: FunctionSpec,
    pub f: FunctionSpec,
    pub g: FunctionSpec,
    pub domain: Interval,
}

impl GeneralAbel {
    pub fn new(a: FunctionSpec, b: FunctionSpec, f: FunctionSpec, g: FunctionSpec) -> Self {
        let domain = [&a, &b, &f, &g].iter().fold(DEFAULT_CHECK_DOMAIN, |acc, s| {
            let d = s.domain();
            Interval::new(acc.lo.max(d.lo), acc.hi.min(d.hi))
        });
        GeneralAbel { a, b, f, g, domain }
    }

    pub fn with_domain(mut self, domain: Interval) -> Self {
        self.domain = domain;
        self
    }

    fn is_polynomial(&self) -> bool {
        [&self.a, &self.b, &self.f, &self.g].iter().all(|s| s.as_polynomial().is_some())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma2Certificate {
    pub holds: bool,
    pub k1: f64,
    pub k2: f64,
    /// Residuals of the derivative condition and of `a = k2 f^3 / g^2`.
    pub residuals: (f64, f64),
    pub tolerance: f64,
}

/// Tests `d/dx (g e^B / f) = k1 f e^B` with `B = int b`, and `a = k2 f^3 / g^2`.
pub fn check_lemma2(eq: &GeneralAbel, grid_size: usize) -> Result<Lemma2Certificate> {
    let grid = finite_grid(eq.domain, grid_size)?;
    let tolerance = if eq.is_polynomial() { EXACT_TOL } else { BLACKBOX_TOL };
    for &x in &grid {
        if eq.f.evaluate(x)? == 0.0 {
            return Err(Error::Singular { what: "f".into(), x });
        }
        if eq.g.evaluate(x)? == 0.0 {
            return Err(Error::Singular { what: "g".into(), x });
        }
    }

    let (k1, res1) = if eq.b.is_zero_polynomial() {
        // with b = 0 the first condition is the Chiellini condition itself
        let sys = LienardSystem::new(eq.f.clone(), eq.g.clone()).with_domain(eq.domain);
        let cert = check_chiellini(&sys, grid_size)?;
        (cert.k, cert.residual)
    } else {
        let big_b = eq.b.antiderivative();
        let mut lhs = Vec::with_capacity(grid.len());
        let mut rhs_unit = Vec::with_capacity(grid.len());
        for &x in &grid {
            let (f, g) = (eq.f.evaluate(x)?, eq.g.evaluate(x)?);
            let e = big_b.evaluate(x)?.exp();
            let (df, dg) = (eq.f.derivative_at(x)?, eq.g.derivative_at(x)?);
            let b = eq.b.evaluate(x)?;
            lhs.push(e * ((dg + g * b) * f - g * df) / (f * f));
            rhs_unit.push(f * e);
        }
        let mut ratios: Vec<f64> = lhs.iter().zip(&rhs_unit).map(|(l, r)| l / r).collect();
        let k1 = median(&mut ratios);
        let res = lhs
            .iter()
            .zip(&rhs_unit)
            .map(|(l, r)| (l - k1 * r).abs())
            .fold(0.0, f64::max);
        (k1, res)
    };

    let (k2, res2) = if eq.a.is_zero_polynomial() {
        (0.0, 0.0)
    } else {
        let mut cubes = Vec::with_capacity(grid.len());
        let mut avals = Vec::with_capacity(grid.len());
        for &x in &grid {
            let (f, g) = (eq.f.evaluate(x)?, eq.g.evaluate(x)?);
            cubes.push(f * f * f / (g * g));
            avals.push(eq.a.evaluate(x)?);
        }
        let mut ratios: Vec<f64> = avals.iter().zip(&cubes).map(|(a, c)| a / c).collect();
        let k2 = median(&mut ratios);
        let res = avals
            .iter()
            .zip(&cubes)
            .map(|(a, c)| (a - k2 * c).abs())
            .fold(0.0, f64::max);
        (k2, res)
    };

    Ok(Lemma2Certificate {
        holds: res1 <= tolerance && res2 <= tolerance,
        k1,
        k2,
        residuals: (res1, res2),
        tolerance,
    })
}

/// Result of rewriting `x'' + (gamma x'^2 + delta x' + f) x' + g = 0` as an
/// Abel equation in `v = 1/x'`.
#[derive(Debug, Clone)]
pub enum AbelReduction {
    /// `gamma = 0`: `dy/dx = A y^2 + B y^3` with `A = f e^{int delta}`,
    /// `B = g e^{2 int delta}`.
    Standard { a: FunctionSpec, b: FunctionSpec },
    General(GeneralAbel),
}

pub fn reduce_levinson_smith(
    gamma: &FunctionSpec,
    delta: &FunctionSpec,
    f: &FunctionSpec,
    g: &FunctionSpec,
) -> AbelReduction {
    if !gamma.is_zero_polynomial() {
        return AbelReduction::General(GeneralAbel::new(gamma.clone(), delta.clone(), f.clone(), g.clone()));
    }
    if delta.is_zero_polynomial() {
        return AbelReduction::Standard { a: f.clone(), b: g.clone() };
    }
    AbelReduction::Standard {
        a: weighted(f, delta, 1.0),
        b: weighted(g, delta, 2.0),
    }
}

/// `x -> base(x) * exp(power * int delta)`, with its exact derivative.
fn weighted(base: &FunctionSpec, delta: &FunctionSpec, power: f64) -> FunctionSpec {
    let int_delta = delta.antiderivative();
    let domain = {
        let (a, b) = (base.domain(), delta.domain());
        Interval::new(a.lo.max(b.lo), a.hi.min(b.hi))
    };
    let (b1, i1) = (base.clone(), int_delta.clone());
    let (b2, i2, d2) = (base.clone(), int_delta, delta.clone());
    BlackBox::fallible(format!("({base}) * exp({power} * int[{delta}])"), domain, move |x| {
        Ok(b1.evaluate(x)? * (power * i1.evaluate(x)?).exp())
    })
    .with_derivative(move |x| {
        let e = (power * i2.evaluate(x)?).exp();
        Ok(e * (b2.derivative_at(x)? + power * d2.evaluate(x)? * b2.evaluate(x)?))
    })
    .into()
}

/// Convenience wrapper taking floating-point constants.
pub fn construct_g_from_f_f64(f: &FunctionSpec, k: f64, c1: f64) -> Result<FunctionSpec> {
    Ok(construct_g_from_f(f, &from_f64(k)?, &from_f64(c1)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcmodel::{int, ratio};

    fn sys(f: FunctionSpec, g: FunctionSpec) -> LienardSystem {
        LienardSystem::new(f, g)
    }

    #[test]
    fn constant_damping_linear_ratio() {
        let cert = check_chiellini(&sys(FunctionSpec::poly(&[1]), FunctionSpec::poly(&[2, 3])), 16).unwrap();
        assert!(cert.holds);
        assert_eq!(cert.exact_k, Some(int(3)));
        assert_eq!(cert.residual, 0.0);
    }

    #[test]
    fn linear_damping_family_is_detected() {
        let g = Polynomial::new(vec![int(1), int(2), ratio(3, 2), ratio(1, 2)]);
        let cert = check_chiellini(&sys(FunctionSpec::poly(&[1, 1]), g.into()), 16).unwrap();
        assert!(cert.holds);
        assert_eq!(cert.k, 1.0);
        assert_eq!(cert.verdict, Verdict::Integrable);
    }

    #[test]
    fn cubic_over_linear() {
        let cert = check_chiellini(&sys(FunctionSpec::poly(&[0, 1]), FunctionSpec::poly(&[0, 0, 0, 1])), 16).unwrap();
        assert!(cert.holds);
        assert_eq!(cert.exact_k, Some(int(2)));
    }

    #[test]
    fn quadratic_restoring_force_fails() {
        let cert = check_chiellini(&sys(FunctionSpec::poly(&[1]), FunctionSpec::poly(&[0, 0, 1])), 16).unwrap();
        assert!(!cert.holds);
        assert_eq!(cert.verdict, Verdict::NotIntegrable);
    }

    #[test]
    fn proportional_pair_is_degenerate() {
        let cert = check_chiellini(&sys(FunctionSpec::poly(&[1, 2]), FunctionSpec::poly(&[3, 6])), 16).unwrap();
        assert!(cert.holds);
        assert_eq!(cert.verdict, Verdict::DegenerateKZero);
    }

    #[test]
    fn vanishing_damping_is_singular() {
        let s = sys(FunctionSpec::poly(&[0, 1]), FunctionSpec::poly(&[0, 0, 1])).with_domain(Interval::new(-1.0, 1.0));
        // midpoint grid of 9 cells hits x = 0
        assert!(matches!(check_chiellini(&s, 9), Err(Error::Singular { .. })));
        assert!(check_chiellini(&s, 4).is_err());
    }

    #[test]
    fn constructs_restoring_force() {
        let g = construct_g_from_f(&FunctionSpec::poly(&[1, 1]), &int(1), &int(1));
        let want = Polynomial::new(vec![int(1), int(2), ratio(3, 2), ratio(1, 2)]);
        assert_eq!(g.as_polynomial(), Some(&want));

        let vdp = construct_g_from_f(&FunctionSpec::poly(&[-1, 0, 1]), &int(1), &int(1));
        let want = Polynomial::new(vec![int(-1), int(1), int(1), ratio(-4, 3), int(0), ratio(1, 3)]);
        assert_eq!(vdp.as_polynomial(), Some(&want));

        let k0 = construct_g_from_f(&FunctionSpec::poly(&[1]), &int(0), &int(7));
        assert_eq!(k0.as_polynomial(), Some(&Polynomial::from_ints(&[7])));
    }

    #[test]
    fn constructs_damping_from_linear_force() {
        let g = FunctionSpec::poly(&[0, 1]);
        let f = construct_f_from_g(&g, 1.0, 1.0, 1.0, Some(Interval::new(-3.0, 3.0))).unwrap();
        for x in [-2.0, -0.5, 0.0, 1.0, 2.5] {
            let want = x / (x * x + 1.0f64).sqrt();
            assert!((f.evaluate(x).unwrap() - want).abs() < 1e-15);
        }
        let flat = construct_f_from_g(&FunctionSpec::poly(&[3]), 0.0, 1.0, 1.0, None).unwrap();
        assert_eq!(flat.evaluate(0.7).unwrap(), 3.0);
    }

    #[test]
    fn construction_round_trip() {
        let g = FunctionSpec::poly(&[1, 2, 1]);
        let (k, c2) = (0.5, 4.0);
        let f = construct_f_from_g(&g, k, c2, 1.0, Some(Interval::new(-1.0, 1.0))).unwrap();
        let back = construct_g_from_f_f64(&f, k, c2.sqrt()).unwrap();
        for x in Interval::new(-1.0, 1.0).linspace(21) {
            assert!((back.evaluate(x).unwrap() - g.evaluate(x).unwrap()).abs() < 1e-9);
        }
        // f^2 (C2 + 2k int g) = g^2
        let int_g = g.antiderivative();
        for x in [-0.9, 0.1, 0.8] {
            let lhs = f.evaluate(x).unwrap().powi(2) * (c2 + 2.0 * k * int_g.evaluate(x).unwrap());
            let rhs = g.evaluate(x).unwrap().powi(2);
            assert!((lhs - rhs).abs() <= 1e-9 * rhs);
        }
    }

    #[test]
    fn negative_radicand_is_reported() {
        let g = FunctionSpec::poly(&[0, 1]);
        match construct_f_from_g(&g, -1.0, 1.0, 1.0, Some(Interval::new(0.0, 3.0))) {
            Err(Error::Radicand { x, value }) => {
                assert!(x >= 1.0 && value <= 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lemma2_with_zero_extra_terms_is_chiellini() {
        let f = FunctionSpec::poly(&[1, 1]);
        let g = construct_g_from_f(&f, &int(2), &int(3));
        let zero = FunctionSpec::poly(&[0]);
        let cert = check_lemma2(&GeneralAbel::new(zero.clone(), zero, f, g), 16).unwrap();
        assert!(cert.holds);
        assert_eq!((cert.k1, cert.k2), (2.0, 0.0));
    }

    #[test]
    fn lemma2_with_cubic_term() {
        let f = FunctionSpec::poly(&[0, 1]);
        let g = FunctionSpec::poly(&[0, 0, 0, 1]);
        let a = FunctionSpec::from(BlackBox::new("5/x^3", Interval::whole(), |x| 5.0 / (x * x * x)));
        let eq = GeneralAbel::new(a, FunctionSpec::poly(&[0]), f, g).with_domain(Interval::new(0.5, 2.0));
        let cert = check_lemma2(&eq, 16).unwrap();
        assert!(cert.holds);
        assert!((cert.k1 - 2.0).abs() < 1e-12);
        assert!((cert.k2 - 5.0).abs() < 1e-12);
    }

    #[test]
    fn lemma2_with_constant_linear_term() {
        let (beta, k1, c) = (0.7, 1.5, 2.0);
        let f = FunctionSpec::from(BlackBox::new("exp(-bx)", Interval::whole(), move |x| (-beta * x).exp()));
        let g = FunctionSpec::from(BlackBox::new("g", Interval::whole(), move |x| (k1 * x + c) * (-2.0 * beta * x).exp()));
        let b = FunctionSpec::from(Polynomial::constant(from_f64(beta).unwrap()));
        let eq = GeneralAbel::new(FunctionSpec::poly(&[0]), b, f, g).with_domain(Interval::new(0.0, 1.0));
        let cert = check_lemma2(&eq, 32).unwrap();
        assert!(cert.holds, "{cert:?}");
        assert!((cert.k1 - k1).abs() < 1e-6);
    }

    #[test]
    fn levinson_smith_reductions() {
        let (f, g) = (FunctionSpec::poly(&[1, 1]), FunctionSpec::poly(&[0, 2]));
        let zero = FunctionSpec::poly(&[0]);
        match reduce_levinson_smith(&zero, &zero, &f, &g) {
            AbelReduction::Standard { a, b } => {
                assert_eq!(a.as_polynomial(), f.as_polynomial());
                assert_eq!(b.as_polynomial(), g.as_polynomial());
            }
            other => panic!("unexpected {other:?}"),
        }

        let one = FunctionSpec::poly(&[1]);
        match reduce_levinson_smith(&zero, &one, &one, &one) {
            AbelReduction::Standard { a, b } => {
                assert!((a.evaluate(1.0).unwrap() - 1f64.exp()).abs() < 1e-14);
                assert!((b.evaluate(1.0).unwrap() - 2f64.exp()).abs() < 1e-13);
                let cert = check_chiellini(&LienardSystem::new(a, b).with_domain(Interval::new(-1.0, 1.0)), 16).unwrap();
                assert!(cert.holds);
                assert!((cert.k - 1.0).abs() < 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }

        let gamma = FunctionSpec::poly(&[0, 3]);
        match reduce_levinson_smith(&gamma, &zero, &f, &g) {
            AbelReduction::General(eq) => {
                assert_eq!(eq.a.as_polynomial(), gamma.as_polynomial());
                assert!(eq.b.is_zero_polynomial());
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
