//! Continuation of an exact solution through `x' = 0` and through folds of `R`.
//!
//! A single parameter branch ends where `w` runs off to infinity (`x' = 0`)
//! or where `f(x) = 0` makes `R(x) = C_inv E(w)` fold. The tracer follows the
//! same level set on the angle `theta = atan(w)`, continued across sheets,
//! using two charts:
//!
//! * angle chart: `theta` is the independent variable, `x` comes from
//!   inverting `R(x) = C_inv E(theta)`, and `dt/dtheta = 1 / (f(x) D(theta))`;
//! * position chart: `x` is the independent variable, `theta` comes from
//!   inverting `E(theta) = R(x) / C_inv`, and `dt/dx = 1 / x'`.
//!
//! The chart switches when `|dx/dtheta|` leaves `[1/s, s]` for the switch
//! slope `s`, so each chart is used away from its singular points.
//!
//! Crossing `w = +-inf` multiplies the continued kernel by
//! `-exp(F(+inf) - F(-inf))`, which keeps it continuous in `theta`.

use std::f64::consts::{FRAC_PI_2, PI};

use super::{invert_ratio, ChielliniParams, InitialFit, ParametricSolution, Sample, INVERSION_TOL, TIME_TOL};
use crate::error::{Error, Result};
use crate::integrability::LienardSystem;
use crate::kernel::quadrature::{integrate_fallible, QuadratureOptions};
use crate::kernel::{angular_kernel, bracketed_root_fallible, RegimeTag};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    /// Largest time step between samples.
    pub max_dt: f64,
    /// Largest step in `theta`.
    pub max_angle_step: f64,
    /// Largest step in `x`.
    pub max_x_step: f64,
    /// Chart switch threshold on `|dx/dtheta|`.
    pub switch_slope: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { max_dt: 0.02, max_angle_step: 0.02, max_x_step: 0.02, switch_slope: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Chart {
    Angle,
    Position,
}

#[derive(Debug, Clone, Copy)]
struct State {
    theta: f64,
    x: f64,
    t: f64,
}

/// Kernel values on the continued angle.
#[derive(Debug, Clone, Copy)]
struct Continued {
    sheet: i64,
    phi: f64,
    /// `M_n E(tan phi)`.
    kernel: f64,
    /// `x' = C_inv M_n h(tan phi)`.
    xdot: f64,
    /// `D(phi)`.
    quad: f64,
}

struct Tracer<'a> {
    sys: &'a LienardSystem,
    params: &'a ChielliniParams,
    factor: f64,
    quad_opts: QuadratureOptions,
}

fn split_angle(theta: f64) -> (i64, f64) {
    let n = ((theta + FRAC_PI_2) / PI).floor();
    (n as i64, theta - n * PI)
}

impl<'a> Tracer<'a> {
    fn at(&self, theta: f64) -> Result<Continued> {
        let (sheet, phi) = split_angle(theta);
        let m = self.factor.powi(sheet as i32);
        let ak = angular_kernel(phi, &self.params.regime)?;
        Ok(Continued {
            sheet,
            phi,
            kernel: m * ak.signed,
            xdot: self.params.c_inv * m * ak.h,
            quad: ak.quad,
        })
    }

    fn x_at(&self, theta: f64, x_ref: f64) -> Result<f64> {
        let target = self.params.c_inv * self.at(theta)?.kernel;
        invert_ratio(self.sys, self.params.k, target, x_ref, 1e-2)
    }

    /// Monotone piece of the continued kernel containing `theta`.
    fn piece(&self, theta: f64) -> (f64, f64) {
        let (sheet, phi) = split_angle(theta);
        let base = sheet as f64 * PI;
        let mut cuts = vec![-FRAC_PI_2, FRAC_PI_2];
        cuts.extend(self.params.regime.quadratic_roots().iter().map(|r| r.atan()));
        cuts.sort_by(f64::total_cmp);
        let hi = cuts.iter().copied().find(|&c| c > phi).unwrap_or(FRAC_PI_2);
        let lo = cuts.iter().copied().rev().find(|&c| c <= phi).unwrap_or(-FRAC_PI_2);
        // stay off the fixed points where D vanishes
        let nudge = |c: f64, inward: f64| if c.abs() == FRAC_PI_2 { c } else { c + inward * 1e-13 };
        (base + nudge(lo, 1.0), base + nudge(hi, -1.0))
    }

    fn theta_at(&self, x: f64, theta_ref: f64) -> Result<f64> {
        let target = self.sys.ratio_at(x)? / self.params.c_inv;
        let (lo, hi) = self.piece(theta_ref);
        bracketed_root_fallible(|th| Ok(self.at(th)?.kernel - target), lo, hi, INVERSION_TOL)
    }

    fn angle_step(&self, s: &State, dtheta: f64) -> Result<State> {
        let theta = s.theta + dtheta;
        let x = self.x_at(theta, s.x)?;
        if self.sys.f.evaluate(x)?.signum() != self.sys.f.evaluate(s.x)?.signum() {
            return Err(Error::Inversion("angle step crossed a fold".into()));
        }
        let dt = integrate_fallible(
            |th| {
                let c = self.at(th)?;
                let xv = self.x_at(th, s.x)?;
                Ok(1.0 / (self.sys.f.evaluate(xv)? * c.quad))
            },
            s.theta,
            theta,
            &self.quad_opts,
        )?
        .value;
        Ok(State { theta, x, t: s.t + dt })
    }

    fn position_step(&self, s: &State, dx: f64) -> Result<State> {
        let x = s.x + dx;
        let theta = self.theta_at(x, s.theta)?;
        let dt = integrate_fallible(
            |xv| Ok(1.0 / self.at(self.theta_at(xv, s.theta)?)?.xdot),
            s.x,
            x,
            &self.quad_opts,
        )?
        .value;
        Ok(State { theta, x, t: s.t + dt })
    }

    fn sample(&self, s: &State) -> Result<Sample> {
        let c = self.at(s.theta)?;
        Ok(Sample { w: c.phi.tan(), x: s.x, t: s.t, xdot: c.xdot, sheet: c.sheet })
    }
}

/// Follows the exact solution from its initial point until `t >= t_end`.
///
/// Each step moves one chart variable, inverts the defining relation for the
/// other, and integrates the time increment by adaptive quadrature with an
/// inversion at every node. Samples record the parameter `w`, its sheet, and
/// `x' = C_inv M_n h(w)`.
pub fn trace_trajectory(
    sys: &LienardSystem,
    params: &ChielliniParams,
    t_end: f64,
    opts: &TraceOptions,
) -> Result<ParametricSolution> {
    if params.regime.tag == RegimeTag::Zero {
        return Err(Error::Invalid("k = 0 solutions come from solve_k_zero".into()));
    }
    if !(t_end > params.t0) {
        return Err(Error::Invalid(format!("end time {t_end} must exceed t0 = {}", params.t0)));
    }
    let tracer = Tracer {
        sys,
        params,
        factor: params.regime.sheet_factor(),
        quad_opts: QuadratureOptions::with_tol(TIME_TOL),
    };
    let mut state = State { theta: params.w0.atan(), x: params.x0, t: params.t0 };
    let mut samples = vec![tracer.sample(&state)?];
    let mut chart = Chart::Angle;
    let mut truncated = None;

    while state.t < t_end {
        let c = tracer.at(state.theta)?;
        let f = sys.f.evaluate(state.x)?;
        let rate = f * c.quad; // dtheta/dt
        let slope = (c.xdot / rate).abs(); // |dx/dtheta|
        chart = match chart {
            Chart::Angle if !(slope <= opts.switch_slope) => Chart::Position,
            Chart::Position if slope < 1.0 / opts.switch_slope => Chart::Angle,
            other => other,
        };
        let (mut step, dir) = match chart {
            Chart::Angle => (
                opts.max_angle_step.min(opts.max_dt * rate.abs()).min(opts.max_x_step / slope),
                rate.signum(),
            ),
            Chart::Position => (
                opts.max_x_step.min(opts.max_dt * c.xdot.abs()).min(opts.max_angle_step * slope),
                c.xdot.signum(),
            ),
        };
        let mut outcome = Err(Error::Invalid("no step attempted".into()));
        for _ in 0..40 {
            outcome = match chart {
                Chart::Angle => tracer.angle_step(&state, dir * step),
                Chart::Position => tracer.position_step(&state, dir * step),
            }
            .and_then(|next| {
                if next.t > state.t {
                    Ok(next)
                } else {
                    Err(Error::Inversion("time did not advance".into()))
                }
            });
            if outcome.is_ok() {
                break;
            }
            step *= 0.5;
        }
        match outcome {
            Ok(next) => {
                state = next;
                samples.push(tracer.sample(&state)?);
            }
            Err(e) => {
                truncated = Some(format!("stopped at t = {}: {e}", state.t));
                break;
            }
        }
    }

    let w_last = samples.last().map_or(params.w0, |s| s.w);
    Ok(ParametricSolution {
        samples,
        branch_id: 0,
        w_range: (params.w0, w_last),
        system: sys.clone(),
        fit: InitialFit::Chiellini(*params),
        forward: true,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::linear_damping;
    use crate::funcmodel::int;
    use crate::solver::{fit_chiellini, InitialConditions};

    #[test]
    fn angle_split_is_centred() {
        assert_eq!(split_angle(0.3), (0, 0.3));
        let (n, phi) = split_angle(PI + 0.2);
        assert_eq!(n, 1);
        assert!((phi - 0.2).abs() < 1e-15);
        assert_eq!(split_angle(-FRAC_PI_2).0, 0);
    }

    #[test]
    fn traced_samples_keep_the_invariant() {
        let one = int(1);
        let sys = linear_damping(&one, &one, &one, &one);
        let p = fit_chiellini(&sys, 1.0, &InitialConditions::new(0.0, 1.0)).unwrap();
        let sol = trace_trajectory(&sys, &p, 3.0, &TraceOptions::default()).unwrap();
        assert!(sol.truncated.is_none(), "{:?}", sol.truncated);
        assert!(sol.samples.iter().any(|s| s.sheet != 0), "expected a passage through x' = 0");
        let factor = p.regime.sheet_factor();
        for s in &sol.samples {
            let r = sys.ratio_at(s.x).unwrap();
            let want = p.c_inv * factor.powi(s.sheet as i32) * crate::kernel::signed_kernel(s.w, &p.regime).unwrap();
            assert!((r - want).abs() <= 1e-8 * r.abs().max(1e-3), "t = {}", s.t);
            // x' = R / w away from w = 0
            if s.w.abs() > 1e-6 && s.w.is_finite() {
                assert!((s.xdot * s.w - r).abs() <= 1e-8 * r.abs().max(1e-3));
            }
        }
        assert!(sol.samples.windows(2).all(|p| p[1].t > p[0].t));
    }
}
