//! Independent checks of exact solutions.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::integrability::LienardSystem;
use crate::kernel::{bracketed_root_fallible, signed_kernel};
use crate::solver::{
    emit_time_series, hermite, invert_k_zero_velocity, ChielliniParams, InitialConditions, KZeroParams,
    ParametricSolution, INVERSION_TOL,
};
use crate::funcmodel::FunctionSpec;

// Dormand-Prince 5(4) tableau; the nodes are implicit since the system is autonomous.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefSample {
    pub t: f64,
    pub x: f64,
    pub xdot: f64,
    pub xddot: f64,
}

#[derive(Debug, Clone)]
pub struct ReferenceTrajectory {
    pub samples: Vec<RefSample>,
    pub order: u32,
    pub tol: f64,
    pub accepted: usize,
    pub rejected: usize,
}

impl ReferenceTrajectory {
    /// State at time `t` by cubic Hermite interpolation between accepted steps.
    pub fn state_at(&self, t: f64) -> Result<(f64, f64)> {
        let s = &self.samples;
        let (lo, hi) = (s[0].t, s[s.len() - 1].t);
        if !(lo <= t && t <= hi) {
            return Err(Error::Range { t, lo, hi });
        }
        let i = s.partition_point(|p| p.t < t);
        if i < s.len() && s[i].t == t {
            return Ok((s[i].x, s[i].xdot));
        }
        let (a, b) = (s[i - 1], s[i]);
        let h = b.t - a.t;
        let u = (t - a.t) / h;
        Ok((hermite(u, h, a.x, a.xdot, b.x, b.xdot), hermite(u, h, a.xdot, a.xddot, b.xdot, b.xddot)))
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }
}

/// Integrates `x' = u, u' = -f(x) u - g(x)` with the embedded Dormand-Prince
/// 5(4) pair, accepting a step when the scaled local error is at most one.
pub fn integrate_reference(
    sys: &LienardSystem,
    ic: &InitialConditions,
    t_span: (f64, f64),
    tol: f64,
) -> Result<ReferenceTrajectory> {
    if !(1e-13..=1e-3).contains(&tol) {
        return Err(Error::Invalid(format!("tolerance {tol:e} outside [1e-13, 1e-3]")));
    }
    let (t0, t1) = t_span;
    if !(t1 > t0) {
        return Err(Error::Invalid(format!("empty time span [{t0}, {t1}]")));
    }
    let rhs = |y: [f64; 2]| -> Result<[f64; 2]> { Ok([y[1], sys.acceleration(y[0], y[1])?]) };
    let mut t = t0;
    let mut y = [ic.x0, ic.xdot0];
    let mut k0 = rhs(y)?;
    let mut samples = vec![RefSample { t, x: y[0], xdot: y[1], xddot: k0[1] }];
    let mut h = tol.powf(0.2).min(t1 - t0) * 0.1;
    let (mut accepted, mut rejected) = (0, 0);
    while t < t1 {
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::Integration { t, x: y[0], xdot: y[1], reason: "step size underflow".into() });
        }
        let mut k = [[0.0; 2]; 7];
        k[0] = k0;
        let mut stage_failed = None;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                ys[0] += h * A[s][j] * kj[0];
                ys[1] += h * A[s][j] * kj[1];
            }
            match rhs(ys) {
                Ok(v) if v[0].is_finite() && v[1].is_finite() => k[s] = v,
                Ok(_) => {
                    stage_failed = Some(Error::NonFinite { x: ys[0], context: "reference stage".into() });
                    break;
                }
                Err(e) => {
                    stage_failed = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = stage_failed {
            if h < 1e-10 {
                return Err(Error::Integration { t, x: y[0], xdot: y[1], reason: e.to_string() });
            }
            h *= 0.25;
            rejected += 1;
            continue;
        }
        let mut y_new = y;
        let mut err = [0.0; 2];
        for s in 0..7 {
            if s < 6 {
                y_new[0] += h * A[6][s] * k[s][0];
                y_new[1] += h * A[6][s] * k[s][1];
            }
            err[0] += h * E[s] * k[s][0];
            err[1] += h * E[s] * k[s][1];
        }
        let norm = (0..2)
            .map(|i| err[i].abs() / (tol + tol * y[i].abs().max(y_new[i].abs())))
            .fold(0.0, f64::max);
        if !norm.is_finite() {
            h *= 0.25;
            rejected += 1;
            continue;
        }
        let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
        if norm <= 1.0 {
            t = if last { t1 } else { t + h };
            y = y_new;
            k0 = k[6];
            samples.push(RefSample { t, x: y[0], xdot: y[1], xddot: k0[1] });
            accepted += 1;
            h *= factor;
        } else {
            rejected += 1;
            h *= factor.min(1.0);
        }
    }
    Ok(ReferenceTrajectory { samples, order: 5, tol, accepted, rejected })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub t: f64,
    pub x_exact: f64,
    pub x_ref: f64,
    pub xdot_exact: f64,
    pub xdot_ref: f64,
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub max_abs_x_error: f64,
    pub max_abs_xdot_error: f64,
    pub t_window: (f64, f64),
    pub rows: Vec<ComparisonRow>,
    pub tolerance: f64,
    pub pass: bool,
}

impl ComparisonReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x_exact,x_ref,dx,xdot_exact,xdot_ref,dxdot\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.t,
                r.x_exact,
                r.x_ref,
                r.x_exact - r.x_ref,
                r.xdot_exact,
                r.xdot_ref,
                r.xdot_exact - r.xdot_ref
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "{} max|dx|={:.3e} max|dxdot|={:.3e} window=[{}, {}] tol={:e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.max_abs_x_error,
            self.max_abs_xdot_error,
            self.t_window.0,
            self.t_window.1,
            self.tolerance
        )
    }
}

/// Number of comparison points across the common window.
pub const COMPARE_POINTS: usize = 2001;

/// Evaluates both trajectories on a common grid over their overlap.
pub fn compare(sol: &ParametricSolution, reference: &ReferenceTrajectory, tol: f64) -> Result<ComparisonReport> {
    let (a_lo, a_hi) = sol.t_range();
    let (b_lo, b_hi) = reference.t_range();
    let (lo, hi) = (a_lo.max(b_lo), a_hi.min(b_hi));
    if !(hi > lo) {
        return Err(Error::Window { a_lo, a_hi, b_lo, b_hi });
    }
    let n = COMPARE_POINTS;
    let grid: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect();
    let exact = emit_time_series(sol, &grid)?;
    let mut rows = Vec::with_capacity(n);
    let (mut ex, mut ev) = (0.0f64, 0.0f64);
    for (t, x, xdot) in exact {
        let (xr, vr) = reference.state_at(t)?;
        ex = ex.max((x - xr).abs());
        ev = ev.max((xdot - vr).abs());
        rows.push(ComparisonRow { t, x_exact: x, x_ref: xr, xdot_exact: xdot, xdot_ref: vr });
    }
    Ok(ComparisonReport {
        max_abs_x_error: ex,
        max_abs_xdot_error: ev,
        t_window: (lo, hi),
        rows,
        tolerance: tol,
        pass: ex <= tol,
    })
}

/// Central-difference residual of `dv/dx = p(x) v^2 + q(x) v^3` over interior
/// grid points; `v` is sampled at every grid point.
fn abel_fd_residual(x_grid: &[f64], v: &[f64], rhs: impl Fn(f64, f64) -> Result<f64>) -> Result<f64> {
    if x_grid.len() < 3 {
        return Err(Error::Invalid("need at least three grid points".into()));
    }
    let mut worst = 0.0f64;
    for i in 1..x_grid.len() - 1 {
        let (h0, h1) = (x_grid[i] - x_grid[i - 1], x_grid[i + 1] - x_grid[i]);
        // three-point derivative on a possibly uneven grid
        let d = -h1 / (h0 * (h0 + h1)) * v[i - 1] + (h1 - h0) / (h0 * h1) * v[i] + h0 / (h1 * (h0 + h1)) * v[i + 1];
        worst = worst.max((d - rhs(x_grid[i], v[i])?).abs());
    }
    Ok(worst)
}

/// Max over interior grid points of `|dv/dx - f v^2 - g v^3|`, where
/// `v(x) = 1/x'` is rebuilt from the solution relation on the initial sheet.
pub fn abel_residual(sys: &LienardSystem, params: &ChielliniParams, x_grid: &[f64]) -> Result<f64> {
    let regime = params.regime;
    // the parameter interval around w0 free of kernel fixed points
    let roots = regime.quadratic_roots();
    let lo = roots.iter().copied().filter(|&r| r < params.w0).fold(f64::NEG_INFINITY, f64::max);
    let hi = roots.iter().copied().filter(|&r| r > params.w0).fold(f64::INFINITY, f64::min);
    let (lo_a, hi_a) = (
        if lo.is_finite() { lo.atan() + 1e-13 } else { -std::f64::consts::FRAC_PI_2 },
        if hi.is_finite() { hi.atan() - 1e-13 } else { std::f64::consts::FRAC_PI_2 },
    );
    let mut v = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let target = sys.ratio_at(x)? / params.c_inv;
        let phi = bracketed_root_fallible(
            |phi: f64| {
                let w = phi.tan();
                if w.is_finite() && w.abs() < 1e300 {
                    Ok(signed_kernel(w, &regime)? - target)
                } else {
                    Ok(phi.signum() * regime.f_at_infinity(phi > 0.0).exp() - target)
                }
            },
            lo_a,
            hi_a,
            INVERSION_TOL,
        )
        .map_err(|e| Error::Inversion(format!("no parameter for x = {x}: {e}")))?;
        v.push(1.0 / params.velocity(phi.tan())?);
    }
    abel_fd_residual(x_grid, &v, |x, v| {
        Ok(sys.f.evaluate(x)? * v * v + sys.g.evaluate(x)? * v * v * v)
    })
}

/// As [`abel_residual`] for `g = A f`, with `v` from the implicit relation
/// `int f = A ln|1/v + A| - 1/v + K1`.
pub fn abel_residual_k_zero(f: &FunctionSpec, params: &KZeroParams, x_grid: &[f64]) -> Result<f64> {
    let phi = f.antiderivative();
    let mut v = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let u = invert_k_zero_velocity(phi.evaluate(x)?, params, 1.0 / params.v0)?;
        v.push(1.0 / u);
    }
    let a = params.a;
    abel_fd_residual(x_grid, &v, |x, v| Ok(f.evaluate(x)? * v * v * (1.0 + a * v)))
}
