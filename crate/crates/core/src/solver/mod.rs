//! Exact parametric solutions of integrable Lienard systems.
//!
//! On a solution the ratio `R = g/f` and the parameter `w = R / x'` are tied
//! by `R(x) = C_inv * E(w)`, where `E` is the signed kernel. Time follows
//! from `dt = dw / (f(x) (w^2 + w + k))`.

pub mod families;
mod kzero;
mod tracer;

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::integrability::LienardSystem;
use crate::kernel::quadrature::{integrate_fallible, QuadratureOptions};
use crate::kernel::{bracketed_root_fallible, log_h, signed_kernel, KernelRegime, RegimeTag};

pub use families::{cubic_in_region, invert_cubic_vdp, ClosedFamily};
pub use kzero::{fit_k_zero, invert_k_zero_velocity, solve_k_zero, KZeroParams};
pub use tracer::{trace_trajectory, TraceOptions};

/// Default number of samples along a parameter range.
pub const DEFAULT_SAMPLES: usize = 512;
/// Tolerance of the sample-to-sample time quadrature.
pub const TIME_TOL: f64 = 1e-13;
/// Tolerance used when inverting the defining relation.
pub const INVERSION_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialConditions {
    pub x0: f64,
    pub xdot0: f64,
}

impl InitialConditions {
    pub fn new(x0: f64, xdot0: f64) -> Self {
        InitialConditions { x0, xdot0 }
    }
}

/// Constants of a solution with `k != 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChielliniParams {
    pub k: f64,
    pub c_inv: f64,
    pub t0: f64,
    pub regime: KernelRegime,
    /// Parameter value at the initial point.
    pub w0: f64,
    /// Position at the initial point; fixes the inversion branch.
    pub x0: f64,
}

impl ChielliniParams {
    /// `R` on the solution through this fit at parameter `w` (single sheet).
    pub fn ratio_target(&self, w: f64) -> Result<f64> {
        Ok(self.c_inv * signed_kernel(w, &self.regime)?)
    }

    /// `x' = C_inv h(w)`, equal to `R / w` and regular at `w = 0`.
    pub fn velocity(&self, w: f64) -> Result<f64> {
        Ok(self.c_inv * log_h(w, &self.regime)?.exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialFit {
    Chiellini(ChielliniParams),
    KZero(KZeroParams),
}

fn check_ic(sys: &LienardSystem, ic: &InitialConditions) -> Result<f64> {
    if !ic.x0.is_finite() || !ic.xdot0.is_finite() {
        return Err(Error::NonFinite { x: ic.x0, context: "initial conditions".into() });
    }
    if ic.xdot0 == 0.0 {
        return Err(Error::Singular { what: "initial velocity".into(), x: ic.x0 });
    }
    let f0 = sys.f.evaluate(ic.x0)?;
    if f0 == 0.0 {
        return Err(Error::Singular { what: "f".into(), x: ic.x0 });
    }
    Ok(f0)
}

/// Maps `(x0, x'0)` to `w0 = R(x0)/x'0` and `C_inv = R(x0) / E(w0)`, with `t0 = 0`.
///
/// `k = 0` is routed to the `g = A f` branch.
pub fn fit_initial_conditions(sys: &LienardSystem, k: f64, ic: &InitialConditions) -> Result<InitialFit> {
    check_ic(sys, ic)?;
    if k == 0.0 {
        let a = sys.ratio_at(ic.x0)?;
        return fit_k_zero(&sys.f, a, ic).map(InitialFit::KZero);
    }
    fit_chiellini(sys, k, ic).map(InitialFit::Chiellini)
}

/// The `k != 0` part of [`fit_initial_conditions`].
pub fn fit_chiellini(sys: &LienardSystem, k: f64, ic: &InitialConditions) -> Result<ChielliniParams> {
    if k == 0.0 {
        return Err(Error::Invalid("k = 0 has no kernel; use the k = 0 branch".into()));
    }
    check_ic(sys, ic)?;
    let ratio = sys.ratio_at(ic.x0)?;
    if ratio == 0.0 || !ratio.is_finite() {
        return Err(Error::Singular { what: "g/f".into(), x: ic.x0 });
    }
    let regime = KernelRegime::new(k);
    let w0 = ratio / ic.xdot0;
    let e0 = signed_kernel(w0, &regime)?;
    Ok(ChielliniParams {
        k,
        c_inv: ratio / e0,
        t0: 0.0,
        regime,
        w0,
        x0: ic.x0,
    })
}

/// Solves `value(x) = target` on the interval around `x_ref` where `slope`
/// (the derivative of `value`) keeps its sign.
///
/// The bracket grows geometrically from `x_ref` in the direction that moves
/// `value` toward `target`; reaching a zero of `slope` first means the target
/// lies beyond a fold and is reported as an inversion failure.
pub fn invert_on_branch(
    value: impl Fn(f64) -> Result<f64>,
    slope: impl Fn(f64) -> Result<f64>,
    target: f64,
    x_ref: f64,
    step_hint: f64,
) -> Result<f64> {
    let v_ref = value(x_ref)? - target;
    if v_ref == 0.0 {
        return Ok(x_ref);
    }
    let s_ref = slope(x_ref)?;
    if s_ref == 0.0 {
        return Err(Error::Inversion(format!("reference point {x_ref} sits on a fold")));
    }
    let sigma = s_ref.signum();
    let dir = -(v_ref.signum()) * sigma;
    let mut h = step_hint.abs().max(1e-9 * x_ref.abs().max(1.0));
    let mut a = x_ref;
    let mut va = v_ref;
    for _ in 0..200 {
        let b = a + dir * h;
        if !b.is_finite() {
            break;
        }
        let sb = slope(b)?;
        if sb.signum() != sigma || sb == 0.0 {
            let fold = bracketed_root_fallible(&slope, a, b, 0.0)
                .or_else(|_| Ok::<f64, Error>(b))?;
            let inner = if (fold - a).abs() > 0.0 { fold - dir * f64::EPSILON * fold.abs().max(1.0) } else { fold };
            let vf = value(inner)? - target;
            if vf.signum() == va.signum() && vf != 0.0 {
                return Err(Error::Inversion(format!(
                    "target {target} lies beyond the fold near x = {fold}"
                )));
            }
            return bracketed_root_fallible(|x| Ok(value(x)? - target), a, inner, INVERSION_TOL);
        }
        let vb = value(b)? - target;
        if vb == 0.0 {
            return Ok(b);
        }
        if vb.signum() != va.signum() {
            return bracketed_root_fallible(|x| Ok(value(x)? - target), a, b, INVERSION_TOL);
        }
        a = b;
        va = vb;
        h *= 2.0;
    }
    Err(Error::Inversion(format!("no root of the ratio equation found from x = {x_ref}")))
}

/// Solves `R(x) = target` on the monotone branch of `R` through `x_ref`.
pub fn invert_ratio(sys: &LienardSystem, k: f64, target: f64, x_ref: f64, step_hint: f64) -> Result<f64> {
    if let Some(fam) = &sys.family {
        return fam.invert(target, x_ref);
    }
    invert_on_branch(|x| sys.ratio_at(x), |x| Ok(k * sys.f.evaluate(x)?), target, x_ref, step_hint)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    /// Kernel parameter (`v = 1/x'` on the `k = 0` branch).
    pub w: f64,
    pub x: f64,
    pub t: f64,
    pub xdot: f64,
    /// Number of passages of `w` through infinity since the initial point.
    pub sheet: i64,
}

#[derive(Debug, Clone)]
pub struct ParametricSolution {
    pub samples: Vec<Sample>,
    /// `sign(k f(x0))` for single-branch solves; 0 for traced trajectories.
    pub branch_id: i32,
    pub w_range: (f64, f64),
    pub system: LienardSystem,
    pub fit: InitialFit,
    /// True when `t` increases along `samples`.
    pub forward: bool,
    /// Why sampling stopped before the requested end, if it did.
    pub truncated: Option<String>,
}

impl ParametricSolution {
    pub fn t_range(&self) -> (f64, f64) {
        let first = self.samples.first().map_or(0.0, |s| s.t);
        let last = self.samples.last().map_or(0.0, |s| s.t);
        (first.min(last), first.max(last))
    }
}

/// Sample grid from `start` to `end`, clustered geometrically toward `pole`
/// when `end` approaches it.
pub(crate) fn parameter_grid(start: f64, end: f64, n: usize, poles: &[f64]) -> Vec<f64> {
    let n = n.max(2);
    let span = (end - start).abs();
    let near = poles
        .iter()
        .copied()
        .filter(|p| (p - start).signum() == (end - start).signum() && (end - p).abs() < 0.05 * span)
        .min_by(|a, b| (a - end).abs().total_cmp(&(b - end).abs()));
    match near {
        Some(p) if (p - end).abs() > 0.0 => {
            let (d0, d1) = ((start - p).abs(), (end - p).abs());
            let side = (start - p).signum();
            (0..n)
                .map(|i| {
                    let s = i as f64 / (n - 1) as f64;
                    if i == n - 1 {
                        end
                    } else {
                        p + side * d0 * (d1 / d0).powf(s)
                    }
                })
                .collect()
        }
        _ => (0..n)
            .map(|i| if i == n - 1 { end } else { start + (end - start) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

/// Samples the solution on one branch over the parameter range `w_range`.
///
/// Time is zero at `w0`. Sampling stops early, with the reason recorded,
/// when the inversion runs past a fold of `R`.
pub fn solve_parametric(
    sys: &LienardSystem,
    params: &ChielliniParams,
    w_range: (f64, f64),
    n_samples: usize,
) -> Result<ParametricSolution> {
    if params.regime.tag == RegimeTag::Zero {
        return Err(Error::Invalid("k = 0 solutions come from solve_k_zero".into()));
    }
    let (ws, we) = w_range;
    let lo = ws.min(we).min(params.w0);
    let hi = ws.max(we).max(params.w0);
    let roots = params.regime.quadratic_roots();
    if let Some(&p) = roots.iter().find(|&&p| lo <= p && p <= hi) {
        return Err(Error::Pole { at: p, excluded: params.regime.excluded_points() });
    }
    let k = params.k;
    let x_of = |w: f64, x_ref: f64| -> Result<f64> {
        let target = params.ratio_target(w)?;
        invert_ratio(sys, k, target, x_ref, 1e-2)
    };
    let dt_dw = |w: f64, x_ref: f64| -> Result<f64> {
        let x = x_of(w, x_ref)?;
        let f = sys.f.evaluate(x)?;
        if f == 0.0 {
            return Err(Error::Singular { what: "f".into(), x });
        }
        Ok(1.0 / (f * (w * w + w + k)))
    };
    let opts = QuadratureOptions::with_tol(TIME_TOL);
    let branch_ref = if sys.family.is_some() { Some(params.x0) } else { None };

    let mut samples = Vec::with_capacity(n_samples);
    let mut truncated = None;
    // time at the first grid point, measured from w0
    let t_start = integrate_fallible(|w| dt_dw(w, params.x0), params.w0, ws, &opts)?.value + params.t0;
    let x_start = x_of(ws, params.x0)?;
    samples.push(Sample { w: ws, x: x_start, t: t_start, xdot: params.velocity(ws)?, sheet: 0 });

    let grid = parameter_grid(ws, we, n_samples, &roots);
    for pair in grid.windows(2) {
        let prev = *samples.last().expect("non-empty");
        let x_ref = branch_ref.unwrap_or(prev.x);
        let step = x_of(pair[1], x_ref).and_then(|x| {
            let dt = integrate_fallible(|w| dt_dw(w, x_ref), pair[0], pair[1], &opts)?.value;
            Ok((x, dt))
        });
        match step {
            Ok((x, dt)) => samples.push(Sample {
                w: pair[1],
                x,
                t: prev.t + dt,
                xdot: params.velocity(pair[1])?,
                sheet: 0,
            }),
            Err(e) => {
                truncated = Some(format!("stopped at w = {}: {e}", pair[0]));
                break;
            }
        }
    }

    let forward = samples.len() < 2 || samples[1].t > samples[0].t;
    let f0 = sys.f.evaluate(params.x0)?;
    Ok(ParametricSolution {
        samples,
        branch_id: (k * f0).signum() as i32,
        w_range,
        system: sys.clone(),
        fit: InitialFit::Chiellini(*params),
        forward,
        truncated,
    })
}

/// Resamples a solution at the requested times.
///
/// Uses cubic Hermite interpolation in `t` with the exact slopes `x'` and
/// `x'' = -f(x) x' - g(x)` at every sample.
pub fn emit_time_series(sol: &ParametricSolution, t_grid: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    let mut nodes: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(sol.samples.len());
    for s in &sol.samples {
        let acc = sol.system.acceleration(s.x, s.xdot)?;
        nodes.push((s.t, s.x, s.xdot, acc));
    }
    if !sol.forward {
        nodes.reverse();
    }
    if nodes.len() < 2 {
        return Err(Error::Invalid("need at least two samples to interpolate".into()));
    }
    let (lo, hi) = (nodes[0].0, nodes[nodes.len() - 1].0);
    t_grid
        .iter()
        .map(|&t| {
            if !(lo <= t && t <= hi) {
                return Err(Error::Range { t, lo, hi });
            }
            let idx = match nodes.binary_search_by(|n| n.0.partial_cmp(&t).unwrap_or(Ordering::Less)) {
                Ok(i) => return Ok((t, nodes[i].1, nodes[i].2)),
                Err(i) => i.clamp(1, nodes.len() - 1),
            };
            let (a, b) = (nodes[idx - 1], nodes[idx]);
            let h = b.0 - a.0;
            let s = (t - a.0) / h;
            Ok((t, hermite(s, h, a.1, a.2, b.1, b.2), hermite(s, h, a.2, a.3, b.2, b.3)))
        })
        .collect()
}

/// Cubic Hermite interpolant on a unit parameter `s` over a step `h`.
pub(crate) fn hermite(s: f64, h: f64, y0: f64, d0: f64, y1: f64, d1: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * h * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * h * d1
}
