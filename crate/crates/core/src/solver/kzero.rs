//! The `k = 0` branch: `x'' + f(x) x' + A f(x) = 0`.
//!
//! With `v = 1/x'` and `Phi = int f`, solutions satisfy
//! `Phi(x) = A ln|1/v + A| - 1/v + K1` and `dt = dv / (f(x) v (1 + A v))`.

use super::{invert_on_branch, InitialConditions, InitialFit, ParametricSolution, Sample, INVERSION_TOL, TIME_TOL};
use crate::error::{Error, Result};
use crate::funcmodel::FunctionSpec;
use crate::integrability::LienardSystem;
use crate::kernel::bracketed_root_fallible;
use crate::kernel::quadrature::{integrate_fallible, QuadratureOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KZeroParams {
    pub a: f64,
    pub k1: f64,
    pub v0: f64,
    pub x0: f64,
    pub t0: f64,
}

impl KZeroParams {
    /// `A ln|1/v + A| - 1/v + K1`.
    pub fn potential_target(&self, v: f64) -> f64 {
        let u = 1.0 / v;
        velocity_term(self.a, u) + self.k1
    }
}

/// `A ln|u + A| - u`, with the `A = 0` limit taken exactly.
fn velocity_term(a: f64, u: f64) -> f64 {
    if a == 0.0 {
        -u
    } else {
        a * (u + a).abs().ln() - u
    }
}

pub fn fit_k_zero(f: &FunctionSpec, a: f64, ic: &InitialConditions) -> Result<KZeroParams> {
    if ic.xdot0 == 0.0 {
        return Err(Error::Singular { what: "initial velocity".into(), x: ic.x0 });
    }
    if ic.xdot0 + a == 0.0 {
        return Err(Error::Pole { at: -1.0 / a, excluded: vec![0.0, -1.0 / a] });
    }
    if f.evaluate(ic.x0)? == 0.0 {
        return Err(Error::Singular { what: "f".into(), x: ic.x0 });
    }
    let phi0 = f.antiderivative().evaluate(ic.x0)?;
    Ok(KZeroParams {
        a,
        k1: phi0 - velocity_term(a, ic.xdot0),
        v0: 1.0 / ic.xdot0,
        x0: ic.x0,
        t0: 0.0,
    })
}

/// Samples the `k = 0` solution over `v_range`, geometrically spaced in `v`.
pub fn solve_k_zero(
    f: &FunctionSpec,
    a: f64,
    ic: &InitialConditions,
    v_range: (f64, f64),
    n_samples: usize,
) -> Result<ParametricSolution> {
    let params = fit_k_zero(f, a, ic)?;
    let (vs, ve) = v_range;
    let mut poles = vec![0.0];
    if a != 0.0 {
        poles.push(-1.0 / a);
    }
    let (lo, hi) = (vs.min(ve).min(params.v0), vs.max(ve).max(params.v0));
    if let Some(&p) = poles.iter().find(|&&p| lo <= p && p <= hi) {
        return Err(Error::Pole { at: p, excluded: poles });
    }
    let phi = f.antiderivative();
    let x_of = |v: f64, x_ref: f64| -> Result<f64> {
        invert_on_branch(|x| phi.evaluate(x), |x| f.evaluate(x), params.potential_target(v), x_ref, 1e-2)
    };
    let dt_dv = |v: f64| -> Result<f64> {
        let x = x_of(v, params.x0)?;
        let fx = f.evaluate(x)?;
        if fx == 0.0 {
            return Err(Error::Singular { what: "f".into(), x });
        }
        Ok(1.0 / (fx * v * (1.0 + a * v)))
    };
    let opts = QuadratureOptions::with_tol(TIME_TOL);
    let n = n_samples.max(2);
    let grid: Vec<f64> = (0..n)
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            if i == n - 1 {
                ve
            } else {
                vs * (ve / vs).powf(s)
            }
        })
        .collect();

    let t_start = params.t0 + integrate_fallible(dt_dv, params.v0, vs, &opts)?.value;
    let mut samples = vec![Sample { w: vs, x: x_of(vs, params.x0)?, t: t_start, xdot: 1.0 / vs, sheet: 0 }];
    let mut truncated = None;
    for pair in grid.windows(2) {
        let prev = *samples.last().expect("non-empty");
        let step = x_of(pair[1], params.x0)
            .and_then(|x| Ok((x, integrate_fallible(dt_dv, pair[0], pair[1], &opts)?.value)));
        match step {
            Ok((x, dt)) => samples.push(Sample { w: pair[1], x, t: prev.t + dt, xdot: 1.0 / pair[1], sheet: 0 }),
            Err(e) => {
                truncated = Some(format!("stopped at v = {}: {e}", pair[0]));
                break;
            }
        }
    }
    let forward = samples.len() < 2 || samples[1].t > samples[0].t;
    let g = f.map(format!("{a} * ({f})"), move |fv| a * fv);
    Ok(ParametricSolution {
        samples,
        branch_id: f.evaluate(ic.x0)?.signum() as i32,
        w_range: v_range,
        system: LienardSystem::new(f.clone(), g).named("k0"),
        fit: InitialFit::KZero(params),
        forward,
        truncated,
    })
}

/// Velocity `x'` on the `k = 0` solution at position `x`, continued from the
/// initial velocity along the monotone branch of `A ln|u + A| - u`.
pub fn invert_k_zero_velocity(phi_x: f64, params: &KZeroParams, u_ref: f64) -> Result<f64> {
    let target = phi_x - params.k1;
    let a = params.a;
    if a == 0.0 {
        return Ok(-target);
    }
    // the branch of u is bounded by the zeros of the derivative -u / (u + A)
    let value = |u: f64| Ok(velocity_term(a, u) - target);
    let edges = {
        let mut e = vec![0.0, -a];
        e.sort_by(f64::total_cmp);
        e
    };
    let (lo, hi) = if u_ref < edges[0] {
        (f64::NEG_INFINITY, edges[0])
    } else if u_ref < edges[1] {
        (edges[0], edges[1])
    } else {
        (edges[1], f64::INFINITY)
    };
    let lo_pt = if lo.is_finite() { lo + 1e-300_f64.max(lo.abs() * f64::EPSILON) } else { lo };
    let hi_pt = if hi.is_finite() { hi - 1e-300_f64.max(hi.abs() * f64::EPSILON) } else { hi };
    // grow a symmetric bracket inside the branch until the value changes sign
    let (mut l, mut r) = (u_ref, u_ref);
    let mut step = 1e-3 * u_ref.abs().max(1.0);
    let v_ref = value(u_ref)?;
    if v_ref == 0.0 {
        return Ok(u_ref);
    }
    for _ in 0..200 {
        l = (l - step).max(lo_pt);
        r = (r + step).min(hi_pt);
        let (vl, vr) = (value(l)?, value(r)?);
        if vl.signum() != v_ref.signum() {
            return bracketed_root_fallible(value, l, u_ref, INVERSION_TOL);
        }
        if vr.signum() != v_ref.signum() {
            return bracketed_root_fallible(value, u_ref, r, INVERSION_TOL);
        }
        if l == lo_pt && r == hi_pt {
            break;
        }
        step *= 2.0;
    }
    Err(Error::Inversion(format!("no velocity on the branch through {u_ref} reaches {phi_x}")))
}
