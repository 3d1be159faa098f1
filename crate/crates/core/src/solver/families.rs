//! Closed-form inversions of `g(x)/f(x) = target` for the built-in families.

use crate::error::{Error, Result};
use crate::kernel::bracketed_root;

/// A system whose ratio `R = g/f` can be inverted in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFamily {
    /// `f = a x + b`, `R = C1 + k (a x^2 / 2 + b x)`.
    LinearDamping { a: f64, b: f64, k: f64, c1: f64 },
    /// `g = c x + d`, `R = sign * sqrt(C2 + k (c x^2 + 2 d x))`.
    LinearRestoring { c: f64, d: f64, k: f64, c2: f64, sign: f64 },
    /// `f = -mu (1 - x^2)`, `R = C1 + k mu (x^3 / 3 - x)`.
    VanDerPol { mu: f64, k: f64, c1: f64 },
}

fn sign_of(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Root of `(q/2) x^2 + p x + r = 0` on the branch where `q x + p` has sign `branch`.
fn quadratic_branch(q: f64, p: f64, r: f64, branch: f64) -> Result<f64> {
    if q == 0.0 {
        if p == 0.0 {
            return Err(Error::Inversion("constant ratio cannot be inverted".into()));
        }
        return Ok(-r / p);
    }
    let disc = p * p - 2.0 * q * r;
    if disc < 0.0 {
        return Err(Error::Inversion(format!("target lies beyond the fold (discriminant {disc:e})")));
    }
    let root = disc.sqrt();
    // pick the form without cancellation
    if branch * p <= 0.0 {
        Ok((-p + branch * root) / q)
    } else {
        let sum = -p - branch * root;
        if sum == 0.0 {
            return Ok((-p + branch * root) / q);
        }
        Ok(2.0 * r / sum)
    }
}

impl ClosedFamily {
    pub fn k(&self) -> f64 {
        match *self {
            ClosedFamily::LinearDamping { k, .. }
            | ClosedFamily::LinearRestoring { k, .. }
            | ClosedFamily::VanDerPol { k, .. } => k,
        }
    }

    /// Solves `R(x) = target` on the monotone branch of `R` containing `x_ref`.
    pub fn invert(&self, target: f64, x_ref: f64) -> Result<f64> {
        if !target.is_finite() {
            return Err(Error::NonFinite { x: target, context: "inversion target".into() });
        }
        match *self {
            ClosedFamily::LinearDamping { a, b, k, c1 } => {
                let branch = sign_of(k * (a * x_ref + b));
                quadratic_branch(a * k, b * k, c1 - target, branch)
            }
            ClosedFamily::LinearRestoring { c, d, k, c2, sign } => {
                if target * sign < 0.0 {
                    return Err(Error::Inversion(format!("target {target} has the wrong sign for this branch")));
                }
                let branch = sign_of(k * (c * x_ref + d));
                quadratic_branch(c * k, d * k, 0.5 * (c2 - target * target), branch)
            }
            ClosedFamily::VanDerPol { mu, k, c1 } => {
                let h = 3.0 * (c1 - target) / (k * mu);
                cubic_in_region(h, x_ref)
            }
        }
    }
}

fn cubic(x: f64, h: f64) -> f64 {
    x * x * x - 3.0 * x + h
}

/// Real root of `x^3 - 3x + H = 0`.
///
/// For `H < -2` the radical form `2^{1/3}/D + D/2^{1/3}`,
/// `D = (sqrt(H^2 - 4) - H)^{1/3}`, is used and polished; elsewhere the root
/// is bracketed: the largest root on `[1, 2]` for `|H| <= 2`, the single root
/// below `-2` for `H > 2`.
pub fn invert_cubic_vdp(h: f64) -> Result<f64> {
    if !h.is_finite() {
        return Err(Error::NonFinite { x: h, context: "cubic parameter".into() });
    }
    if h < -2.0 {
        let d = ((h * h - 4.0).sqrt() - h).cbrt();
        let c = 2f64.cbrt();
        let x = c / d + d / c;
        let polished = polish(x, h);
        if cubic(polished, h).abs() <= 1e-10 {
            return Ok(polished);
        }
        return bracketed_root(|x| cubic(x, h), 2.0, 2.0 + h.abs().sqrt() + 1.0, 1e-15);
    }
    if h <= 2.0 {
        bracketed_root(|x| cubic(x, h), 1.0, 2.0, 1e-15)
    } else {
        bracketed_root(|x| cubic(x, h), -2.0 - h, -2.0, 1e-15)
    }
}

fn polish(mut x: f64, h: f64) -> f64 {
    for _ in 0..3 {
        let der = 3.0 * x * x - 3.0;
        if der == 0.0 {
            break;
        }
        let next = x - cubic(x, h) / der;
        if !next.is_finite() {
            break;
        }
        x = next;
    }
    x
}

/// Root of `x^3 - 3x + H` in the monotone region (`x < -1`, `|x| < 1`, `x > 1`)
/// that contains `x_ref`.
pub fn cubic_in_region(h: f64, x_ref: f64) -> Result<f64> {
    let beyond = |region: &str| Err(Error::Inversion(format!("no root of x^3 - 3x + {h} in region {region}")));
    if x_ref > 1.0 {
        if h >= 2.0 {
            return beyond("x > 1");
        }
        if h < -2.0 {
            return invert_cubic_vdp(h);
        }
        bracketed_root(|x| cubic(x, h), 1.0, 2.0, 1e-15)
    } else if x_ref < -1.0 {
        if h <= -2.0 {
            return beyond("x < -1");
        }
        // odd symmetry: roots for H are negatives of roots for -H
        cubic_in_region(-h, -x_ref).map(|x| -x)
    } else {
        if h.abs() >= 2.0 {
            return beyond("|x| < 1");
        }
        bracketed_root(|x| cubic(x, h), -1.0, 1.0, 1e-15)
    }
}
