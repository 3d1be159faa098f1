//! Bracketed root finding and real roots of cubics.

use crate::error::{Error, Result};

pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

/// Brent's method on a sign-changing bracket.
///
/// Stops when `|fn(x)| <= tol` or the bracket is narrower than
/// `tol * max(1, |x|)`.
pub fn bracketed_root<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let mut fallible = |x| Ok(f(x));
    bracketed_root_fallible(&mut fallible, lo, hi, tol)
}

pub fn bracketed_root_fallible<F: FnMut(f64) -> Result<f64>>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::NonFinite { x: if fa.is_nan() { a } else { b }, context: "root bracket".into() });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket { lo, hi, f_lo: fa, f_hi: fb });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let width_tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol * b.abs().max(1.0);
        let m = 0.5 * (c - b);
        if fb.abs() <= tol || m.abs() <= width_tol {
            return Ok(b);
        }
        if e.abs() >= width_tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (width_tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > width_tol { d } else { width_tol.copysign(m) };
        fb = f(b)?;
        if fb.is_nan() {
            return Err(Error::NonFinite { x: b, context: "root iteration".into() });
        }
    }
    Ok(b)
}

/// Real roots of `x^3 + c2 x^2 + c1 x + c0`, ascending and polished by Newton.
pub fn real_cubic_roots(c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    // depressed cubic t^3 + p t + q with x = t - c2/3
    let shift = c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2.powi(3) / 27.0 - c2 * c1 / 3.0 + c0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let mut roots = if disc > 0.0 {
        let sq = disc.sqrt();
        vec![(-q / 2.0 + sq).cbrt() + (-q / 2.0 - sq).cbrt()]
    } else if p == 0.0 {
        vec![0.0]
    } else {
        let r = (-p / 3.0).sqrt();
        let arg = (-q / (2.0 * r.powi(3))).clamp(-1.0, 1.0);
        let phi = arg.acos();
        (0..3)
            .map(|j| 2.0 * r * ((phi - 2.0 * std::f64::consts::PI * j as f64) / 3.0).cos())
            .collect()
    };
    for t in roots.iter_mut() {
        *t -= shift;
        for _ in 0..3 {
            let val = ((*t + c2) * *t + c1) * *t + c0;
            let der = (3.0 * *t + 2.0 * c2) * *t + c1;
            if der == 0.0 {
                break;
            }
            let next = *t - val / der;
            if next.is_finite() {
                *t = next;
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
    roots
}
