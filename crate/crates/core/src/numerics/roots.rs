//! Bracketing root finders for monotone scalar functions.

use crate::error::{Error, Result};

const MAX_BRENT_ITER: usize = 200;
const MAX_BRACKET_STEPS: usize = 2100;

/// Relative accuracy requested from [`invert_increasing`].
pub const INVERSION_RTOL: f64 = 1e-14;

/// Brent–Dekker root search on `[lo, hi]`.
///
/// `f(lo)` and `f(hi)` must not have the same strict sign. Stops when the
/// bracket half-width drops below `rtol * |x| + atol`.
pub fn brent<F>(mut f: F, lo: f64, hi: f64, rtol: f64, atol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Domain(format!(
            "root not bracketed: f({a:e}) = {fa:e}, f({b:e}) = {fb:e}"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_BRENT_ITER {
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
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * (rtol * b.abs() + atol);
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            // inverse quadratic interpolation or secant
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
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
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
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::RootNotConverged {
        lo: b.min(c),
        hi: b.max(c),
        target: 0.0,
        iterations: MAX_BRENT_ITER,
    })
}

/// Solves `f(x) = target` for a strictly increasing, unbounded `f` with
/// `f(0) = 0`. Non-positive targets map to zero.
///
/// The bracket starts at `[0, 1]`; the upper end doubles until it passes the
/// target, and for small targets the lower end halves until it falls below
/// it, so the final bracket is always within a factor two of the root.
pub fn invert_increasing<F>(f: F, target: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !target.is_finite() {
        return Err(Error::Domain(format!("cannot invert at non-finite value {target}")));
    }
    if target <= 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.5, 1.0);
    if f(hi) < target {
        let mut steps = 0;
        while f(hi) < target {
            lo = hi;
            hi *= 2.0;
            steps += 1;
            if steps > MAX_BRACKET_STEPS || !hi.is_finite() {
                return Err(Error::RootNotConverged {
                    lo,
                    hi,
                    target,
                    iterations: steps,
                });
            }
        }
    } else {
        let mut steps = 0;
        while f(lo) > target {
            hi = lo;
            lo *= 0.5;
            steps += 1;
            if lo < f64::MIN_POSITIVE {
                return Ok(0.0);
            }
            if steps > MAX_BRACKET_STEPS {
                return Err(Error::RootNotConverged {
                    lo,
                    hi,
                    target,
                    iterations: steps,
                });
            }
        }
    }
    brent(|x| f(x) - target, lo, hi, INVERSION_RTOL, 0.0).map_err(|err| match err {
        Error::RootNotConverged { iterations, .. } => Error::RootNotConverged {
            lo,
            hi,
            target,
            iterations,
        },
        other => other,
    })
}
