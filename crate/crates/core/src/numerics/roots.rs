use crate::{Error, Result};

/// Default bracket for threshold searches; 2tK1(2t) sweeps (0, 1) on it.
pub const DEFAULT_BRACKET: (f64, f64) = (1e-8, 50.0);

/// Brent's method on a sign-changing bracket.
///
/// Returns once |g(x)| <= tol or the bracket has shrunk below tol. Falls
/// back to bisection whenever the interpolation step is not productive, so
/// convergence is guaranteed for continuous `g`.
pub fn solve_root_monotone(
    mut g: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite() && tol > 0.0) {
        return Err(Error::Domain(format!(
            "bad root search setup: [{lo}, {hi}], tol {tol}"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (g(a), g(b));
    if fa.is_nan() || fb.is_nan() || fa * fb > 0.0 {
        return Err(Error::Bracketing {
            lo,
            hi,
            g_lo: fa,
            g_hi: fb,
        });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..500 {
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
        let step_tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let m = 0.5 * (c - b);
        if fb.abs() <= tol || m.abs() <= step_tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= step_tol && fa.abs() > fb.abs() {
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
            if 2.0 * p < (3.0 * m * q - (step_tol * q).abs()).min((e * q).abs()) {
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
        b += if d.abs() > step_tol {
            d
        } else {
            step_tol.copysign(m)
        };
        fb = g(b);
    }
    Ok(b)
}
