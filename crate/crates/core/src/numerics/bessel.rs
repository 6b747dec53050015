use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

// Below this the integral representation is used for J0, above it the
// Hankel expansion. The smallest Hankel term is ~e^{-2x}, so 25 leaves
// plenty of margin below 1e-16.
const J0_ASYMPTOTIC_FROM: f64 = 25.0;
const J0_MIDPOINT_NODES: usize = 48;

// Ascending series for K0/K1 up to here, Steed's continued fraction beyond.
const K_SERIES_UP_TO: f64 = 2.0;

/// Bessel function of the first kind, order zero.
///
/// Absolute error stays below 1e-13 on |x| <= 1e4.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!(
            "J0 needs a finite argument, got {x}"
        )));
    }
    let x = x.abs();
    if x <= J0_ASYMPTOTIC_FROM {
        // J0(x) = (1/pi) * int_0^pi cos(x sin t) dt. The integrand is smooth and
        // periodic, so the midpoint rule converges geometrically: the first
        // aliasing term is J_{2N}(x).
        let n = J0_MIDPOINT_NODES;
        let h = PI / n as f64;
        let sum: f64 = (0..n)
            .map(|k| (x * ((k as f64 + 0.5) * h).sin()).cos())
            .sum();
        Ok(sum / n as f64)
    } else {
        Ok(j0_hankel(x))
    }
}

fn j0_hankel(x: f64) -> f64 {
    // P and Q of the Hankel expansion with mu = 4 nu^2 = 0.
    let eight_x = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= -(odd * odd) / (k as f64 * eight_x);
        if term.abs() > last || term.abs() < 1e-18 {
            break;
        }
        last = term.abs();
        // P = c0 - c2 + c4 - ..., Q = c1 - c3 + c5 - ...
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
    }
    let (s, c) = x.sin_cos();
    // cos(x - pi/4) and sin(x - pi/4) without losing the reduction of x.
    let cos_chi = (c + s) * FRAC_1_SQRT_2;
    let sin_chi = (s - c) * FRAC_1_SQRT_2;
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// Modified Bessel function of the first kind, order zero (ascending series).
pub fn bessel_i0(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        term *= y / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Modified Bessel function of the first kind, order one (ascending series).
pub fn bessel_i1(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        term *= y / (k * (k + 1)) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    0.5 * x * sum
}

/// Modified Bessel function of the second kind, order zero. Requires x > 0.
pub fn bessel_k0(x: f64) -> Result<f64> {
    check_positive(x, "K0")?;
    Ok(if x <= K_SERIES_UP_TO {
        k01_series(x).0
    } else {
        k01_steed(x).0
    })
}

/// Modified Bessel function of the second kind, order one. Requires x > 0.
pub fn bessel_k1(x: f64) -> Result<f64> {
    check_positive(x, "K1")?;
    Ok(if x <= K_SERIES_UP_TO {
        k01_series(x).1
    } else {
        k01_steed(x).1
    })
}

fn check_positive(x: f64, name: &str) -> Result<()> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!("{name} needs x > 0, got {x}")));
    }
    Ok(())
}

/// (K0, K1) from the ascending series with harmonic-number coefficients.
fn k01_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let log_term = (0.5 * x).ln() + EULER_GAMMA;

    // I0 = sum y^k/(k!)^2, K0 = -(ln(x/2)+gamma) I0 + sum H_k y^k/(k!)^2
    // I1 = (x/2) sum y^k/(k!(k+1)!),
    // K1 = 1/x + (ln(x/2)+gamma) I1 - (x/4) sum (H_k + H_{k+1}) y^k/(k!(k+1)!)
    let mut t0 = 1.0;
    let mut t1 = 1.0;
    let mut i0 = 1.0;
    let mut i1 = 1.0;
    let mut h = 0.0;
    let mut s0 = 0.0;
    let mut s1 = 1.0; // k = 0: H_0 + H_1 = 1
    for k in 1..200 {
        let kf = k as f64;
        t0 *= y / (kf * kf);
        t1 *= y / (kf * (kf + 1.0));
        h += 1.0 / kf;
        let h_next = h + 1.0 / (kf + 1.0);
        i0 += t0;
        i1 += t1;
        s0 += h * t0;
        s1 += (h + h_next) * t1;
        if t0 * h_next < 1e-18 * i0 && t1 * h_next < 1e-18 * i1 {
            break;
        }
    }
    let i1 = 0.5 * x * i1;
    let k0 = -log_term * i0 + s0;
    let k1 = 1.0 / x + log_term * i1 - 0.25 * x * s1;
    (k0, k1)
}

/// (K0, K1) via Steed's method on Temme's continued fraction (order 0).
fn k01_steed(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    let h = a1 * h;
    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}
