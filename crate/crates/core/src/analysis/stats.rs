use std::f64::consts::{PI, TAU};

use crate::numerics::{
    bessel_k0, bessel_k1, integrate, integrate_tail, solve_root_monotone, QuadratureSpec,
    DEFAULT_BRACKET,
};
use crate::{Error, Result};

const ROOT_TOL: f64 = 1e-14;

/// Per-element statistics of the selected, aligned cascaded gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveStats {
    pub mu_eff: f64,
    pub sigma2_eff: f64,
    /// Total selected energy `E[r^2 | selected]`.
    pub e2_eff: f64,
    /// Quadrature leakage `E[b^2 | selected]`; zero for continuous phases.
    pub e2b_eff: f64,
    pub threshold: f64,
    pub p_sel: f64,
}

/// Double-Rayleigh magnitude density `4 r K0(2r)`.
pub fn double_rayleigh_pdf(r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    4.0 * r * bessel_k0(2.0 * r).unwrap_or(0.0)
}

/// `P(r > t) = 2t K1(2t)`, equal to one at `t = 0`.
pub fn double_rayleigh_tail(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let x = 2.0 * t;
    x * bessel_k1(x).unwrap_or(0.0)
}

fn check_p(p_sel: f64) -> Result<()> {
    if !(p_sel > 0.0 && p_sel <= 1.0) {
        return Err(Error::Domain(format!(
            "selection ratio must lie in (0, 1], got {p_sel}"
        )));
    }
    Ok(())
}

/// Truncated moments `(M0, M1, M2)` of `r` over `r > t`.
pub fn truncated_moments(t: f64) -> Result<(f64, f64, f64)> {
    let spec = QuadratureSpec::default();
    let m1 = integrate_tail(|r| r * double_rayleigh_pdf(r), t.max(0.0), &spec)?;
    if t <= 0.0 {
        return Ok((1.0, m1, 1.0));
    }
    let x = 2.0 * t;
    let (k0, k1) = (bessel_k0(x)?, bessel_k1(x)?);
    let m0 = x * k1;
    let m2 = 2.0 * t.powi(3) * k1 + 2.0 * t * t * k0 + m0;
    Ok((m0, m1, m2))
}

/// Threshold-model statistics for continuous phase alignment.
pub fn continuous_stats(p_sel: f64) -> Result<EffectiveStats> {
    check_p(p_sel)?;
    let threshold = if p_sel == 1.0 {
        0.0
    } else {
        let (lo, hi) = DEFAULT_BRACKET;
        solve_root_monotone(|t| double_rayleigh_tail(t) - p_sel, lo, hi, ROOT_TOL)?
    };
    let (m0, m1, m2) = truncated_moments(threshold)?;
    let mu = m1 / m0;
    let e2 = m2 / m0;
    Ok(EffectiveStats {
        mu_eff: mu,
        sigma2_eff: e2 - mu * mu,
        e2_eff: e2,
        e2b_eff: 0.0,
        threshold,
        p_sel,
    })
}

/// Incomplete moments of the in-phase projection `a = r cos(eps)` with
/// `eps ~ U[-D/2, D/2]` over the event `a > t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionMoments {
    pub m0a: f64,
    pub m1a: f64,
    pub m2a: f64,
    pub m2r: f64,
}

// Integrates w(r, phi(r)) f_r(r) over r > t, where phi saturates at D/2
// beyond r_c = t / cos(D/2). Near t the arccos has a square-root edge, so
// that piece runs in r = t + u^2.
fn projection_integral(t: f64, step: f64, w: impl Fn(f64, f64) -> f64) -> Result<f64> {
    let spec = QuadratureSpec::default();
    let half = 0.5 * step;
    if t <= 0.0 {
        return integrate_tail(|r| w(r, half) * double_rayleigh_pdf(r), 0.0, &spec);
    }
    let edge = |u: f64| {
        let r = t + u * u;
        let phi = (t / r).acos().min(half);
        2.0 * u * w(r, phi) * double_rayleigh_pdf(r)
    };
    let c = half.cos();
    if c <= 1e-12 {
        return integrate_tail(edge, 0.0, &spec);
    }
    let r_c = t / c;
    let inner = integrate(edge, 0.0, (r_c - t).sqrt(), &spec)?;
    let outer = integrate_tail(|r| w(r, half) * double_rayleigh_pdf(r), r_c, &spec)?;
    Ok(inner + outer)
}

fn quantizer_step(bits: u32) -> Result<f64> {
    if bits == 0 || bits > 30 {
        return Err(Error::Domain(format!(
            "quantizer needs 1..=30 bits, got {bits}"
        )));
    }
    Ok(TAU / (1u64 << bits) as f64)
}

/// `M0a(t) = P(a > t)`.
pub fn projection_tail(t: f64, bits: u32) -> Result<f64> {
    let step = quantizer_step(bits)?;
    projection_integral(t, step, |_, phi| 2.0 * phi / step)
}

pub fn projection_moments(t: f64, bits: u32) -> Result<ProjectionMoments> {
    let step = quantizer_step(bits)?;
    Ok(ProjectionMoments {
        m0a: projection_integral(t, step, |_, phi| 2.0 * phi / step)?,
        m1a: projection_integral(t, step, |r, phi| 2.0 * r * phi.sin() / step)?,
        m2a: projection_integral(t, step, |r, phi| {
            r * r * (phi + 0.5 * (2.0 * phi).sin()) / step
        })?,
        m2r: projection_integral(t, step, |r, phi| 2.0 * r * r * phi / step)?,
    })
}

/// Threshold-model statistics for `bits`-bit quantized phases with
/// in-phase selection.
pub fn quantized_stats(p_sel: f64, bits: u32) -> Result<EffectiveStats> {
    check_p(p_sel)?;
    quantizer_step(bits)?;
    let threshold = if p_sel == 1.0 {
        0.0
    } else {
        let (lo, hi) = DEFAULT_BRACKET;
        let mut failure = None;
        let t = solve_root_monotone(
            |t| match projection_tail(t, bits) {
                Ok(v) => v - p_sel,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            lo,
            hi,
            ROOT_TOL,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        t?
    };
    let m = projection_moments(threshold, bits)?;
    let mu = m.m1a / m.m0a;
    Ok(EffectiveStats {
        mu_eff: mu,
        sigma2_eff: m.m2a / m.m0a - mu * mu,
        e2_eff: m.m2r / m.m0a,
        e2b_eff: (m.m2r - m.m2a) / m.m0a,
        threshold,
        p_sel,
    })
}

/// Aggregated focused-branch mean and variance and the non-focused energy.
pub fn aggregate(stats: &EffectiveStats, k_sel: usize) -> (f64, f64, f64) {
    let k = k_sel as f64;
    (k * stats.mu_eff, k * stats.sigma2_eff, k * stats.e2_eff)
}

/// Unconditional double-Rayleigh mean `pi / 4`.
pub const DOUBLE_RAYLEIGH_MEAN: f64 = PI / 4.0;
