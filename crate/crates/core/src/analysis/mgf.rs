use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::EffectiveStats;
use crate::numerics::GaussLegendre;
use crate::{Error, Result};

/// Real Gaussian vector `y ~ N(mean, covariance)` whose squared norm is the
/// quantity of interest.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianQuadraticForm {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

impl GaussianQuadraticForm {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        if covariance.nrows() != n || covariance.ncols() != n {
            return Err(Error::Domain(
                "mean and covariance dimensions differ".into(),
            ));
        }
        let scale = covariance.amax().max(1.0);
        if (&covariance - covariance.transpose()).amax() > 1e-12 * scale {
            return Err(Error::Domain("covariance is not symmetric".into()));
        }
        Ok(Self { mean, covariance })
    }

    /// `E[exp(-s ||y||^2)]`.
    pub fn mgf(&self, s: f64) -> Result<f64> {
        gaussian_quadratic_mgf(self, s)
    }
}

/// MGF of `||y||^2` evaluated in the eigenbasis of the covariance.
///
/// Each eigen-direction contributes `(1 + 2 s l)^(-1/2) exp(-s m^2 / (1 + 2 s l))`
/// with `m` the projected mean, which stays finite for singular covariances.
pub fn gaussian_quadratic_mgf(form: &GaussianQuadraticForm, s: f64) -> Result<f64> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::Domain(format!(
            "MGF argument must be non-negative, got {s}"
        )));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    let eig = SymmetricEigen::new(form.covariance.clone());
    let proj = eig.eigenvectors.transpose() * &form.mean;
    let mut log_mgf = 0.0;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let l = lambda.max(0.0);
        let den = 1.0 + 2.0 * s * l;
        log_mgf -= 0.5 * den.ln() + s * proj[k] * proj[k] / den;
    }
    Ok(log_mgf.exp())
}

fn check_s(s: f64) -> Result<()> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::Domain(format!(
            "MGF argument must be non-negative, got {s}"
        )));
    }
    Ok(())
}

/// Focused-branch Gaussian model of an index error `i != i_hat`.
pub fn case1_form(
    x: Complex64,
    x_hat: Complex64,
    stats: &EffectiveStats,
    k_sel: usize,
) -> Result<GaussianQuadraticForm> {
    let k = k_sel as f64;
    let km = k * stats.mu_eff;
    let kv = k * stats.sigma2_eff;
    let a_xh = 0.5 * k * stats.e2_eff * x_hat.norm_sqr();
    let a_x = 0.5 * k * stats.e2_eff * x.norm_sqr();
    let c = 0.5 * k * stats.mu_eff * stats.mu_eff;
    let (xr, xi, hr, hi) = (x.re, x.im, x_hat.re, x_hat.im);

    let s13 = c * (-xr * hr + xi * hi);
    let s14 = -c * (xr * hi + xi * hr);
    let s23 = s14;
    let s24 = -s13;
    #[rustfmt::skip]
    let cov = DMatrix::from_row_slice(4, 4, &[
        kv * xr * xr + a_xh, kv * xr * xi,        s13,                 s14,
        kv * xr * xi,        kv * xi * xi + a_xh, s23,                 s24,
        s13,                 s23,                 kv * hr * hr + a_x,  kv * hr * hi,
        s14,                 s24,                 kv * hr * hi,        kv * hi * hi + a_x,
    ]);
    let mean = DVector::from_vec(vec![km * xr, km * xi, -km * hr, -km * hi]);
    GaussianQuadraticForm::new(mean, cov)
}

/// MGF of the decision distance for an index error.
pub fn mgf_case1(
    s: f64,
    x: Complex64,
    x_hat: Complex64,
    stats: &EffectiveStats,
    k_sel: usize,
    n_r: usize,
) -> Result<f64> {
    check_s(s)?;
    if n_r < 2 {
        return Err(Error::Domain(
            "index errors need at least two receive antennas".into(),
        ));
    }
    let form = case1_form(x, x_hat, stats, k_sel)?;
    let rest = 1.0 + s * k_sel as f64 * stats.e2_eff * (x.norm_sqr() + x_hat.norm_sqr());
    Ok(form.mgf(s)? * rest.powi(-((n_r - 2) as i32)))
}

/// MGF of the decision distance for a symbol-only error.
pub fn mgf_case2(
    s: f64,
    x: Complex64,
    x_hat: Complex64,
    stats: &EffectiveStats,
    k_sel: usize,
    n_r: usize,
) -> Result<f64> {
    check_s(s)?;
    if x == x_hat {
        return Err(Error::Domain(
            "symbol-only error needs distinct symbols".into(),
        ));
    }
    if n_r < 1 {
        return Err(Error::Domain("need at least one receive antenna".into()));
    }
    let k = k_sel as f64;
    let d2 = (x - x_hat).norm_sqr();
    let mu_h = k * stats.mu_eff;
    let var_h = k * stats.sigma2_eff;
    let den = 1.0 + 2.0 * s * var_h * d2;
    let focused = den.powf(-0.5) * (-mu_h * mu_h * d2 * s / den).exp();
    let rest = (1.0 + s * k * stats.e2_eff * d2).powi(-((n_r - 1) as i32));
    Ok(focused * rest)
}

/// How the Gaussian Q-function average is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpepMethod {
    /// Craig's finite-range form with Gauss-Legendre nodes.
    Craig { nodes: usize },
    /// `Q(t) ~ exp(-t^2/2)/12 + exp(-2t^2/3)/4`.
    TwoExp,
}

impl Default for UpepMethod {
    fn default() -> Self {
        UpepMethod::Craig { nodes: 64 }
    }
}

const CRAIG_EPS: f64 = 1e-9;

/// Unconditional pairwise error probability from the distance MGF.
pub fn upep(mgf: impl Fn(f64) -> Result<f64>, n0: f64, method: UpepMethod) -> Result<f64> {
    if !n0.is_finite() || n0 <= 0.0 {
        return Err(Error::Domain(format!(
            "noise variance must be positive, got {n0}"
        )));
    }
    match method {
        UpepMethod::TwoExp => Ok(mgf(1.0 / (4.0 * n0))? / 12.0 + mgf(1.0 / (3.0 * n0))? / 4.0),
        UpepMethod::Craig { nodes } => {
            let rule = GaussLegendre::new(nodes)?;
            craig(&rule, &mgf, n0)
        }
    }
}

fn craig(rule: &GaussLegendre, mgf: &impl Fn(f64) -> Result<f64>, n0: f64) -> Result<f64> {
    let at = |eta: f64| {
        let sn = eta.sin();
        mgf(1.0 / (4.0 * n0 * sn * sn))
    };
    let mut failure = None;
    let body = rule.integrate(
        |eta| match at(eta) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        CRAIG_EPS,
        std::f64::consts::FRAC_PI_2,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    // [0, eps] is filled with the integrand value at eps.
    Ok((body + CRAIG_EPS * at(CRAIG_EPS)?) / std::f64::consts::PI)
}
