use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

use crate::channel::{draw_cn, CorrelationModel};
use crate::{Error, Result};

/// Monte Carlo comparison of `M(s; J)` against `M(s; I)` at one `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderingPoint {
    pub s: f64,
    pub mgf_j: f64,
    pub mgf_i: f64,
    /// Standard error of the paired difference `M(s;J) - M(s;I)`.
    pub std_error: f64,
}

impl OrderingPoint {
    /// `M(s;J) >= M(s;I) - z * std_error`.
    pub fn holds(&self, z: f64) -> bool {
        self.mgf_j >= self.mgf_i - z * self.std_error
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    pub points: Vec<OrderingPoint>,
    /// Eigenvalues of `B_J` majorize its diagonal.
    pub majorizes: bool,
}

impl OrderingReport {
    pub fn holds(&self, z: f64) -> bool {
        self.majorizes && self.points.iter().all(|p| p.holds(z))
    }
}

/// Diagonal of `A = diag(x v_i - x_hat v_i_hat)`.
pub fn event_difference(
    v_i: &[Complex64],
    v_i_hat: &[Complex64],
    x: Complex64,
    x_hat: Complex64,
) -> Vec<Complex64> {
    v_i.iter()
        .zip(v_i_hat)
        .map(|(a, b)| x * a - x_hat * b)
        .collect()
}

/// `B_J = A^H J A`.
pub fn event_gram(j: &CorrelationModel, a: &[Complex64]) -> Result<DMatrix<Complex64>> {
    let n = j.dim();
    if a.len() != n {
        return Err(Error::Domain(format!(
            "event has {} entries, correlation has {n}",
            a.len()
        )));
    }
    Ok(DMatrix::from_fn(n, n, |p, q| {
        a[p].conj() * j.j_matrix[(p, q)] * a[q]
    }))
}

/// Sorted partial sums of `lambda` dominate those of `d`, with equal totals.
pub fn majorizes(lambda: &[f64], d: &[f64], tol: f64) -> bool {
    if lambda.len() != d.len() {
        return false;
    }
    let mut l = lambda.to_vec();
    let mut b = d.to_vec();
    l.sort_by(|x, y| y.total_cmp(x));
    b.sort_by(|x, y| y.total_cmp(x));
    let (mut sl, mut sb) = (0.0, 0.0);
    for (x, y) in l.iter().zip(&b) {
        sl += x;
        sb += y;
        if sl < sb - tol {
            return false;
        }
    }
    (sl - sb).abs() <= tol
}

/// Estimates `M(s;J) = E_f[(1 + s f^H B_J f)^(-n_r)]` and its identity
/// counterpart with common draws of `f`, and checks majorization.
pub fn verify_identity_lower_bound<R: Rng + ?Sized>(
    j: &CorrelationModel,
    a: &[Complex64],
    n_r: usize,
    s_grid: &[f64],
    draws: usize,
    rng: &mut R,
) -> Result<OrderingReport> {
    if draws < 2 {
        return Err(Error::Domain("need at least two Monte Carlo draws".into()));
    }
    let b_j = event_gram(j, a)?;
    let n = b_j.nrows();
    let diag: Vec<f64> = (0..n).map(|k| b_j[(k, k)].re).collect();
    let eig = SymmetricEigen::new(b_j.clone());
    let lambda: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let scale = diag.iter().sum::<f64>().abs().max(1.0);
    let majorizes = majorizes(&lambda, &diag, 1e-9 * scale);

    let power = n_r as i32;
    let mut sums = vec![(0.0, 0.0, 0.0, 0.0); s_grid.len()];
    for _ in 0..draws {
        let f = draw_cn(rng, n);
        let mut q_j = 0.0;
        let mut q_i = 0.0;
        for p in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for q in 0..n {
                row += b_j[(p, q)] * f[q];
            }
            q_j += (f[p].conj() * row).re;
            q_i += diag[p] * f[p].norm_sqr();
        }
        for (acc, &s) in sums.iter_mut().zip(s_grid) {
            let mj = (1.0 + s * q_j.max(0.0)).powi(-power);
            let mi = (1.0 + s * q_i).powi(-power);
            let d = mj - mi;
            acc.0 += mj;
            acc.1 += mi;
            acc.2 += d;
            acc.3 += d * d;
        }
    }
    let nf = draws as f64;
    let points = sums
        .iter()
        .zip(s_grid)
        .map(|(&(sj, si, sd, sd2), &s)| {
            let mean_d = sd / nf;
            let var_d = ((sd2 - nf * mean_d * mean_d) / (nf - 1.0)).max(0.0);
            OrderingPoint {
                s,
                mgf_j: sj / nf,
                mgf_i: si / nf,
                std_error: (var_d / nf).sqrt(),
            }
        })
        .collect();
    Ok(OrderingReport { points, majorizes })
}
