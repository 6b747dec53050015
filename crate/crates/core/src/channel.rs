//! Surface geometry, Jakes spatial correlation and correlated cascaded
//! double-Rayleigh channel draws.
//!
//! Spacings are in wavelengths, so the Jakes kernel is `J0(2 pi d)`.
//! Elements are numbered row-major from zero: `n = j * n_x + i` with
//! `i` the horizontal and `j` the vertical grid coordinate.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::numerics::bessel_j0;
use crate::{Error, Result};

const ASYMMETRY_TOLERANCE: f64 = 1e-10;
const CLAMP_BELOW: f64 = 1e-10;
const BROKEN_MODEL_EIGENVALUE: f64 = -1e-6;

/// Uniform planar grid of candidate elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrisGeometry {
    pub n_x: usize,
    pub n_z: usize,
    /// Horizontal spacing in wavelengths.
    pub d_x: f64,
    /// Vertical spacing in wavelengths.
    pub d_z: f64,
}

impl FrisGeometry {
    pub fn new(n_x: usize, n_z: usize, d_x: f64, d_z: f64) -> Result<Self> {
        let geom = Self { n_x, n_z, d_x, d_z };
        geom.validate()?;
        Ok(geom)
    }

    /// Grid spanning an aperture `w_x` by `w_z` (wavelengths), spacing `W/(N-1)`.
    /// A single element along an axis gets unit spacing, which never enters
    /// any distance.
    pub fn from_aperture(n_x: usize, n_z: usize, w_x: f64, w_z: f64) -> Result<Self> {
        let spacing = |n: usize, w: f64| if n > 1 { w / (n - 1) as f64 } else { 1.0 };
        Self::new(n_x, n_z, spacing(n_x, w_x), spacing(n_z, w_z))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_x == 0 || self.n_z == 0 {
            return Err(Error::Config(format!(
                "grid must have at least one element per axis, got {}x{}",
                self.n_x, self.n_z
            )));
        }
        if !(self.d_x > 0.0 && self.d_z > 0.0 && self.d_x.is_finite() && self.d_z.is_finite()) {
            return Err(Error::Config(format!(
                "element spacings must be positive, got d_x={}, d_z={}",
                self.d_x, self.d_z
            )));
        }
        Ok(())
    }

    pub fn n_tot(&self) -> usize {
        self.n_x * self.n_z
    }

    /// Grid coordinates `(i, j)` of element `n`.
    pub fn coords(&self, n: usize) -> Result<(usize, usize)> {
        if n >= self.n_tot() {
            return Err(Error::IndexOutOfRange {
                index: n,
                len: self.n_tot(),
            });
        }
        Ok((n % self.n_x, n / self.n_x))
    }

    /// Euclidean distance in wavelengths between elements `p` and `q`.
    pub fn element_distance(&self, p: usize, q: usize) -> Result<f64> {
        let (ip, jp) = self.coords(p)?;
        let (iq, jq) = self.coords(q)?;
        let dx = self.d_x * (ip as f64 - iq as f64);
        let dz = self.d_z * (jp as f64 - jq as f64);
        Ok((dx * dx + dz * dz).sqrt())
    }
}

/// Spatial correlation `J`, its symmetric PSD square root and spectrum.
#[derive(Debug, Clone)]
pub struct CorrelationModel {
    pub j_matrix: DMatrix<f64>,
    pub sqrt_factor: DMatrix<f64>,
    /// Eigenvalues after clamping, ascending.
    pub eigenvalues: DVector<f64>,
    identity: bool,
    // Row-major copy of sqrt_factor for the sampling kernel.
    sqrt_rows: Vec<f64>,
}

impl CorrelationModel {
    /// Uncorrelated elements, `J = I`.
    pub fn identity(n: usize) -> Self {
        let eye = DMatrix::identity(n, n);
        Self {
            sqrt_rows: eye.transpose().as_slice().to_vec(),
            j_matrix: eye.clone(),
            sqrt_factor: eye,
            eigenvalues: DVector::from_element(n, 1.0),
            identity: true,
        }
    }

    /// Wraps an arbitrary unit-diagonal correlation matrix.
    pub fn from_matrix(j: DMatrix<f64>) -> Result<Self> {
        let (sqrt_factor, raw) = psd_sqrt_with_spectrum(&j)?;
        if let Some(min) = raw.iter().copied().reduce(f64::min) {
            if min < BROKEN_MODEL_EIGENVALUE {
                return Err(Error::Model(format!(
                    "correlation matrix has eigenvalue {min:e}, not positive semidefinite"
                )));
            }
        }
        let eigenvalues = raw.map(|l| l.max(0.0));
        Ok(Self {
            sqrt_rows: sqrt_factor.transpose().as_slice().to_vec(),
            j_matrix: j,
            sqrt_factor,
            eigenvalues,
            identity: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.j_matrix.nrows()
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }
}

/// Jakes correlation `J_pq = J0(2 pi d_pq)` for the grid, with its square root.
pub fn build_jakes_correlation(geom: &FrisGeometry) -> Result<CorrelationModel> {
    geom.validate()?;
    let n = geom.n_tot();
    let mut j = DMatrix::<f64>::identity(n, n);
    for p in 0..n {
        for q in (p + 1)..n {
            let rho = bessel_j0(2.0 * std::f64::consts::PI * geom.element_distance(p, q)?)?;
            j[(p, q)] = rho;
            j[(q, p)] = rho;
        }
    }
    CorrelationModel::from_matrix(j)
}

/// Symmetric PSD square root `U sqrt(L) U^T`, negative eigenvalues clamped to zero.
pub fn psd_sqrt(j: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    psd_sqrt_with_spectrum(j).map(|(s, _)| s)
}

fn psd_sqrt_with_spectrum(j: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if !j.is_square() {
        return Err(Error::Domain(format!(
            "matrix must be square, got {}x{}",
            j.nrows(),
            j.ncols()
        )));
    }
    let scale = j.amax().max(1.0);
    let asym = (j - j.transpose()).amax();
    if asym > ASYMMETRY_TOLERANCE * scale {
        return Err(Error::Domain(format!(
            "matrix is not symmetric (max deviation {asym:e})"
        )));
    }
    let sym = (j + j.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let raw = DVector::from_iterator(order.len(), order.iter().map(|&k| eig.eigenvalues[k]));

    let n = j.nrows();
    let mut scaled = eig.eigenvectors.clone();
    for k in 0..n {
        let lambda = eig.eigenvalues[k];
        let root = if lambda < CLAMP_BELOW {
            lambda.max(0.0).sqrt()
        } else {
            lambda.sqrt()
        };
        scaled.column_mut(k).scale_mut(root);
    }
    let root = &scaled * eig.eigenvectors.transpose();
    // Exact symmetry keeps row k of the factor equal to column k.
    let root = (&root + root.transpose()) * 0.5;
    Ok((root, raw))
}

/// One draw of the transmitter-surface vector `f`, the white surface-receiver
/// matrix `G` and its correlated version `G~ = G J^(1/2)`.
///
/// Matrices are stored row-major, `n_r` rows of `n_tot` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub n_r: usize,
    pub n_tot: usize,
    pub f: Vec<Complex64>,
    pub g: Vec<Complex64>,
    pub g_tilde: Vec<Complex64>,
}

impl ChannelRealization {
    /// Builds a realization from explicit parts; `g_tilde` is computed from `g`.
    pub fn from_parts(
        f: Vec<Complex64>,
        g: Vec<Complex64>,
        n_r: usize,
        corr: &CorrelationModel,
    ) -> Result<Self> {
        let n_tot = f.len();
        if n_r == 0 || g.len() != n_r * n_tot || corr.dim() != n_tot {
            return Err(Error::Domain(format!(
                "inconsistent channel dimensions: f {n_tot}, G {}, n_r {n_r}, J {}",
                g.len(),
                corr.dim()
            )));
        }
        let g_tilde = correlate(&g, n_r, n_tot, corr);
        Ok(Self {
            n_r,
            n_tot,
            f,
            g,
            g_tilde,
        })
    }

    /// Row `ell` of `G~`.
    pub fn g_tilde_row(&self, ell: usize) -> &[Complex64] {
        &self.g_tilde[ell * self.n_tot..(ell + 1) * self.n_tot]
    }
}

/// Draws `f` then `G` with i.i.d. CN(0, 1) entries and correlates `G`.
pub fn sample_channels<R: Rng + ?Sized>(
    rng: &mut R,
    geom: &FrisGeometry,
    n_r: usize,
    corr: &CorrelationModel,
) -> Result<ChannelRealization> {
    if n_r == 0 {
        return Err(Error::Domain("need at least one receive antenna".into()));
    }
    let n_tot = geom.n_tot();
    if corr.dim() != n_tot {
        return Err(Error::Domain(format!(
            "correlation model is {}x{0}, geometry has {n_tot} elements",
            corr.dim()
        )));
    }
    let f = draw_cn(rng, n_tot);
    let g = draw_cn(rng, n_r * n_tot);
    ChannelRealization::from_parts(f, g, n_r, corr)
}

/// Reusable sampler drawing `G~ = W diag(sqrt(l)) U^T` from the eigenpairs
/// of `J` whose eigenvalue exceeds `rel_tol * max`.
///
/// `W` is `n_r x rank` with i.i.d. CN(0, 1) entries, so the draw has the
/// distribution of `G J^(1/2)` up to the discarded spectrum. Realizations it
/// produces carry `W` in their `g` field.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    n_r: usize,
    n_tot: usize,
    rank: usize,
    // rank x n_tot; empty for the identity model.
    factor: DMatrix<f64>,
    identity: bool,
}

impl ChannelSampler {
    pub fn new(corr: &CorrelationModel, n_r: usize, rel_tol: f64) -> Result<Self> {
        if n_r == 0 {
            return Err(Error::Domain("need at least one receive antenna".into()));
        }
        let n_tot = corr.dim();
        if corr.identity {
            return Ok(Self {
                n_r,
                n_tot,
                rank: n_tot,
                factor: DMatrix::zeros(0, 0),
                identity: true,
            });
        }
        let sym = (&corr.j_matrix + corr.j_matrix.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let mut keep: Vec<usize> = (0..n_tot)
            .filter(|&k| eig.eigenvalues[k] > rel_tol * top)
            .collect();
        keep.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let factor = DMatrix::from_fn(keep.len(), n_tot, |r, m| {
            eig.eigenvalues[keep[r]].sqrt() * eig.eigenvectors[(m, keep[r])]
        });
        Ok(Self {
            n_r,
            n_tot,
            rank: keep.len(),
            factor,
            identity: false,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Empty realization shaped for this sampler.
    pub fn buffer(&self) -> ChannelRealization {
        let zero = Complex64::new(0.0, 0.0);
        ChannelRealization {
            n_r: self.n_r,
            n_tot: self.n_tot,
            f: vec![zero; self.n_tot],
            g: vec![zero; self.n_r * self.rank],
            g_tilde: vec![zero; self.n_r * self.n_tot],
        }
    }

    /// Draws `f` then `W` into `out`, which must come from [`ChannelSampler::buffer`].
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut ChannelRealization) {
        fill_cn(rng, &mut out.f);
        fill_cn(rng, &mut out.g);
        if self.identity {
            out.g_tilde.copy_from_slice(&out.g);
            return;
        }
        // Stack Re/Im of W as rows 2l and 2l+1 and apply the factor in one product.
        let w = DMatrix::from_fn(2 * self.n_r, self.rank, |r, k| {
            let z = out.g[(r / 2) * self.rank + k];
            if r % 2 == 0 {
                z.re
            } else {
                z.im
            }
        });
        let mut prod = DMatrix::zeros(2 * self.n_r, self.n_tot);
        prod.gemm(1.0, &w, &self.factor, 0.0);
        for (m, col) in prod.column_iter().enumerate() {
            for ell in 0..self.n_r {
                out.g_tilde[ell * self.n_tot + m] = Complex64::new(col[2 * ell], col[2 * ell + 1]);
            }
        }
    }
}

fn fill_cn<R: Rng + ?Sized>(rng: &mut R, out: &mut [Complex64]) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for v in out {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v = Complex64::new(s * re, s * im);
    }
}

/// `n` i.i.d. CN(0, 1) samples, each from two N(0, 1/2) draws.
pub fn draw_cn<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    fill_cn(rng, &mut v);
    v
}

fn correlate(g: &[Complex64], n_r: usize, n_tot: usize, corr: &CorrelationModel) -> Vec<Complex64> {
    if corr.identity {
        return g.to_vec();
    }
    // g~[l, :] = sum_k g[l, k] * S[k, :], accumulated row by row of S so the
    // inner loop is a contiguous real axpy.
    let mut re = vec![0.0; n_r * n_tot];
    let mut im = vec![0.0; n_r * n_tot];
    for k in 0..n_tot {
        let srow = &corr.sqrt_rows[k * n_tot..(k + 1) * n_tot];
        for ell in 0..n_r {
            let coeff = g[ell * n_tot + k];
            let out_re = &mut re[ell * n_tot..(ell + 1) * n_tot];
            for (o, &s) in out_re.iter_mut().zip(srow) {
                *o += coeff.re * s;
            }
            let out_im = &mut im[ell * n_tot..(ell + 1) * n_tot];
            for (o, &s) in out_im.iter_mut().zip(srow) {
                *o += coeff.im * s;
            }
        }
    }
    re.into_iter()
        .zip(im)
        .map(|(r, i)| Complex64::new(r, i))
        .collect()
}
