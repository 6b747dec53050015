use num_complex::Complex64;

use super::{mgf_case1, mgf_case2, upep, EffectiveStats, UpepMethod};
use crate::modem::{FrameConfig, Modem};
use crate::{Error, Result};

/// Pairwise codeword error `(i, x) -> (i_hat, x_hat)` with its bit distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEvent {
    pub i: usize,
    pub i_hat: usize,
    pub x: Complex64,
    pub x_hat: Complex64,
    pub hamming: u32,
}

impl ErrorEvent {
    /// Event between two constellation positions under the modem labelling.
    pub fn new(modem: &Modem, i: usize, k: usize, i_hat: usize, k_hat: usize) -> Result<Self> {
        let (n_r, m) = (modem.frame.n_r, modem.frame.m);
        if i >= n_r || i_hat >= n_r || k >= m || k_hat >= m {
            return Err(Error::Domain("error event index out of range".into()));
        }
        if (i, k) == (i_hat, k_hat) {
            return Err(Error::Domain("error event needs distinct codewords".into()));
        }
        let hamming = (modem.word_of(i, k) ^ modem.word_of(i_hat, k_hat)).count_ones();
        Ok(Self {
            i,
            i_hat,
            x: modem.constellation.point(k),
            x_hat: modem.constellation.point(k_hat),
            hamming,
        })
    }

    pub fn upep(
        &self,
        stats: &EffectiveStats,
        k_sel: usize,
        n_r: usize,
        n0: f64,
        method: UpepMethod,
    ) -> Result<f64> {
        if self.i == self.i_hat {
            upep(
                |s| mgf_case2(s, self.x, self.x_hat, stats, k_sel, n_r),
                n0,
                method,
            )
        } else {
            upep(
                |s| mgf_case1(s, self.x, self.x_hat, stats, k_sel, n_r),
                n0,
                method,
            )
        }
    }
}

/// Hamming-weighted union bound on the bit error rate.
///
/// The pairwise probabilities depend on the antennas only through whether
/// `i == i_hat`, so the index sums collapse to closed-form bit counts.
pub fn union_bound_ber(
    frame: &FrameConfig,
    stats: &EffectiveStats,
    n0: f64,
    method: UpepMethod,
) -> Result<f64> {
    let modem = Modem::new(*frame)?;
    let c = &modem.constellation;
    let (n_r, m) = (frame.n_r, frame.m);
    let b = frame.bits_per_frame() as f64;
    let b1 = frame.index_bits() as f64;
    let nrf = n_r as f64;
    // Sum over ordered i != i_hat of popcount(i ^ i_hat).
    let index_bits_total = nrf * b1 * nrf / 2.0;
    let index_pairs = nrf * (nrf - 1.0);

    let mut total = 0.0;
    for k in 0..m {
        for kh in 0..m {
            let (x, xh) = (c.point(k), c.point(kh));
            let h = (c.label(k) ^ c.label(kh)).count_ones() as f64;
            if n_r > 1 {
                let p1 = upep(|s| mgf_case1(s, x, xh, stats, frame.k_sel, n_r), n0, method)?;
                total += p1 * (index_bits_total + index_pairs * h);
            }
            if k != kh {
                let p2 = upep(|s| mgf_case2(s, x, xh, stats, frame.k_sel, n_r), n0, method)?;
                total += p2 * nrf * h;
            }
        }
    }
    Ok((total / (m as f64 * nrf * b)).min(1.0))
}
