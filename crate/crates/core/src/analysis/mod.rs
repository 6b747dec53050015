//! Threshold-model post-selection statistics, distance MGFs, pairwise error
//! probabilities and the union bound on the bit error rate.

mod bound;
mod mgf;
mod ordering;
mod stats;

pub use bound::{union_bound_ber, ErrorEvent};
pub use mgf::{
    case1_form, gaussian_quadratic_mgf, mgf_case1, mgf_case2, upep, GaussianQuadraticForm,
    UpepMethod,
};
pub use ordering::{
    event_difference, event_gram, majorizes, verify_identity_lower_bound, OrderingPoint,
    OrderingReport,
};
pub use stats::{
    aggregate, continuous_stats, double_rayleigh_pdf, double_rayleigh_tail, projection_moments,
    projection_tail, quantized_stats, truncated_moments, EffectiveStats, ProjectionMoments,
    DOUBLE_RAYLEIGH_MEAN,
};

use crate::fris::PhaseMode;
use crate::modem::FrameConfig;
use crate::Result;

/// Statistics for a frame configuration on a surface of `n_tot` elements.
pub fn frame_stats(frame: &FrameConfig, n_tot: usize) -> Result<EffectiveStats> {
    if frame.k_sel > n_tot || n_tot == 0 {
        return Err(crate::Error::Config("K_sel exceeds N_tot".into()));
    }
    let p = frame.k_sel as f64 / n_tot as f64;
    match frame.phase_mode {
        PhaseMode::Continuous => continuous_stats(p),
        PhaseMode::Quantized { bits } => quantized_stats(p, bits),
    }
}
