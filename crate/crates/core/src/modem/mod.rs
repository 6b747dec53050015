//! Bit mapping, constellations, received-signal synthesis and detection.

mod constellation;
mod detect;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub use constellation::{Constellation, Modulation};
pub use detect::{detect_greedy, detect_list, detect_ml, DetectionResult, Detector};

use crate::channel::ChannelRealization;
use crate::fris::{effective_gain, PhaseMode, ReflectionConfig, SelectionMetric};
use crate::{Error, Result};

/// Per-frame transmission parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameConfig {
    pub n_r: usize,
    /// Constellation order; 1 selects space-shift keying.
    pub m: usize,
    pub k_sel: usize,
    pub phase_mode: PhaseMode,
    pub list_size: usize,
    pub modulation: Modulation,
    pub selection: SelectionMetric,
}

impl FrameConfig {
    /// Continuous-phase ML defaults with `list_size = n_r`.
    pub fn new(n_r: usize, m: usize, k_sel: usize) -> Self {
        Self {
            n_r,
            m,
            k_sel,
            phase_mode: PhaseMode::Continuous,
            list_size: n_r,
            modulation: Modulation::Auto,
            selection: SelectionMetric::InPhase,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_r == 0 || !self.n_r.is_power_of_two() {
            return Err(Error::Config(format!(
                "n_r must be a power of two, got {}",
                self.n_r
            )));
        }
        if self.m == 0 || !self.m.is_power_of_two() {
            return Err(Error::Config(format!(
                "m must be a power of two, got {}",
                self.m
            )));
        }
        if self.n_r * self.m < 2 {
            return Err(Error::Config("a frame must carry at least one bit".into()));
        }
        if self.bits_per_frame() > 32 {
            return Err(Error::Config("more than 32 bits per frame".into()));
        }
        if self.k_sel == 0 {
            return Err(Error::Config("k_sel must be positive".into()));
        }
        if self.list_size == 0 || self.list_size > self.n_r {
            return Err(Error::Config(format!(
                "list_size must lie in 1..={}",
                self.n_r
            )));
        }
        Constellation::new(self.m, self.modulation)?;
        self.phase_mode.validate()
    }

    /// Antenna-index bits.
    pub fn index_bits(&self) -> u32 {
        self.n_r.trailing_zeros()
    }

    /// Symbol bits.
    pub fn symbol_bits(&self) -> u32 {
        self.m.trailing_zeros()
    }

    pub fn bits_per_frame(&self) -> u32 {
        self.index_bits() + self.symbol_bits()
    }
}

/// Frame configuration bound to its constellation.
#[derive(Debug, Clone)]
pub struct Modem {
    pub frame: FrameConfig,
    pub constellation: Constellation,
}

impl Modem {
    pub fn new(frame: FrameConfig) -> Result<Self> {
        frame.validate()?;
        let constellation = Constellation::new(frame.m, frame.modulation)?;
        Ok(Self {
            frame,
            constellation,
        })
    }

    /// Splits a `B`-bit word (first bit most significant) into the antenna
    /// index and the constellation position.
    pub fn map_word(&self, word: u32) -> (usize, usize) {
        let b2 = self.frame.symbol_bits();
        let antenna = (word >> b2) as usize;
        let label = word & ((1u32 << b2) - 1);
        (antenna, self.constellation.index_of_label(label))
    }

    /// Inverse of [`Modem::map_word`].
    pub fn word_of(&self, antenna: usize, symbol: usize) -> u32 {
        ((antenna as u32) << self.frame.symbol_bits()) | self.constellation.label(symbol)
    }

    pub fn map_bits(&self, bits: &[bool]) -> Result<(usize, usize)> {
        let b = self.frame.bits_per_frame() as usize;
        if bits.len() != b {
            return Err(Error::Domain(format!(
                "expected {b} bits, got {}",
                bits.len()
            )));
        }
        let word = bits.iter().fold(0u32, |w, &bit| (w << 1) | bit as u32);
        Ok(self.map_word(word))
    }

    pub fn bits_of(&self, antenna: usize, symbol: usize) -> Vec<bool> {
        let b = self.frame.bits_per_frame();
        let word = self.word_of(antenna, symbol);
        (0..b).rev().map(|k| (word >> k) & 1 == 1).collect()
    }
}

/// Maps a bit block to `(antenna index, symbol)`.
pub fn map_bits(bits: &[bool], frame: &FrameConfig) -> Result<(usize, Complex64)> {
    let modem = Modem::new(*frame)?;
    let (i, k) = modem.map_bits(bits)?;
    Ok((i, modem.constellation.point(k)))
}

/// Adds circularly-symmetric Gaussian noise of variance `n0` in place.
pub fn add_noise<R: Rng + ?Sized>(y: &mut [Complex64], n0: f64, rng: &mut R) {
    if n0 == 0.0 {
        return;
    }
    let s = (0.5 * n0).sqrt();
    for v in y {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v += Complex64::new(s * re, s * im);
    }
}

/// `y = G~ diag(v) f x + n`.
pub fn synthesize_rx<R: Rng + ?Sized>(
    chan: &ChannelRealization,
    config: &ReflectionConfig,
    x: Complex64,
    n0: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if !n0.is_finite() || n0 < 0.0 {
        return Err(Error::Domain(format!(
            "noise variance must be finite and non-negative, got {n0}"
        )));
    }
    let mut y = (0..chan.n_r)
        .map(|ell| effective_gain(chan, config, ell).map(|h| h * x))
        .collect::<Result<Vec<_>>>()?;
    add_noise(&mut y, n0, rng);
    Ok(y)
}
