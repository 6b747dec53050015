//! Per-mode surface configuration: cascaded coefficients, strongest-link
//! selection, phase alignment and Q-bit phase quantization.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::{Error, Result};

/// Phase control available at the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    Continuous,
    /// Mid-rise alphabet with `2^bits` levels.
    Quantized {
        bits: u32,
    },
}

impl PhaseMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PhaseMode::Quantized { bits } if bits == 0 || bits > 30 => Err(Error::Config(format!(
                "phase quantization needs 1..=30 bits, got {bits}"
            ))),
            _ => Ok(()),
        }
    }

    /// Quantization step `2 pi / 2^bits`, `None` for continuous control.
    pub fn step(&self) -> Option<f64> {
        match *self {
            PhaseMode::Continuous => None,
            PhaseMode::Quantized { bits } => Some(TAU / (1u64 << bits) as f64),
        }
    }
}

/// What the quantized design ranks elements by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionMetric {
    /// In-phase projection `Re{c e^{j theta_Q}}` after quantization.
    #[default]
    InPhase,
    /// Raw cascaded magnitude `|c|`, ignoring the quantization loss.
    Magnitude,
}

/// Selection, phases and reflection coefficients of one beamforming mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionConfig {
    pub selection: Vec<bool>,
    pub phases: Vec<f64>,
    pub reflection: Vec<Complex64>,
    active: Vec<usize>,
}

impl ReflectionConfig {
    /// Builds `v_n = s_n e^{j theta_n}`; unselected phases are forced to zero.
    pub fn from_parts(selection: Vec<bool>, mut phases: Vec<f64>) -> Result<Self> {
        if selection.len() != phases.len() {
            return Err(Error::Domain(
                "selection and phase vectors differ in length".into(),
            ));
        }
        let mut reflection = vec![Complex64::new(0.0, 0.0); selection.len()];
        let mut active = Vec::new();
        for (n, &on) in selection.iter().enumerate() {
            if on {
                reflection[n] = Complex64::from_polar(1.0, phases[n]);
                active.push(n);
            } else {
                phases[n] = 0.0;
            }
        }
        Ok(Self {
            selection,
            phases,
            reflection,
            active,
        })
    }

    /// Indices of active elements in ascending order.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn len(&self) -> usize {
        self.selection.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selection.is_empty()
    }
}

/// `c_{i,n} = g~_{i,n} f_n` for every element.
pub fn cascaded_coeffs(chan: &ChannelRealization, i: usize) -> Result<Vec<Complex64>> {
    check_antenna(chan, i)?;
    Ok(chan
        .g_tilde_row(i)
        .iter()
        .zip(&chan.f)
        .map(|(g, f)| g * f)
        .collect())
}

fn check_antenna(chan: &ChannelRealization, i: usize) -> Result<()> {
    if i >= chan.n_r {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: chan.n_r,
        });
    }
    Ok(())
}

/// Indices of the `k` largest metric values, ties to the smaller index,
/// returned in ascending order.
pub fn select_topk(metric: &[f64], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > metric.len() {
        return Err(Error::Domain(format!(
            "cannot select {k} of {} elements",
            metric.len()
        )));
    }
    let mut idx: Vec<usize> = (0..metric.len()).collect();
    let rank =
        |a: &usize, b: &usize| -> Ordering { metric[*b].total_cmp(&metric[*a]).then(a.cmp(b)) };
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, rank);
        idx.truncate(k);
    }
    idx.sort_unstable();
    Ok(idx)
}

/// Strongest-`k` links by cascaded magnitude.
pub fn select_topk_continuous(c: &[Complex64], k: usize) -> Result<Vec<usize>> {
    let power: Vec<f64> = c.iter().map(|z| z.norm_sqr()).collect();
    select_topk(&power, k)
}

/// Continuous alignment phase `(-arg c) mod 2 pi`; zero for `c = 0`.
pub fn alignment_phase(c: Complex64) -> f64 {
    wrap_phase(-c.arg())
}

fn wrap_phase(theta: f64) -> f64 {
    let t = if (-TAU..0.0).contains(&theta) && theta != -TAU {
        theta + TAU
    } else if (0.0..TAU).contains(&theta) {
        theta
    } else {
        theta.rem_euclid(TAU)
    };
    // rem_euclid can round up to exactly 2 pi for tiny negative inputs.
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Alignment phases for the selected elements, zero elsewhere.
pub fn align_phases(c: &[Complex64], selected: &[usize]) -> Result<Vec<f64>> {
    let mut phases = vec![0.0; c.len()];
    for &n in selected {
        if n >= c.len() {
            return Err(Error::IndexOutOfRange {
                index: n,
                len: c.len(),
            });
        }
        phases[n] = alignment_phase(c[n]);
    }
    Ok(phases)
}

fn quantizer_cell(theta: f64, step: f64, levels: u64) -> u64 {
    let cell = (wrap_phase(theta) / step).floor() as u64;
    cell.min(levels - 1)
}

// Quantizer cell of the alignment phase of `z`. Up to three bits the cell is
// read off sign and octant tests on `conj(z)`, which avoids atan2.
fn alignment_cell(z: Complex64, bits: u32, step: f64, levels: u64) -> u64 {
    if bits > 3 {
        return quantizer_cell(alignment_phase(z), step, levels);
    }
    let mut w = z.conj();
    let mut cell = 0;
    if w.im < 0.0 || (w.im == 0.0 && w.re < 0.0) {
        cell += levels / 2;
        w = -w;
    }
    if bits >= 2 && (w.re < 0.0 || (w.re == 0.0 && w.im > 0.0)) {
        cell += levels / 4;
        w = Complex64::new(w.im, -w.re);
    }
    if bits == 3 && w.im >= w.re && w != Complex64::new(0.0, 0.0) {
        cell += 1;
    }
    cell
}

/// Mid-rise phase quantizer: `(floor((theta mod 2 pi)/D) D + D/2) mod 2 pi`
/// with `D = 2 pi / 2^bits`.
pub fn quantize_phase(theta: f64, bits: u32) -> f64 {
    let levels = 1u64 << bits;
    let step = TAU / levels as f64;
    let cell = quantizer_cell(theta, step, levels);
    wrap_phase((cell as f64 + 0.5) * step)
}

/// Configures mode `i` with `k` active elements.
///
/// Quantized modes rank elements by their in-phase projection.
pub fn configure_mode(
    chan: &ChannelRealization,
    i: usize,
    k: usize,
    mode: PhaseMode,
) -> Result<ReflectionConfig> {
    configure_mode_with(chan, i, k, mode, SelectionMetric::InPhase)
}

pub fn configure_mode_with(
    chan: &ChannelRealization,
    i: usize,
    k: usize,
    mode: PhaseMode,
    metric: SelectionMetric,
) -> Result<ReflectionConfig> {
    mode.validate()?;
    let c = cascaded_coeffs(chan, i)?;
    let n = c.len();
    let (selected, quantized) = match mode {
        PhaseMode::Continuous => (select_topk_continuous(&c, k)?, None),
        PhaseMode::Quantized { bits } => {
            let levels = 1u64 << bits;
            let step = TAU / levels as f64;
            let phases: Vec<f64> = c
                .iter()
                .map(|&z| (alignment_cell(z, bits, step, levels) as f64 + 0.5) * step)
                .collect();
            let selected = match metric {
                SelectionMetric::InPhase => {
                    let a: Vec<f64> = c
                        .iter()
                        .zip(&phases)
                        .map(|(z, &t)| (z * Complex64::from_polar(1.0, t)).re)
                        .collect();
                    select_topk(&a, k)?
                }
                SelectionMetric::Magnitude => select_topk_continuous(&c, k)?,
            };
            (selected, Some(phases))
        }
    };
    let mut selection = vec![false; n];
    let mut phases = vec![0.0; n];
    for &s in &selected {
        selection[s] = true;
        phases[s] = match &quantized {
            Some(q) => q[s],
            None => alignment_phase(c[s]),
        };
    }
    ReflectionConfig::from_parts(selection, phases)
}

/// `H_ell = sum_n g~_{ell,n} f_n v_n`.
pub fn effective_gain(
    chan: &ChannelRealization,
    config: &ReflectionConfig,
    ell: usize,
) -> Result<Complex64> {
    check_antenna(chan, ell)?;
    if config.len() != chan.n_tot {
        return Err(Error::Domain(
            "configuration length does not match the surface".into(),
        ));
    }
    let row = chan.g_tilde_row(ell);
    Ok(config
        .active()
        .iter()
        .map(|&n| row[n] * chan.f[n] * config.reflection[n])
        .sum())
}

/// Effective gain of every mode at every antenna for one channel draw.
#[derive(Debug, Clone)]
pub struct ModeBank {
    n_r: usize,
    // gains[i * n_r + ell] = H_ell^(i)
    gains: Vec<Complex64>,
}

// Active elements and their reflection coefficients for one mode, without
// materialising the full-length configuration vectors.
fn design_mode(
    c: &[Complex64],
    k: usize,
    mode: PhaseMode,
    metric: SelectionMetric,
    alphabet: &[Complex64],
    work: &mut Vec<f64>,
    rotors: &mut Vec<Complex64>,
) -> Result<Vec<(usize, Complex64)>> {
    work.clear();
    match mode {
        PhaseMode::Continuous => {
            work.extend(c.iter().map(|z| z.norm_sqr()));
            let selected = select_topk(work, k)?;
            Ok(selected
                .into_iter()
                .map(|n| {
                    let z = c[n];
                    let r = z.norm();
                    (
                        n,
                        if r > 0.0 {
                            z.conj() / r
                        } else {
                            Complex64::new(1.0, 0.0)
                        },
                    )
                })
                .collect())
        }
        PhaseMode::Quantized { bits } => {
            let levels = 1u64 << bits;
            let step = TAU / levels as f64;
            rotors.clear();
            rotors.extend(c.iter().map(|&z| {
                let cell = alignment_cell(z, bits, step, levels) as usize;
                match alphabet.get(cell) {
                    Some(&v) => v,
                    None => Complex64::from_polar(1.0, (cell as f64 + 0.5) * step),
                }
            }));
            match metric {
                SelectionMetric::InPhase => {
                    work.extend(c.iter().zip(rotors.iter()).map(|(z, v)| (z * v).re))
                }
                SelectionMetric::Magnitude => work.extend(c.iter().map(|z| z.norm_sqr())),
            }
            let selected = select_topk(work, k)?;
            Ok(selected.into_iter().map(|n| (n, rotors[n])).collect())
        }
    }
}

impl ModeBank {
    pub fn new(
        chan: &ChannelRealization,
        k: usize,
        mode: PhaseMode,
        metric: SelectionMetric,
    ) -> Result<Self> {
        mode.validate()?;
        let n_r = chan.n_r;
        let alphabet: Vec<Complex64> = match mode {
            PhaseMode::Quantized { bits } if bits <= 10 => {
                let step = TAU / (1u64 << bits) as f64;
                (0..1usize << bits)
                    .map(|q| Complex64::from_polar(1.0, wrap_phase((q as f64 + 0.5) * step)))
                    .collect()
            }
            _ => Vec::new(),
        };
        let mut c = Vec::with_capacity(chan.n_tot);
        let mut work = Vec::with_capacity(chan.n_tot);
        let mut rotors = Vec::with_capacity(chan.n_tot);
        let mut gains = Vec::with_capacity(n_r * n_r);
        for i in 0..n_r {
            c.clear();
            c.extend(chan.g_tilde_row(i).iter().zip(&chan.f).map(|(g, f)| g * f));
            let weights: Vec<(usize, Complex64)> =
                design_mode(&c, k, mode, metric, &alphabet, &mut work, &mut rotors)?
                    .into_iter()
                    .map(|(n, v)| (n, chan.f[n] * v))
                    .collect();
            for ell in 0..n_r {
                let row = chan.g_tilde_row(ell);
                gains.push(weights.iter().map(|&(n, w)| row[n] * w).sum());
            }
        }
        Ok(Self { n_r, gains })
    }

    pub fn from_configs(chan: &ChannelRealization, configs: &[ReflectionConfig]) -> Result<Self> {
        let n_r = chan.n_r;
        if configs.len() != n_r {
            return Err(Error::Domain(format!(
                "need {n_r} mode configurations, got {}",
                configs.len()
            )));
        }
        let mut gains = Vec::with_capacity(n_r * n_r);
        let mut weights = Vec::new();
        for config in configs {
            if config.len() != chan.n_tot {
                return Err(Error::Domain(
                    "configuration length does not match the surface".into(),
                ));
            }
            weights.clear();
            weights.extend(
                config
                    .active()
                    .iter()
                    .map(|&n| chan.f[n] * config.reflection[n]),
            );
            for ell in 0..n_r {
                let row = chan.g_tilde_row(ell);
                let h: Complex64 = config
                    .active()
                    .iter()
                    .zip(&weights)
                    .map(|(&n, w)| row[n] * w)
                    .sum();
                gains.push(h);
            }
        }
        Ok(Self { n_r, gains })
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    /// Received noiseless vector of mode `i` for unit symbol, `G~ Phi_i f`.
    pub fn model(&self, i: usize) -> &[Complex64] {
        &self.gains[i * self.n_r..(i + 1) * self.n_r]
    }

    /// `H_ell^(i)`.
    pub fn gain(&self, i: usize, ell: usize) -> Complex64 {
        self.gains[i * self.n_r + ell]
    }
}
