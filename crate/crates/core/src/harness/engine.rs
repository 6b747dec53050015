//! Chunked Monte Carlo kernel shared by the sweep entry points.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{ChannelRealization, ChannelSampler};
use crate::fris::{ModeBank, PhaseMode, SelectionMetric};
use crate::modem::{add_noise, Detector, Modem};
use crate::{Error, Result};

/// Frames per scheduling unit; stopping decisions happen on chunk boundaries.
pub const CHUNK_FRAMES: u64 = 512;

/// Eigenvalues of `J` below this fraction of the largest are dropped.
pub const RANK_TOLERANCE: f64 = 1e-12;

// Words of keystream reserved per frame.
const FRAME_WORDS: u128 = 1 << 32;

pub(crate) struct ArmPlan {
    pub modem: Modem,
    pub detector: Detector,
    pub n0: Vec<f64>,
    // Index into the distinct mode-bank designs.
    pub design: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Design {
    k_sel: usize,
    phase: PhaseMode,
    metric: SelectionMetric,
}

pub(crate) struct Plan {
    pub sampler: ChannelSampler,
    pub n_r: usize,
    pub arms: Vec<ArmPlan>,
    designs: Vec<Design>,
    pub seed: u64,
    pub stream: u64,
}

impl Plan {
    pub fn new(
        sampler: ChannelSampler,
        n_r: usize,
        arms: Vec<(Modem, Detector, Vec<f64>)>,
        seed: u64,
        stream: u64,
    ) -> Result<Self> {
        let mut designs: Vec<Design> = Vec::new();
        let mut plans = Vec::with_capacity(arms.len());
        for (modem, detector, n0) in arms {
            if modem.frame.n_r != n_r {
                return Err(Error::Config(
                    "all arms of a paired run must share n_r".into(),
                ));
            }
            let d = Design {
                k_sel: modem.frame.k_sel,
                phase: modem.frame.phase_mode,
                metric: modem.frame.selection,
            };
            let design = match designs.iter().position(|x| *x == d) {
                Some(k) => k,
                None => {
                    designs.push(d);
                    designs.len() - 1
                }
            };
            plans.push(ArmPlan {
                modem,
                detector,
                n0,
                design,
            });
        }
        Ok(Self {
            sampler,
            n_r,
            arms: plans,
            designs,
            seed,
            stream,
        })
    }
}

/// Bit-error and frame tallies, `errors[arm][snr]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Tally {
    pub frames: u64,
    pub errors: Vec<Vec<u64>>,
}

impl Tally {
    fn zeros(plan: &Plan) -> Self {
        Self {
            frames: 0,
            errors: plan.arms.iter().map(|a| vec![0; a.n0.len()]).collect(),
        }
    }

    fn absorb(&mut self, other: &Tally) {
        self.frames += other.frames;
        for (a, b) in self.errors.iter_mut().zip(&other.errors) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

struct Scratch {
    chan: ChannelRealization,
    noise: Vec<Complex64>,
    y: Vec<Complex64>,
    banks: Vec<Option<ModeBank>>,
}

fn frame_rng(plan: &Plan, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    rng.set_stream(plan.stream);
    rng.set_word_pos(frame as u128 * FRAME_WORDS);
    rng
}

fn run_frame(plan: &Plan, frame: u64, s: &mut Scratch, tally: &mut Tally) -> Result<()> {
    let mut rng = frame_rng(plan, frame);
    plan.sampler.sample_into(&mut rng, &mut s.chan);
    let word_raw: u32 = rng.random();
    s.noise.fill(Complex64::new(0.0, 0.0));
    add_noise(&mut s.noise, 1.0, &mut rng);

    for b in s.banks.iter_mut() {
        *b = None;
    }
    for (arm, errs) in plan.arms.iter().zip(tally.errors.iter_mut()) {
        if s.banks[arm.design].is_none() {
            let d = plan.designs[arm.design];
            s.banks[arm.design] = Some(ModeBank::new(&s.chan, d.k_sel, d.phase, d.metric)?);
        }
        let bank = s.banks[arm.design].as_ref().expect("bank built above");
        let modem = &arm.modem;
        let word = word_raw & (u32::MAX >> (32 - modem.frame.bits_per_frame()));
        let (i, k) = modem.map_word(word);
        let x = modem.constellation.point(k);
        let model = bank.model(i);
        for (e, &n0) in errs.iter_mut().zip(&arm.n0) {
            let sd = n0.sqrt();
            for ((y, h), w) in s.y.iter_mut().zip(model).zip(&s.noise) {
                *y = h * x + w * sd;
            }
            let det = arm.detector.detect(&s.y, bank, &modem.constellation)?;
            let decided = modem.word_of(det.antenna_index, det.symbol_index);
            *e += (word ^ decided).count_ones() as u64;
        }
    }
    tally.frames += 1;
    Ok(())
}

fn run_chunk(plan: &Plan, chunk: u64, frames_cap: u64) -> Result<Tally> {
    let mut s = Scratch {
        chan: plan.sampler.buffer(),
        noise: vec![Complex64::new(0.0, 0.0); plan.n_r],
        y: vec![Complex64::new(0.0, 0.0); plan.n_r],
        banks: vec![None; plan.designs.len()],
    };
    let mut tally = Tally::zeros(plan);
    let start = chunk * CHUNK_FRAMES;
    let end = (start + CHUNK_FRAMES).min(frames_cap);
    for frame in start..end {
        run_frame(plan, frame, &mut s, &mut tally)?;
    }
    Ok(tally)
}

/// Stopping rule evaluated on the cumulative tally at chunk boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct StopRule {
    pub min_frames: u64,
    pub max_frames: u64,
    pub min_bit_errors: u64,
}

impl StopRule {
    fn done(&self, t: &Tally) -> bool {
        if t.frames >= self.max_frames {
            return true;
        }
        t.frames >= self.min_frames && t.errors.iter().flatten().all(|&e| e >= self.min_bit_errors)
    }
}

/// Runs chunks in index order, `batch` at a time in parallel, and stops at
/// the first chunk boundary that satisfies `rule`. Chunks computed past that
/// boundary are discarded, so the tally does not depend on `batch`.
pub(crate) fn run(plan: &Plan, rule: StopRule, batch: usize) -> Result<Tally> {
    let mut total = Tally::zeros(plan);
    let chunks_cap = rule.max_frames.div_ceil(CHUNK_FRAMES);
    let mut next = 0u64;
    while next < chunks_cap {
        let hi = (next + batch.max(1) as u64).min(chunks_cap);
        let parts: Vec<Result<Tally>> = (next..hi)
            .into_par_iter()
            .map(|c| run_chunk(plan, c, rule.max_frames))
            .collect();
        for part in parts {
            total.absorb(&part?);
            if rule.done(&total) {
                return Ok(total);
            }
        }
        next = hi;
    }
    Ok(total)
}
