//! Configuration, seeded Monte Carlo sweeps, analytical overlay, CSV output
//! and figure presets.

mod config;
mod csv_io;
mod engine;
mod presets;

use std::time::{Duration, Instant};

use crate::analysis::{frame_stats, union_bound_ber, UpepMethod};
use crate::channel::{build_jakes_correlation, ChannelSampler, CorrelationModel, FrisGeometry};
use crate::modem::{Detector, FrameConfig, Modem};
use crate::{Error, Result};

pub use config::parse_config;
pub use csv_io::{format_sig6, parse_csv, read_csv, write_csv, write_csv_to, CsvRow, CSV_HEADER};
pub use engine::{CHUNK_FRAMES, RANK_TOLERANCE};
pub use presets::{list_presets, preset};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DetectorKind {
    #[default]
    Ml,
    Greedy,
    /// Top-L list detection with `FrameConfig::list_size`.
    List,
}

impl DetectorKind {
    pub fn detector(&self, frame: &FrameConfig) -> Detector {
        match self {
            DetectorKind::Ml => Detector::Ml,
            DetectorKind::Greedy => Detector::Greedy,
            DetectorKind::List => Detector::List(frame.list_size),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrelationKind {
    #[default]
    Jakes,
    Identity,
}

impl CorrelationKind {
    pub fn model(&self, geometry: &FrisGeometry) -> Result<CorrelationModel> {
        match self {
            CorrelationKind::Jakes => build_jakes_correlation(geometry),
            CorrelationKind::Identity => Ok(CorrelationModel::identity(geometry.n_tot())),
        }
    }
}

/// A full simulation request.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub geometry: FrisGeometry,
    pub frame: FrameConfig,
    /// `E_s/N0` points in dB, with `E_s = 1`.
    pub snr_db: Vec<f64>,
    pub min_frames: u64,
    pub min_bit_errors: u64,
    /// Hard cap on frames per SNR point.
    pub max_frames: u64,
    pub seed: u64,
    pub detector: DetectorKind,
    pub correlation: CorrelationKind,
    /// Reuse each frame's channel, bits and unit noise across all SNR points.
    pub paired: bool,
}

pub const DEFAULT_MIN_FRAMES: u64 = 1000;
pub const DEFAULT_MIN_BIT_ERRORS: u64 = 200;
pub const DEFAULT_MAX_FRAMES: u64 = 10_000_000;

impl SweepSpec {
    /// Spec with the documented defaults: ML detection, Jakes correlation,
    /// 200 bit errors, 1000 to 10^7 frames, seed 0.
    pub fn new(geometry: FrisGeometry, frame: FrameConfig, snr_db: Vec<f64>) -> Self {
        Self {
            geometry,
            frame,
            snr_db,
            min_frames: DEFAULT_MIN_FRAMES,
            min_bit_errors: DEFAULT_MIN_BIT_ERRORS,
            max_frames: DEFAULT_MAX_FRAMES,
            seed: 0,
            detector: DetectorKind::Ml,
            correlation: CorrelationKind::Jakes,
            paired: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.frame.validate()?;
        if self.frame.k_sel > self.geometry.n_tot() {
            return Err(Error::Config(format!(
                "K_sel exceeds N_tot ({} > {})",
                self.frame.k_sel,
                self.geometry.n_tot()
            )));
        }
        if self.snr_db.is_empty() {
            return Err(Error::Config("snr_db must list at least one point".into()));
        }
        if let Some(bad) = self.snr_db.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!(
                "snr_db contains a non-finite value {bad}"
            )));
        }
        if self.min_frames == 0 {
            return Err(Error::Config("min_frames must be at least 1".into()));
        }
        if self.max_frames < self.min_frames {
            return Err(Error::Config(format!(
                "max_frames ({}) is below min_frames ({})",
                self.max_frames, self.min_frames
            )));
        }
        Ok(())
    }
}

/// Noise variance for `E_s/N0` in dB at unit symbol energy.
pub fn noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Wilson score interval for `errors` out of `trials` at quantile `z`.
pub fn wilson_interval(errors: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (
        (center - half).max(0.0).min(p),
        (center + half).min(1.0).max(p),
    )
}

/// Monte Carlo outcome at one SNR point.
#[derive(Debug, Clone, Copy)]
pub struct SimulatedPoint {
    pub ber: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub bits: u64,
    pub wall_time: Duration,
}

impl PartialEq for SimulatedPoint {
    // Wall time is measurement noise, not part of the result.
    fn eq(&self, o: &Self) -> bool {
        self.ber == o.ber
            && self.ci_lo == o.ci_lo
            && self.ci_hi == o.ci_hi
            && self.frames == o.frames
            && self.bit_errors == o.bit_errors
            && self.bits == o.bits
    }
}

impl SimulatedPoint {
    pub fn from_counts(
        frames: u64,
        bit_errors: u64,
        bits_per_frame: u32,
        wall_time: Duration,
    ) -> Self {
        let bits = frames * bits_per_frame as u64;
        let ber = if bits == 0 {
            0.0
        } else {
            bit_errors as f64 / bits as f64
        };
        let (ci_lo, ci_hi) = wilson_interval(bit_errors, bits, Z95);
        Self {
            ber,
            ci_lo,
            ci_hi,
            frames,
            bit_errors,
            bits,
            wall_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub simulated: Option<SimulatedPoint>,
    pub ber_analytic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

fn run_on_pool<T: Send>(workers: usize, job: impl FnOnce(usize) -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(job(rayon::current_num_threads()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(|| job(workers)))
}

/// Union bound for the sweep's frame at each SNR, computed for `J = I`.
pub fn analytic_curve(spec: &SweepSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let stats = frame_stats(&spec.frame, spec.geometry.n_tot())?;
    spec.snr_db
        .iter()
        .map(|&db| {
            union_bound_ber(
                &spec.frame,
                &stats,
                noise_variance(db),
                UpepMethod::default(),
            )
        })
        .collect()
}

/// Analytical curve only, simulation fields left empty.
pub fn run_analytic(spec: &SweepSpec) -> Result<SweepResult> {
    let bounds = analytic_curve(spec)?;
    Ok(SweepResult {
        points: spec
            .snr_db
            .iter()
            .zip(bounds)
            .map(|(&snr_db, b)| SweepPoint {
                snr_db,
                simulated: None,
                ber_analytic: Some(b),
            })
            .collect(),
    })
}

/// Runs the sweep on the global thread pool.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep_with(spec, 0)
}

/// Runs the sweep on `workers` threads (0 = global pool). Results do not
/// depend on the worker count.
pub fn run_sweep_with(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    spec.validate()?;
    let corr = spec.correlation.model(&spec.geometry)?;
    let sampler = ChannelSampler::new(&corr, spec.frame.n_r, RANK_TOLERANCE)?;
    let modem = Modem::new(spec.frame)?;
    let detector = spec.detector.detector(&spec.frame);
    let rule = engine::StopRule {
        min_frames: spec.min_frames,
        max_frames: spec.max_frames,
        min_bit_errors: spec.min_bit_errors,
    };
    let bits_per_frame = spec.frame.bits_per_frame();
    let n0: Vec<f64> = spec.snr_db.iter().map(|&d| noise_variance(d)).collect();

    let simulated: Vec<SimulatedPoint> = if spec.paired {
        let start = Instant::now();
        let plan = engine::Plan::new(
            sampler,
            spec.frame.n_r,
            vec![(modem, detector, n0)],
            spec.seed,
            0,
        )?;
        let tally = run_on_pool(workers, |batch| engine::run(&plan, rule, 2 * batch))??;
        let per_point = start.elapsed() / spec.snr_db.len() as u32;
        tally.errors[0]
            .iter()
            .map(|&e| SimulatedPoint::from_counts(tally.frames, e, bits_per_frame, per_point))
            .collect()
    } else {
        let mut out = Vec::with_capacity(n0.len());
        for (idx, &v) in n0.iter().enumerate() {
            let start = Instant::now();
            let plan = engine::Plan::new(
                sampler.clone(),
                spec.frame.n_r,
                vec![(modem.clone(), detector, vec![v])],
                spec.seed,
                idx as u64,
            )?;
            let tally = run_on_pool(workers, |batch| engine::run(&plan, rule, 2 * batch))??;
            out.push(SimulatedPoint::from_counts(
                tally.frames,
                tally.errors[0][0],
                bits_per_frame,
                start.elapsed(),
            ));
        }
        out
    };

    let analytic = match spec.correlation {
        CorrelationKind::Identity => Some(analytic_curve(spec)?),
        CorrelationKind::Jakes => None,
    };
    Ok(SweepResult {
        points: spec
            .snr_db
            .iter()
            .zip(simulated)
            .enumerate()
            .map(|(k, (&snr_db, sim))| SweepPoint {
                snr_db,
                simulated: Some(sim),
                ber_analytic: analytic.as_ref().map(|a| a[k]),
            })
            .collect(),
    })
}

/// One configuration evaluated inside a paired experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Arm {
    pub frame: FrameConfig,
    pub detector: DetectorKind,
    pub snr_db: Vec<f64>,
}

/// Several configurations simulated on common channel, bit and noise draws.
///
/// Every frame draws one channel, one bit word and one unit-variance noise
/// vector; each arm uses the low bits of the word it needs and scales the
/// noise to each of its SNR points.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub geometry: FrisGeometry,
    pub correlation: CorrelationKind,
    pub arms: Vec<Arm>,
    pub seed: u64,
    pub min_frames: u64,
    pub max_frames: u64,
    pub min_bit_errors: u64,
}

/// Runs a paired experiment; one result per arm, in order.
pub fn run_experiment(exp: &Experiment, workers: usize) -> Result<Vec<SweepResult>> {
    if exp.arms.is_empty() {
        return Err(Error::Config("experiment has no arms".into()));
    }
    let n_r = exp.arms[0].frame.n_r;
    let mut plan_arms = Vec::with_capacity(exp.arms.len());
    for arm in &exp.arms {
        let mut spec = SweepSpec::new(exp.geometry, arm.frame, arm.snr_db.clone());
        spec.min_frames = exp.min_frames;
        spec.max_frames = exp.max_frames;
        spec.validate()?;
        let n0 = arm.snr_db.iter().map(|&d| noise_variance(d)).collect();
        plan_arms.push((
            Modem::new(arm.frame)?,
            arm.detector.detector(&arm.frame),
            n0,
        ));
    }
    let corr = exp.correlation.model(&exp.geometry)?;
    let sampler = ChannelSampler::new(&corr, n_r, RANK_TOLERANCE)?;
    let plan = engine::Plan::new(sampler, n_r, plan_arms, exp.seed, 0)?;
    let rule = engine::StopRule {
        min_frames: exp.min_frames,
        max_frames: exp.max_frames,
        min_bit_errors: exp.min_bit_errors,
    };
    let start = Instant::now();
    let tally = run_on_pool(workers, |batch| engine::run(&plan, rule, 2 * batch))??;
    let elapsed = start.elapsed();
    Ok(exp
        .arms
        .iter()
        .zip(&tally.errors)
        .map(|(arm, errs)| SweepResult {
            points: arm
                .snr_db
                .iter()
                .zip(errs)
                .map(|(&snr_db, &e)| SweepPoint {
                    snr_db,
                    simulated: Some(SimulatedPoint::from_counts(
                        tally.frames,
                        e,
                        arm.frame.bits_per_frame(),
                        elapsed,
                    )),
                    ber_analytic: None,
                })
                .collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fris::PhaseMode;

    fn small_spec() -> SweepSpec {
        let g = FrisGeometry::new(6, 4, 0.5, 0.5).unwrap();
        let mut f = FrameConfig::new(4, 4, 12);
        f.phase_mode = PhaseMode::Quantized { bits: 2 };
        let mut s = SweepSpec::new(g, f, vec![-20.0, -15.0]);
        s.min_frames = 600;
        s.max_frames = 3000;
        s.min_bit_errors = 50;
        s.seed = 42;
        s
    }

    #[test]
    fn wilson_reference() {
        let (lo, hi) = wilson_interval(10, 100, Z95);
        assert!((lo - 0.05522914).abs() < 1e-7 && (hi - 0.17436566).abs() < 1e-7);
        let (lo, hi) = wilson_interval(0, 1000, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.004);
        assert_eq!(wilson_interval(0, 0, Z95), (0.0, 1.0));
    }

    #[test]
    fn validation_errors() {
        let mut s = small_spec();
        s.frame.k_sel = 100;
        let e = s.validate().unwrap_err().to_string();
        assert!(e.contains("K_sel exceeds N_tot"), "{e}");
        let mut s = small_spec();
        s.snr_db.clear();
        assert!(s.validate().is_err());
        let mut s = small_spec();
        s.max_frames = 10;
        assert!(s.validate().is_err());
    }

    #[test]
    fn sweep_is_deterministic_and_worker_independent() {
        for paired in [false, true] {
            let mut s = small_spec();
            s.paired = paired;
            let a = run_sweep_with(&s, 1).unwrap();
            let b = run_sweep_with(&s, 1).unwrap();
            let c = run_sweep_with(&s, 3).unwrap();
            assert_eq!(a, b);
            assert_eq!(a, c);
            for p in &a.points {
                let sim = p.simulated.unwrap();
                assert!(sim.frames >= s.min_frames);
                assert!(sim.bit_errors >= s.min_bit_errors || sim.frames == s.max_frames);
                assert!(sim.ci_lo <= sim.ber && sim.ber <= sim.ci_hi);
                assert!((0.0..=1.0).contains(&sim.ber));
            }
        }
    }

    #[test]
    fn analytic_column_only_for_identity() {
        let mut s = small_spec();
        s.max_frames = 1000;
        s.min_frames = 512;
        assert!(run_sweep(&s)
            .unwrap()
            .points
            .iter()
            .all(|p| p.ber_analytic.is_none()));
        s.correlation = CorrelationKind::Identity;
        let r = run_sweep(&s).unwrap();
        assert!(r.points.iter().all(|p| p.ber_analytic.unwrap() > 0.0));
        let a = run_analytic(&s).unwrap();
        assert!(a.points.iter().all(|p| p.simulated.is_none()));
        assert_eq!(a.points[0].ber_analytic, r.points[0].ber_analytic);
    }

    #[test]
    fn noiseless_limit_has_no_errors() {
        let g = FrisGeometry::new(8, 8, 0.5, 0.5).unwrap();
        let mut s = SweepSpec::new(g, FrameConfig::new(4, 4, 64), vec![60.0]);
        s.min_frames = 1000;
        s.max_frames = 1000;
        let r = run_sweep(&s).unwrap();
        let sim = r.points[0].simulated.unwrap();
        assert_eq!(sim.bit_errors, 0);
        assert!(sim.frames >= 1000);
    }

    proptest::proptest! {
        #[test]
        fn wilson_contains_estimate(trials in 1u64..10_000_000, frac in 0.0f64..=1.0) {
            let errors = (trials as f64 * frac) as u64;
            let (lo, hi) = wilson_interval(errors, trials, Z95);
            let p = errors as f64 / trials as f64;
            proptest::prop_assert!(0.0 <= lo && lo <= p + 1e-15 && p <= hi + 1e-15 && hi <= 1.0);
        }
    }
}
