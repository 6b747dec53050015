use super::{DetectorKind, SweepSpec};
use crate::channel::FrisGeometry;
use crate::fris::PhaseMode;
use crate::modem::FrameConfig;

const PRESET_MAX_FRAMES: u64 = 2_000_000;

struct Entry {
    name: String,
    about: String,
    spec: SweepSpec,
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

fn spec(geometry: FrisGeometry, frame: FrameConfig, snr_db: Vec<f64>) -> SweepSpec {
    let mut s = SweepSpec::new(geometry, frame, snr_db);
    s.max_frames = PRESET_MAX_FRAMES;
    s
}

fn aperture(n_x: usize, n_z: usize, w_x: f64, w_z: f64) -> FrisGeometry {
    FrisGeometry::from_aperture(n_x, n_z, w_x, w_z).expect("preset geometry")
}

fn quantized(bits: Option<u32>) -> PhaseMode {
    bits.map_or(PhaseMode::Continuous, |bits| PhaseMode::Quantized { bits })
}

fn entries() -> Vec<Entry> {
    let mut out = Vec::new();

    for (n_tot, n_x, n_z, snr) in [
        (64, 8, 8, (-29.0, -14.0)),
        (128, 16, 8, (-33.0, -19.0)),
        (256, 16, 16, (-36.0, -21.0)),
    ] {
        out.push(Entry {
            name: format!("fig2_{n_tot}"),
            about: format!(
                "RSSK, {n_x}x{n_z} grid on a 3.5x3.5 wavelength aperture, K_sel=64, N_r=4"
            ),
            spec: spec(
                aperture(n_x, n_z, 3.5, 3.5),
                FrameConfig::new(4, 1, 64),
                grid(snr.0, snr.1, 1.0),
            ),
        });
    }

    for (layout, w_x, w_z, snr) in [
        ("dense", 4.5, 2.0, (-32.0, -16.0)),
        ("sparse", 9.0, 4.0, (-32.0, -16.0)),
    ] {
        for (tag, bits) in [
            ("cont", None),
            ("q1", Some(1)),
            ("q2", Some(2)),
            ("q3", Some(3)),
        ] {
            let mut f = FrameConfig::new(4, 4, 50);
            f.phase_mode = quantized(bits);
            let phase = bits.map_or("continuous phase".to_string(), |b| format!("{b}-bit phase"));
            out.push(Entry {
                name: format!("fig3_{layout}_{tag}"),
                about: format!(
                    "RSM M=4, 25x10 grid on {w_x}x{w_z} wavelengths, K_sel=50, N_r=4, {phase}"
                ),
                spec: spec(aperture(25, 10, w_x, w_z), f, grid(snr.0, snr.1, 1.0)),
            });
        }
    }

    for (k, n_x, n_z, snr) in [
        (20, 10, 6, (-22.0, -9.0)),
        (40, 12, 10, (-27.0, -15.0)),
        (60, 15, 12, (-31.0, -19.0)),
        (80, 16, 15, (-33.0, -22.0)),
    ] {
        let mut f = FrameConfig::new(8, 4, k);
        f.phase_mode = PhaseMode::Quantized { bits: 3 };
        out.push(Entry {
            name: format!("fig4_k{k}"),
            about: format!(
                "RSM M=4, {n_x}x{n_z} grid at 2 wavelength spacing, K_sel={k}, N_r=8, 3-bit phase"
            ),
            spec: spec(
                FrisGeometry::new(n_x, n_z, 2.0, 2.0).expect("preset geometry"),
                f,
                grid(snr.0, snr.1, 1.0),
            ),
        });
    }

    for k in [40, 80, 120, 160, 200, 240] {
        let mut f = FrameConfig::new(8, 4, k);
        f.phase_mode = PhaseMode::Quantized { bits: 3 };
        out.push(Entry {
            name: format!("fig5_k{k}"),
            about: format!(
                "RSM M=4, 24x10 grid on 46x18 wavelengths, K_sel={k}, N_r=8, 3-bit phase"
            ),
            spec: spec(aperture(24, 10, 46.0, 18.0), f, grid(-37.0, -16.0, 1.0)),
        });
    }

    for l in [1, 2, 3, 5, 16] {
        let mut f = FrameConfig::new(16, 16, 70);
        f.phase_mode = PhaseMode::Quantized { bits: 2 };
        f.list_size = l;
        let mut s = spec(aperture(20, 9, 4.5, 3.0), f, grid(-26.0, -12.0, 1.0));
        s.detector = DetectorKind::List;
        out.push(Entry {
            name: format!("fig6_L{l}"),
            about: format!("RSM M=16, 20x9 grid on 4.5x3 wavelengths, K_sel=70, N_r=16, 2-bit phase, Top-{l} list detector"),
            spec: s,
        });
    }
    out
}

/// Named figure configuration, or `None` for an unknown name.
pub fn preset(name: &str) -> Option<SweepSpec> {
    entries()
        .into_iter()
        .find(|e| e.name == name)
        .map(|e| e.spec)
}

/// All preset names with one-line descriptions.
pub fn list_presets() -> Vec<(String, String)> {
    entries().into_iter().map(|e| (e.name, e.about)).collect()
}
