use serde::Deserialize;

use super::{preset, CorrelationKind, DetectorKind, SweepSpec};
use crate::channel::FrisGeometry;
use crate::fris::{PhaseMode, SelectionMetric};
use crate::modem::{FrameConfig, Modulation};
use crate::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    preset: Option<String>,
    geometry: Option<GeometrySection>,
    frame: Option<FrameSection>,
    sweep: Option<SweepSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometrySection {
    n_x: Option<usize>,
    n_z: Option<usize>,
    d_x: Option<f64>,
    d_z: Option<f64>,
    w_x: Option<f64>,
    w_z: Option<f64>,
    correlation: Option<CorrelationName>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum CorrelationName {
    Jakes,
    Identity,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameSection {
    n_r: Option<usize>,
    m: Option<usize>,
    k_sel: Option<usize>,
    phase: Option<PhaseName>,
    phase_bits: Option<u32>,
    modulation: Option<ModulationName>,
    selection: Option<SelectionName>,
    detector: Option<DetectorName>,
    list_size: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum PhaseName {
    Continuous,
    Quantized,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModulationName {
    Auto,
    Psk,
    Qam,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SelectionName {
    InPhase,
    Magnitude,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum DetectorName {
    Ml,
    Greedy,
    List,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    snr_db: Option<Vec<f64>>,
    min_frames: Option<u64>,
    min_bit_errors: Option<u64>,
    max_frames: Option<u64>,
    seed: Option<u64>,
    paired: Option<bool>,
}

fn need<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing key `{key}`")))
}

/// Parses a sectioned key/value document (`[geometry]`, `[frame]`,
/// `[sweep]`, optional top-level `preset`) into a validated spec.
///
/// Keys given alongside a preset override its values.
pub fn parse_config(text: &str) -> Result<SweepSpec> {
    let doc: Document = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let base = match &doc.preset {
        Some(name) => {
            Some(preset(name).ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))?)
        }
        None => None,
    };
    let geo = doc.geometry.unwrap_or_default();
    let fr = doc.frame.unwrap_or_default();
    let sw = doc.sweep.unwrap_or_default();

    let geometry = build_geometry(&geo, base.as_ref().map(|b| &b.geometry))?;

    let mut frame = match &base {
        Some(b) => b.frame,
        None => FrameConfig::new(
            need(fr.n_r, "frame.n_r")?,
            need(fr.m, "frame.m")?,
            need(fr.k_sel, "frame.k_sel")?,
        ),
    };
    let n_r_changed = fr.n_r.is_some_and(|n| n != frame.n_r);
    if let Some(v) = fr.n_r {
        frame.n_r = v;
    }
    if let Some(v) = fr.m {
        frame.m = v;
    }
    if let Some(v) = fr.k_sel {
        frame.k_sel = v;
    }
    match (fr.phase, fr.phase_bits) {
        (Some(PhaseName::Continuous), Some(_)) => {
            return Err(Error::Config(
                "`frame.phase_bits` conflicts with phase = \"continuous\"".into(),
            ))
        }
        (Some(PhaseName::Continuous), None) => frame.phase_mode = PhaseMode::Continuous,
        (Some(PhaseName::Quantized), None) => {
            return Err(Error::Config(
                "quantized phase needs `frame.phase_bits`".into(),
            ))
        }
        (_, Some(bits)) => frame.phase_mode = PhaseMode::Quantized { bits },
        (None, None) => {}
    }
    if let Some(v) = fr.modulation {
        frame.modulation = match v {
            ModulationName::Auto => Modulation::Auto,
            ModulationName::Psk => Modulation::Psk,
            ModulationName::Qam => Modulation::Qam,
        };
    }
    if let Some(v) = fr.selection {
        frame.selection = match v {
            SelectionName::InPhase => SelectionMetric::InPhase,
            SelectionName::Magnitude => SelectionMetric::Magnitude,
        };
    }
    match fr.list_size {
        Some(l) => frame.list_size = l,
        None if base.is_none() || n_r_changed => frame.list_size = frame.n_r,
        None => {}
    }

    let mut spec = match base {
        Some(mut b) => {
            b.geometry = geometry;
            b.frame = frame;
            b
        }
        None => SweepSpec::new(geometry, frame, need(sw.snr_db.clone(), "sweep.snr_db")?),
    };
    if let Some(v) = sw.snr_db {
        spec.snr_db = v;
    }
    if let Some(v) = sw.min_frames {
        spec.min_frames = v;
    }
    if let Some(v) = sw.min_bit_errors {
        spec.min_bit_errors = v;
    }
    if let Some(v) = sw.max_frames {
        spec.max_frames = v;
    }
    if let Some(v) = sw.seed {
        spec.seed = v;
    }
    if let Some(v) = sw.paired {
        spec.paired = v;
    }
    if let Some(v) = fr.detector {
        spec.detector = match v {
            DetectorName::Ml => DetectorKind::Ml,
            DetectorName::Greedy => DetectorKind::Greedy,
            DetectorName::List => DetectorKind::List,
        };
    }
    if let Some(v) = geo.correlation {
        spec.correlation = match v {
            CorrelationName::Jakes => CorrelationKind::Jakes,
            CorrelationName::Identity => CorrelationKind::Identity,
        };
    }
    spec.validate()?;
    Ok(spec)
}

fn build_geometry(g: &GeometrySection, base: Option<&FrisGeometry>) -> Result<FrisGeometry> {
    if g.d_x.is_some() && g.w_x.is_some() || g.d_z.is_some() && g.w_z.is_some() {
        return Err(Error::Config(
            "give either spacing (d_x, d_z) or aperture (w_x, w_z), not both".into(),
        ));
    }
    let (n_x, n_z) = match base {
        Some(b) => (g.n_x.unwrap_or(b.n_x), g.n_z.unwrap_or(b.n_z)),
        None => (need(g.n_x, "geometry.n_x")?, need(g.n_z, "geometry.n_z")?),
    };
    let spacing = |d: Option<f64>,
                   w: Option<f64>,
                   n: usize,
                   fallback: Option<f64>,
                   key: &str|
     -> Result<f64> {
        match (d, w) {
            (Some(d), _) => Ok(d),
            (None, Some(w)) if n > 1 => Ok(w / (n - 1) as f64),
            (None, Some(_)) => Ok(1.0),
            (None, None) => need(fallback, key),
        }
    };
    let d_x = spacing(
        g.d_x,
        g.w_x,
        n_x,
        base.map(|b| b.d_x),
        "geometry.d_x or geometry.w_x",
    )?;
    let d_z = spacing(
        g.d_z,
        g.w_z,
        n_z,
        base.map(|b| b.d_z),
        "geometry.d_z or geometry.w_z",
    )?;
    FrisGeometry::new(n_x, n_z, d_x, d_z)
}
