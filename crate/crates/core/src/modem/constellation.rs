use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::{Error, Result};

/// Constellation family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Modulation {
    /// Square QAM when the order is a square of at least 4, PSK otherwise.
    #[default]
    Auto,
    Psk,
    Qam,
}

pub(crate) fn gray(k: u32) -> u32 {
    k ^ (k >> 1)
}

/// Unit-energy Gray-labelled constellation. Order 1 is the single point
/// `x = 1` used for space-shift keying.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    labels: Vec<u32>,
    by_label: Vec<usize>,
    bits: u32,
}

impl Constellation {
    pub fn new(order: usize, modulation: Modulation) -> Result<Self> {
        if order == 0 || !order.is_power_of_two() {
            return Err(Error::Config(format!(
                "constellation order must be a power of two, got {order}"
            )));
        }
        if order == 1 {
            return Ok(Self::from_labelled(vec![Complex64::new(1.0, 0.0)], vec![0]));
        }
        let bits = order.trailing_zeros();
        let square = bits.is_multiple_of(2);
        match modulation {
            Modulation::Psk => Ok(Self::psk(order)),
            Modulation::Qam if !square => Err(Error::Config(format!(
                "QAM needs a square order, got {order}"
            ))),
            Modulation::Qam => Ok(Self::qam(order)),
            Modulation::Auto if square => Ok(Self::qam(order)),
            Modulation::Auto => Ok(Self::psk(order)),
        }
    }

    fn psk(order: usize) -> Self {
        let points = (0..order)
            .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / order as f64))
            .collect();
        let labels = (0..order as u32).map(gray).collect();
        Self::from_labelled(points, labels)
    }

    fn qam(order: usize) -> Self {
        let bits = order.trailing_zeros();
        let side = 1usize << (bits / 2);
        let scale = (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
        let level = |a: usize| (2.0 * a as f64 - (side as f64 - 1.0)) / scale;
        let mut points = Vec::with_capacity(order);
        let mut labels = Vec::with_capacity(order);
        for a in 0..side {
            for b in 0..side {
                points.push(Complex64::new(level(a), level(b)));
                labels.push((gray(a as u32) << (bits / 2)) | gray(b as u32));
            }
        }
        Self::from_labelled(points, labels)
    }

    fn from_labelled(points: Vec<Complex64>, labels: Vec<u32>) -> Self {
        let mut by_label = vec![0; points.len()];
        for (k, &l) in labels.iter().enumerate() {
            by_label[l as usize] = k;
        }
        let bits = points.len().trailing_zeros();
        Self {
            points,
            labels,
            by_label,
            bits,
        }
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, k: usize) -> Complex64 {
        self.points[k]
    }

    /// Gray label of the point at position `k`.
    pub fn label(&self, k: usize) -> u32 {
        self.labels[k]
    }

    /// Position of the point carrying `label`.
    pub fn index_of_label(&self, label: u32) -> usize {
        self.by_label[label as usize]
    }
}
