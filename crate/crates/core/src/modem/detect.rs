use num_complex::Complex64;

use super::Constellation;
use crate::fris::{select_topk, ModeBank};
use crate::{Error, Result};

/// Detector decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionResult {
    pub antenna_index: usize,
    pub symbol_index: usize,
    /// `||y - G~ Phi_i f x||^2` of the decision.
    pub metric: f64,
}

/// Detector selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    Ml,
    Greedy,
    List(usize),
}

impl Detector {
    pub fn detect(
        &self,
        y: &[Complex64],
        bank: &ModeBank,
        constellation: &Constellation,
    ) -> Result<DetectionResult> {
        match *self {
            Detector::Ml => Ok(detect_ml(y, bank, constellation)),
            Detector::Greedy => Ok(detect_greedy(y, bank, constellation)),
            Detector::List(l) => detect_list(y, bank, constellation, l),
        }
    }
}

fn distance(y: &[Complex64], h: &[Complex64], x: Complex64) -> f64 {
    y.iter().zip(h).map(|(a, b)| (a - b * x).norm_sqr()).sum()
}

// Joint search over the candidate antennas, visited in the given order.
fn search(
    y: &[Complex64],
    bank: &ModeBank,
    constellation: &Constellation,
    candidates: impl IntoIterator<Item = usize>,
) -> DetectionResult {
    let mut best = DetectionResult {
        antenna_index: 0,
        symbol_index: 0,
        metric: f64::INFINITY,
    };
    for i in candidates {
        let h = bank.model(i);
        for (k, &x) in constellation.points().iter().enumerate() {
            let m = distance(y, h, x);
            if m < best.metric {
                best = DetectionResult {
                    antenna_index: i,
                    symbol_index: k,
                    metric: m,
                };
            }
        }
    }
    best
}

/// Joint ML over every `(antenna, symbol)` pair; ties go to the smaller
/// antenna, then the smaller symbol position.
pub fn detect_ml(
    y: &[Complex64],
    bank: &ModeBank,
    constellation: &Constellation,
) -> DetectionResult {
    search(y, bank, constellation, 0..bank.n_r())
}

/// Strongest-branch antenna decision followed by scalar ML on that branch.
pub fn detect_greedy(
    y: &[Complex64],
    bank: &ModeBank,
    constellation: &Constellation,
) -> DetectionResult {
    let mut i_hat = 0;
    for (ell, v) in y.iter().enumerate() {
        if v.norm_sqr() > y[i_hat].norm_sqr() {
            i_hat = ell;
        }
    }
    let h = bank.gain(i_hat, i_hat);
    let mut k_hat = 0;
    let mut best = f64::INFINITY;
    for (k, &x) in constellation.points().iter().enumerate() {
        let d = (y[i_hat] - h * x).norm_sqr();
        if d < best {
            best = d;
            k_hat = k;
        }
    }
    DetectionResult {
        antenna_index: i_hat,
        symbol_index: k_hat,
        metric: distance(y, bank.model(i_hat), constellation.point(k_hat)),
    }
}

/// ML restricted to the `list_size` antennas with the largest `|y_ell|^2`.
pub fn detect_list(
    y: &[Complex64],
    bank: &ModeBank,
    constellation: &Constellation,
    list_size: usize,
) -> Result<DetectionResult> {
    if list_size == 0 || list_size > bank.n_r() {
        return Err(Error::Domain(format!(
            "list size {list_size} outside 1..={}",
            bank.n_r()
        )));
    }
    let energy: Vec<f64> = y.iter().map(|v| v.norm_sqr()).collect();
    let candidates = select_topk(&energy, list_size)?;
    Ok(search(y, bank, constellation, candidates))
}
