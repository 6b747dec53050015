use std::io::{Read, Write};
use std::path::Path;

use super::SweepResult;
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 7] = [
    "snr_db",
    "ber_sim",
    "ci_lo",
    "ci_hi",
    "frames",
    "bit_errors",
    "ber_analytic",
];

/// One CSV data row; empty cells read back as `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub snr_db: f64,
    pub ber_sim: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub frames: Option<u64>,
    pub bit_errors: Option<u64>,
    pub ber_analytic: Option<f64>,
}

/// Plain decimal with six significant digits and trailing zeros trimmed.
pub fn format_sig6(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exp < 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
        out.push_str(&digits);
    } else {
        let int_len = exp as usize + 1;
        if int_len >= digits.len() {
            out.push_str(&digits);
            out.extend(std::iter::repeat_n('0', int_len - digits.len()));
        } else {
            out.push_str(&digits[..int_len]);
            out.push('.');
            out.push_str(&digits[int_len..]);
        }
    }
    if out.contains('.') {
        let trimmed = out.trim_end_matches('0').trim_end_matches('.');
        out = trimmed.to_string();
    }
    out
}

fn cell(v: Option<f64>) -> String {
    v.map(format_sig6).unwrap_or_default()
}

/// Writes the sweep as CSV to any writer.
pub fn write_csv_to<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for p in &result.points {
        let sim = p.simulated.as_ref();
        w.write_record([
            format_sig6(p.snr_db),
            cell(sim.map(|s| s.ber)),
            cell(sim.map(|s| s.ci_lo)),
            cell(sim.map(|s| s.ci_hi)),
            sim.map(|s| s.frames.to_string()).unwrap_or_default(),
            sim.map(|s| s.bit_errors.to_string()).unwrap_or_default(),
            cell(p.ber_analytic),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(result: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv_to(result, std::io::BufWriter::new(file))
}

fn opt<T: std::str::FromStr>(s: &str, col: &str, line: u64) -> Result<Option<T>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Error::Parse(format!("line {line}: bad value `{s}` in column {col}")))
}

/// Parses CSV produced by [`write_csv`].
pub fn parse_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse(format!(
            "unexpected header: {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::Parse(format!(
                "line {line}: expected 7 fields, got {}",
                rec.len()
            )));
        }
        let snr_db = opt(&rec[0], "snr_db", line)?
            .ok_or_else(|| Error::Parse(format!("line {line}: snr_db is empty")))?;
        rows.push(CsvRow {
            snr_db,
            ber_sim: opt(&rec[1], "ber_sim", line)?,
            ci_lo: opt(&rec[2], "ci_lo", line)?,
            ci_hi: opt(&rec[3], "ci_hi", line)?,
            frames: opt(&rec[4], "frames", line)?,
            bit_errors: opt(&rec[5], "bit_errors", line)?,
            ber_analytic: opt(&rec[6], "ber_analytic", line)?,
        });
    }
    Ok(rows)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<CsvRow>> {
    parse_csv(std::fs::File::open(path)?)
}
