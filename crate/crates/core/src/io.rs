//! File formats: coefficient JSON and the CSV tables written by the CLI.
//!
//! Every real in a CSV is printed like C's `%.12e`, so a file parsed and
//! written again reproduces the same bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::designer::{DesignMethod, DesignResult};
use crate::error::{Error, Result};
use crate::harness::{BerPoint, InstrumentedBit, SweepAxis};
use crate::spectrum::Spectrum;

/// `%.12e`: twelve fractional digits and a signed exponent of at least two digits.
pub fn fmt_e(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: `{field}` is not a number")))
}

fn parse_u64(field: &str, line: usize) -> Result<u64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: `{field}` is not a count")))
}

/// Header and rows of a comma-separated table (no quoting).
fn split_table<'a>(text: &'a str, expect: Option<&[&str]>) -> Result<(Vec<&'a str>, Vec<Vec<&'a str>>)> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or(Error::Empty("CSV header"))?.split(',').collect();
    if let Some(expect) = expect {
        if header != expect {
            return Err(Error::Parse(format!("unexpected header `{}`", header.join(","))));
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row: Vec<&str> = line.split(',').collect();
        if row.len() != header.len() {
            return Err(Error::Parse(format!("line {}: {} fields, header has {}", i + 2, row.len(), header.len())));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// On-disk waveform coefficients. `cost` is in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientFile {
    pub n: usize,
    pub fhat_hz: f64,
    pub tc_s: f64,
    pub coeffs: Vec<f64>,
    pub cost: f64,
    pub method: DesignMethod,
    pub seed: u64,
}

impl CoefficientFile {
    pub fn from_design(r: &DesignResult, seed: u64) -> Self {
        Self {
            n: r.coeffs.len(),
            fhat_hz: r.fhat,
            tc_s: r.tc,
            coeffs: r.coeffs.clone(),
            cost: r.cost,
            method: r.method,
            seed,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(text)?;
        if f.coeffs.len() != f.n {
            return Err(Error::Parse(format!("n = {} but {} coefficients", f.n, f.coeffs.len())));
        }
        Ok(f)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json())?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// `freq_hz,psd`, ascending frequency.
pub fn psd_csv(spec: &Spectrum) -> String {
    let mut out = String::from("freq_hz,psd\n");
    for (f, p) in spec.freqs.iter().zip(&spec.psd) {
        let _ = writeln!(out, "{},{}", fmt_e(*f), fmt_e(*p));
    }
    out
}

pub fn parse_psd_csv(text: &str) -> Result<Spectrum> {
    let (_, rows) = split_table(text, Some(&["freq_hz", "psd"]))?;
    let mut freqs = Vec::with_capacity(rows.len());
    let mut psd = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        freqs.push(parse_f64(row[0], i + 2)?);
        psd.push(parse_f64(row[1], i + 2)?);
    }
    let df = if freqs.len() > 1 { freqs[1] - freqs[0] } else { 0.0 };
    Ok(Spectrum { freqs, psd, df })
}

/// One PSD row per design frequency on a shared frequency axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub freqs: Vec<f64>,
    pub rows: Vec<(f64, Vec<f64>)>,
}

impl Spectrogram {
    pub fn new(fhats: &[f64], spectra: &[Spectrum]) -> Result<Self> {
        let first = spectra.first().ok_or(Error::Empty("spectrogram"))?;
        if fhats.len() != spectra.len() || spectra.iter().any(|s| s.freqs != first.freqs) {
            return Err(Error::LengthMismatch("spectrogram rows must share one frequency axis".into()));
        }
        Ok(Self {
            freqs: first.freqs.clone(),
            rows: fhats.iter().zip(spectra).map(|(&f, s)| (f, s.psd.clone())).collect(),
        })
    }

    /// `fhat_hz,psd@<freq_hz>,…`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fhat_hz");
        for f in &self.freqs {
            let _ = write!(out, ",psd@{}", fmt_e(*f));
        }
        out.push('\n');
        for (fhat, row) in &self.rows {
            out.push_str(&fmt_e(*fhat));
            for p in row {
                out.push(',');
                out.push_str(&fmt_e(*p));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let (header, rows) = split_table(text, None)?;
        if header.first() != Some(&"fhat_hz") {
            return Err(Error::Parse("spectrogram header must start with fhat_hz".into()));
        }
        let freqs = header[1..]
            .iter()
            .map(|h| {
                let f = h.strip_prefix("psd@").ok_or_else(|| Error::Parse(format!("bad column `{h}`")))?;
                parse_f64(f, 1)
            })
            .collect::<Result<Vec<_>>>()?;
        let rows = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let vals = r.iter().map(|x| parse_f64(x, i + 2)).collect::<Result<Vec<_>>>()?;
                Ok((vals[0], vals[1..].to_vec()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { freqs, rows })
    }
}

const SWEEP_HEADER: [&str; 9] = ["axis", "value", "n_bits", "n_errors", "ber", "ci_low", "ci_high", "seed", "clamp_count"];

/// Sweep table; the 2-D axis adds `fhat_hz,fj_hz`.
pub fn sweep_csv(axis: SweepAxis, points: &[BerPoint]) -> String {
    let grid = axis == SweepAxis::FhatVsFj;
    let mut out = SWEEP_HEADER.join(",");
    if grid {
        out.push_str(",fhat_hz,fj_hz");
    }
    out.push('\n');
    for p in points {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            axis,
            fmt_e(p.value),
            p.n_bits,
            p.n_errors,
            fmt_e(p.ber),
            fmt_e(p.ci_low),
            fmt_e(p.ci_high),
            p.seed,
            p.clamp_count
        );
        if grid {
            let (fhat, fj) = p.grid.unwrap_or((p.value, f64::NAN));
            let _ = write!(out, ",{},{}", fmt_e(fhat), fmt_e(fj));
        }
        out.push('\n');
    }
    out
}

pub fn parse_sweep_csv(text: &str) -> Result<(SweepAxis, Vec<BerPoint>)> {
    let (header, rows) = split_table(text, None)?;
    let grid = match header.len() {
        9 => false,
        11 => header[9..] == ["fhat_hz", "fj_hz"],
        _ => false,
    };
    if header[..9.min(header.len())] != SWEEP_HEADER || (header.len() != 9 && !grid) {
        return Err(Error::Parse(format!("unexpected sweep header `{}`", header.join(","))));
    }
    let mut axis = None;
    let mut points = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let line = i + 2;
        let a: SweepAxis = r[0].parse()?;
        if *axis.get_or_insert(a) != a {
            return Err(Error::Parse(format!("line {line}: mixed axes")));
        }
        points.push(BerPoint {
            value: parse_f64(r[1], line)?,
            n_bits: parse_u64(r[2], line)?,
            n_errors: parse_u64(r[3], line)?,
            ber: parse_f64(r[4], line)?,
            ci_low: parse_f64(r[5], line)?,
            ci_high: parse_f64(r[6], line)?,
            seed: parse_u64(r[7], line)?,
            clamp_count: parse_u64(r[8], line)?,
            n_aborted: 0,
            grid: if grid { Some((parse_f64(r[9], line)?, parse_f64(r[10], line)?)) } else { None },
        });
    }
    let axis = axis.ok_or(Error::Empty("sweep rows"))?;
    if grid != (axis == SweepAxis::FhatVsFj) {
        return Err(Error::Parse("grid columns do not match the axis".into()));
    }
    Ok((axis, points))
}

/// `bit_index,R_k,S_k,J_k,N_k,tau_s`.
pub fn instrumented_csv(bits: &[InstrumentedBit]) -> String {
    let mut out = String::from("bit_index,R_k,S_k,J_k,N_k,tau_s\n");
    for b in bits {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            b.bit_index,
            fmt_e(b.r),
            fmt_e(b.s),
            fmt_e(b.j),
            fmt_e(b.n),
            fmt_e(b.tau)
        );
    }
    out
}

pub fn parse_instrumented_csv(text: &str) -> Result<Vec<InstrumentedBit>> {
    let (_, rows) = split_table(text, Some(&["bit_index", "R_k", "S_k", "J_k", "N_k", "tau_s"]))?;
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let line = i + 2;
            Ok(InstrumentedBit {
                bit_index: parse_u64(r[0], line)?,
                r: parse_f64(r[1], line)?,
                s: parse_f64(r[2], line)?,
                j: parse_f64(r[3], line)?,
                n: parse_f64(r[4], line)?,
                tau: parse_f64(r[5], line)?,
            })
        })
        .collect()
}
