//! Periodogram and Welch PSD estimates.
//!
//! Normalisation: for a record `x[0..L)` sampled at `dt`, zero-padded to `nfft`,
//! the one-sided PSD is `c_k·|X_k|²·dt/L` with `c_k = 2` for interior bins and
//! `1` at DC and Nyquist. With `df = 1/(nfft·dt)` this gives
//! `Σ psd·df = (1/L)·Σ x²`, the average power of the record.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub psd: Vec<f64>,
    pub df: f64,
}

impl Spectrum {
    /// `Σ psd·df`.
    pub fn total_power(&self) -> f64 {
        self.psd.iter().sum::<f64>() * self.df
    }

    /// Index of the bin whose centre is nearest `f`.
    pub fn bin_of(&self, f: f64) -> usize {
        ((f / self.df).round() as usize).min(self.psd.len() - 1)
    }

    /// `(index, value)` of the largest bin.
    pub fn peak(&self) -> (usize, f64) {
        self.psd
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::MIN), |best, (i, p)| if p > best.1 { (i, p) } else { best })
    }

    /// PSD at bin `k` in dB relative to the peak.
    pub fn relative_db(&self, k: usize) -> f64 {
        10.0 * (self.psd[k] / self.peak().1).log10()
    }
}

fn check_nfft(len: usize, nfft: usize) -> Result<()> {
    if len == 0 {
        return Err(Error::Empty("signal"));
    }
    if !nfft.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("nfft must be a power of two, got {nfft}")));
    }
    if nfft < len {
        return Err(Error::InvalidParameter(format!(
            "nfft = {nfft} shorter than the signal ({len} samples)"
        )));
    }
    Ok(())
}

fn raw_periodogram(planner: &mut FftPlanner<f64>, x: &[f64], nfft: usize) -> Vec<f64> {
    let fft = planner.plan_fft_forward(nfft);
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(nfft, Complex64::new(0.0, 0.0));
    fft.process(&mut buf);
    let half = nfft / 2;
    (0..=half)
        .map(|k| {
            let p = buf[k].norm_sqr();
            if k == 0 || k == half {
                p
            } else {
                2.0 * p
            }
        })
        .collect()
}

/// Rectangular-window periodogram of `x`, zero-padded to `nfft`.
pub fn psd(x: &[f64], dt: f64, nfft: usize) -> Result<Spectrum> {
    check_nfft(x.len(), nfft)?;
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt:e}")));
    }
    let mut planner = FftPlanner::new();
    let scale = dt / x.len() as f64;
    let psd: Vec<f64> = raw_periodogram(&mut planner, x, nfft).into_iter().map(|p| p * scale).collect();
    let df = 1.0 / (nfft as f64 * dt);
    let freqs = (0..psd.len()).map(|k| k as f64 * df).collect();
    Ok(Spectrum { freqs, psd, df })
}

/// Average of periodograms over consecutive non-overlapping segments of `segment` samples.
///
/// A trailing partial segment is dropped.
pub fn welch_psd(x: &[f64], dt: f64, segment: usize, nfft: usize) -> Result<Spectrum> {
    if segment == 0 || x.len() < segment {
        return Err(Error::Empty("welch segment"));
    }
    check_nfft(segment, nfft)?;
    let mut planner = FftPlanner::new();
    let count = x.len() / segment;
    let mut acc = vec![0.0; nfft / 2 + 1];
    for block in x.chunks_exact(segment) {
        for (a, p) in acc.iter_mut().zip(raw_periodogram(&mut planner, block, nfft)) {
            *a += p;
        }
    }
    let scale = dt / (segment as f64 * count as f64);
    let df = 1.0 / (nfft as f64 * dt);
    Ok(Spectrum {
        freqs: (0..acc.len()).map(|k| k as f64 * df).collect(),
        psd: acc.into_iter().map(|p| p * scale).collect(),
        df,
    })
}
