use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::ThConfig;
use crate::error::{Error, Result};

/// Frequency-domain limiter operating on one bit block at a time.
///
/// Each block is zero-padded to the next power of two. The received and the
/// reference block share the normalisation `P = |X|²·dt/L`; any received bin
/// above `λ_C = K·max P_TH` is rescaled onto `λ_C` with its phase kept.
pub struct Clipper {
    k: f64,
    block: usize,
    dt: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    rx_buf: Vec<Complex<f64>>,
    ref_buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl Clipper {
    pub fn new(k: f64, cfg: &ThConfig) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidParameter(format!("clipper K must be positive, got {k}")));
        }
        let block = cfg.bit_samples();
        let nfft = block.next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(nfft);
        let inv = planner.plan_fft_inverse(nfft);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Ok(Self {
            k,
            block,
            dt: cfg.dt,
            fwd,
            inv,
            rx_buf: vec![Complex::default(); nfft],
            ref_buf: vec![Complex::default(); nfft],
            scratch: vec![Complex::default(); scratch_len],
        })
    }

    pub fn block_len(&self) -> usize {
        self.block
    }

    pub fn nfft(&self) -> usize {
        self.rx_buf.len()
    }

    fn load(buf: &mut [Complex<f64>], x: &[f64]) {
        buf.iter_mut().for_each(|c| *c = Complex::default());
        buf.iter_mut().zip(x).for_each(|(c, &v)| c.re = v);
    }

    /// `λ_C` for a reference block.
    pub fn threshold(&mut self, reference: &[f64]) -> Result<f64> {
        self.check(reference.len())?;
        Self::load(&mut self.ref_buf, reference);
        self.fwd.process_with_scratch(&mut self.ref_buf, &mut self.scratch);
        let scale = self.dt / self.block as f64;
        let max = self.ref_buf.iter().map(|c| c.norm_sqr() * scale).fold(0.0, f64::max);
        Ok(self.k * max)
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.block {
            return Err(Error::LengthMismatch(format!("clip block has {len} samples, expected {}", self.block)));
        }
        Ok(())
    }

    /// Forward-transform `rx` and limit it against `reference`; returns `(λ_C, clipped bins)`.
    fn limit(&mut self, rx: &[f64], reference: &[f64]) -> Result<(f64, usize)> {
        self.check(rx.len())?;
        let lambda = self.threshold(reference)?;
        Self::load(&mut self.rx_buf, rx);
        self.fwd.process_with_scratch(&mut self.rx_buf, &mut self.scratch);
        let scale = self.dt / self.block as f64;
        let mut clipped = 0;
        for c in self.rx_buf.iter_mut() {
            let p = c.norm_sqr() * scale;
            if p > lambda {
                *c *= (lambda / p).sqrt();
                clipped += 1;
            }
        }
        Ok((lambda, clipped))
    }

    /// Clip one block in place; returns the number of bins that were limited.
    pub fn clip_block(&mut self, rx: &mut [f64], reference: &[f64]) -> Result<usize> {
        let (_, clipped) = self.limit(rx, reference)?;
        if clipped == 0 {
            return Ok(0);
        }
        self.inv.process_with_scratch(&mut self.rx_buf, &mut self.scratch);
        let norm = 1.0 / self.rx_buf.len() as f64;
        rx.iter_mut().zip(&self.rx_buf).for_each(|(y, c)| *y = c.re * norm);
        Ok(clipped)
    }

    /// Limited spectrum of a block, before the inverse transform: `(λ_C, PSD per bin)`.
    pub fn clipped_psd(&mut self, rx: &[f64], reference: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (lambda, _) = self.limit(rx, reference)?;
        Ok((lambda, self.spectrum_psd()))
    }

    /// PSD of a block with the clipper's normalisation.
    pub fn block_psd(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x.len())?;
        Self::load(&mut self.rx_buf, x);
        self.fwd.process_with_scratch(&mut self.rx_buf, &mut self.scratch);
        Ok(self.spectrum_psd())
    }

    fn spectrum_psd(&self) -> Vec<f64> {
        let scale = self.dt / self.block as f64;
        self.rx_buf.iter().map(|c| c.norm_sqr() * scale).collect()
    }
}

/// Clip `rx` block by block against the clean reference `clean` (same length, whole bits).
pub fn clip(rx: &[f64], clean: &[f64], k: f64, cfg: &ThConfig) -> Result<Vec<f64>> {
    if rx.len() != clean.len() {
        return Err(Error::LengthMismatch(format!("rx has {} samples, reference {}", rx.len(), clean.len())));
    }
    let mut clipper = Clipper::new(k, cfg)?;
    let block = clipper.block_len();
    if !rx.len().is_multiple_of(block) {
        return Err(Error::LengthMismatch(format!("{} samples is not a whole number of {block}-sample bits", rx.len())));
    }
    let mut out = rx.to_vec();
    for (y, r) in out.chunks_exact_mut(block).zip(clean.chunks_exact(block)) {
        clipper.clip_block(y, r)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jamming::JammerSpec;
    use crate::txrx::{apply_channel, modulate, ThCode};
    use crate::waveform::{gaussian_doublet, normalize};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn clean_block(cfg: &ThConfig) -> Vec<f64> {
        let w = normalize(&gaussian_doublet(1.0, cfg.tp, cfg.tp / 2.0, cfg.dt).unwrap()).unwrap();
        modulate(&[1], &ThCode { codes: vec![3, 0, 2] }, &w, cfg).unwrap()
    }

    #[test]
    fn clean_block_passes_unchanged() {
        let cfg = ThConfig::default();
        let s = clean_block(&cfg);
        let out = clip(&s, &s, 1.2, &cfg).unwrap();
        for (a, b) in out.iter().zip(&s) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn strong_tone_bin_is_limited_to_threshold() {
        let cfg = ThConfig::default();
        let s = clean_block(&cfg);
        // SJR = -30 dB against P_S = 3 / 12 ns
        let pj = 3.0 / 12e-9 * 1e3;
        let jam = JammerSpec::new(1.5e9, 0.4, pj).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rx = apply_channel(&s, &cfg, 0.0, &jam, 0.0, &mut rng);
        let mut clipper = Clipper::new(1.2, &cfg).unwrap();
        let pre = clipper.block_psd(&rx).unwrap();
        let bin = (1.5e9 * clipper.nfft() as f64 * cfg.dt).round() as usize;
        let (lambda, post) = clipper.clipped_psd(&rx, &s).unwrap();
        assert!(pre[bin] > 100.0 * lambda);
        assert!((post[bin] - lambda).abs() <= 1e-12 * lambda);
        assert!(post.iter().all(|&p| p <= lambda * (1.0 + 1e-12)));
    }

    #[test]
    fn mismatched_blocks_rejected() {
        let cfg = ThConfig::default();
        assert!(clip(&[0.0; 600], &[0.0; 599], 1.2, &cfg).is_err());
        assert!(clip(&[0.0; 500], &[0.0; 500], 1.2, &cfg).is_err());
        assert!(Clipper::new(0.0, &cfg).is_err());
    }
}
