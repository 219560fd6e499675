//! TH-PPM transmitter, channel, correlator receiver and clipper.
//!
//! Timeline conventions: transmitted bit `k` starts at sample `k·bit_samples`;
//! the channel delays the whole transmission by `τ` (snapped to the grid) and
//! the jammer is evaluated on the receiver's absolute time axis `t = i·dt`.

mod channel;
mod clipper;

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid;
use crate::waveform::{Template, Waveform};

pub use channel::{apply_channel, channel_components, ChannelComponents};
pub use clipper::{clip, Clipper};

/// TH-PPM timing and system parameters (SI units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThConfig {
    pub tc: f64,
    pub tf: f64,
    pub nf: usize,
    pub nc: usize,
    pub delta: f64,
    pub tp: f64,
    pub dt: f64,
    pub alpha: f64,
}

impl Default for ThConfig {
    /// T_c = 1 ns, T_f = 4 ns, N_f = 3, N_c = 4, δ = 0.5 ns, T_p = 0.5 ns, dt = 0.02 ns, α = 1.
    fn default() -> Self {
        Self {
            tc: 1e-9,
            tf: 4e-9,
            nf: 3,
            nc: 4,
            delta: 0.5e-9,
            tp: 0.5e-9,
            dt: grid::DEFAULT_DT,
            alpha: 1.0,
        }
    }
}

impl ThConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nf == 0 || self.nc == 0 {
            return Err(Error::InvalidParameter("N_f and N_c must be at least 1".into()));
        }
        if !(self.tc > 0.0 && self.tp > 0.0 && self.delta >= 0.0) {
            return Err(Error::InvalidParameter("T_c, T_p must be positive and delta nonnegative".into()));
        }
        if !self.alpha.is_finite() {
            return Err(Error::InvalidParameter("alpha must be finite".into()));
        }
        let chip = grid::steps(self.tc, self.dt, "T_c")?;
        let frame = grid::steps(self.tf, self.dt, "T_f")?;
        let delta = grid::steps(self.delta, self.dt, "delta")?;
        let tp = grid::steps(self.tp, self.dt, "T_p")?;
        if frame != self.nc * chip {
            return Err(Error::InvalidParameter(format!(
                "T_f = {:e} s must equal N_c·T_c = {:e} s",
                self.tf,
                self.nc as f64 * self.tc
            )));
        }
        if tp > chip {
            return Err(Error::InvalidParameter("T_p must not exceed T_c".into()));
        }
        if delta + tp > chip {
            return Err(Error::TemplateOverflow { needed: self.delta + self.tp, chip: self.tc });
        }
        Ok(())
    }

    pub fn tb(&self) -> f64 {
        self.nf as f64 * self.tf
    }

    pub fn chip_samples(&self) -> usize {
        grid::snap(self.tc, self.dt)
    }

    pub fn frame_samples(&self) -> usize {
        grid::snap(self.tf, self.dt)
    }

    pub fn bit_samples(&self) -> usize {
        self.nf * self.frame_samples()
    }

    pub fn delta_samples(&self) -> usize {
        grid::snap(self.delta, self.dt)
    }
}

/// Per-frame chip indices `c_m ∈ {0, …, N_c − 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThCode {
    pub codes: Vec<usize>,
}

impl ThCode {
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

pub fn gen_th_code<R: Rng + ?Sized>(n_frames: usize, nc: usize, rng: &mut R) -> Result<ThCode> {
    if nc == 0 {
        return Err(Error::InvalidParameter("N_c must be at least 1".into()));
    }
    Ok(ThCode { codes: (0..n_frames).map(|_| rng.random_range(0..nc)).collect() })
}

/// Sampled `s_PPM(t)`: pulse `m` at `m·T_f + c_m·T_c + δ·d_{⌊m/N_f⌋}`.
pub fn modulate(bits: &[u8], code: &ThCode, w: &Waveform, cfg: &ThConfig) -> Result<Vec<f64>> {
    if code.len() != bits.len() * cfg.nf {
        return Err(Error::LengthMismatch(format!(
            "{} code entries for {} bits × N_f = {}",
            code.len(),
            bits.len(),
            cfg.nf
        )));
    }
    if bits.iter().any(|&b| b > 1) {
        return Err(Error::InvalidParameter("bits must be 0 or 1".into()));
    }
    let frame = cfg.frame_samples();
    let chip = cfg.chip_samples();
    let shift = cfg.delta_samples();
    let pulse = w.samples();
    let mut out = vec![0.0; bits.len() * cfg.bit_samples()];
    for (m, &c) in code.codes.iter().enumerate() {
        if c >= cfg.nc {
            return Err(Error::InvalidParameter(format!("code entry {c} outside 0..{}", cfg.nc)));
        }
        let offset = c * chip + bits[m / cfg.nf] as usize * shift;
        if offset + pulse.len() > frame {
            return Err(Error::InvalidParameter(format!("pulse {m} overflows its frame")));
        }
        let start = m * frame + offset;
        out[start..start + pulse.len()].copy_from_slice(pulse);
    }
    Ok(out)
}

/// Signal / jammer / noise parts of a correlator output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakdown {
    pub s: f64,
    pub j: f64,
    pub n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorOutput {
    pub r: f64,
    pub components: Option<Breakdown>,
}

fn correlate_raw(rx: &[f64], tmpl: &Template, code: &ThCode, cfg: &ThConfig, tau_samples: usize, k: usize) -> Result<f64> {
    let frame = cfg.frame_samples();
    let chip = cfg.chip_samples();
    let v = tmpl.samples();
    let frames = k * cfg.nf..(k + 1) * cfg.nf;
    if frames.end > code.len() {
        return Err(Error::LengthMismatch(format!("bit {k} beyond the {}-frame code", code.len())));
    }
    let mut acc = 0.0;
    for m in frames {
        let start = tau_samples + m * frame + code.codes[m] * chip;
        let window = rx.get(start..start + v.len()).ok_or_else(|| {
            Error::LengthMismatch(format!("received signal ({} samples) shorter than bit {k}", rx.len()))
        })?;
        acc += window.iter().zip(v).map(|(r, t)| r * t).sum::<f64>();
    }
    Ok(tmpl.dt() * acc)
}

/// Correlator output `R_k` for bit `k` with a receiver synchronised to `τ`.
pub fn correlate(rx: &[f64], tmpl: &Template, code: &ThCode, cfg: &ThConfig, tau: f64, k: usize) -> Result<CorrelatorOutput> {
    let r = correlate_raw(rx, tmpl, code, cfg, grid::snap(tau, cfg.dt), k)?;
    Ok(CorrelatorOutput { r, components: None })
}

/// Correlate each channel component separately as well as their sum.
pub fn correlate_instrumented(
    parts: &ChannelComponents,
    tmpl: &Template,
    code: &ThCode,
    cfg: &ThConfig,
    tau: f64,
    k: usize,
) -> Result<CorrelatorOutput> {
    let ts = grid::snap(tau, cfg.dt);
    let s = correlate_raw(&parts.signal, tmpl, code, cfg, ts, k)?;
    let j = correlate_raw(&parts.jammer, tmpl, code, cfg, ts, k)?;
    let n = correlate_raw(&parts.noise, tmpl, code, cfg, ts, k)?;
    let r = correlate_raw(&parts.combined(), tmpl, code, cfg, ts, k)?;
    Ok(CorrelatorOutput { r, components: Some(Breakdown { s, j, n }) })
}

/// `d̂ = 0` iff `R_k ≥ 0`.
pub fn decide(out: &CorrelatorOutput) -> u8 {
    if out.r >= 0.0 {
        0
    } else {
        1
    }
}
