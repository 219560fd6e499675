//! Seeded Monte Carlo BER engine, power calibration and parameter sweeps.
//!
//! Every trial transmits one bit. Trial `i` draws from its own ChaCha8 stream
//! `(seed, stream = i)` in the fixed order: data bit, TH code, delay `τ`
//! (uniform over a frame, on the grid), jammer phase (if randomised), and `f̂`
//! (if drawn per trial). Error counts are reduced with integer sums, so
//! results do not depend on the worker count.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::designer::{design_eigen, DesignProblem};
use crate::error::{Error, Result};
use crate::spectrum::{welch_psd, Spectrum};
use crate::jamming::{clamp_to_band, sample_fhat, FreqEstimatorModel, JammerSpec};
use crate::txrx::{
    apply_channel, channel_components, correlate, correlate_instrumented, decide, gen_th_code,
    modulate, Clipper, ThConfig,
};
use crate::waveform::{gaussian_doublet, make_rect_composite, make_template, normalize, Template, Waveform};

/// Where the optimised waveform's design frequency comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FhatSource {
    /// `f̂ = f_J + ε` with `ε` from the estimator model.
    Estimated,
    /// A fixed design frequency in hertz, independent of `f_J`.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveformMode {
    Optimized(FhatSource),
    GaussianDoublet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipperConfig {
    pub enabled: bool,
    pub k: f64,
}

impl Default for ClipperConfig {
    fn default() -> Self {
        Self { enabled: false, k: 1.2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub th: ThConfig,
    /// Frequency, phase and on/off switch; the power is derived from `sjr_db`.
    pub jammer: JammerSpec,
    pub ebn0_db: f64,
    pub sjr_db: f64,
    pub waveform_mode: WaveformMode,
    /// Segment count `N` of the optimised rect-composite pulse.
    pub n_segments: usize,
    pub clipper: ClipperConfig,
    pub estimator: FreqEstimatorModel,
    /// Draw `θ_J` uniformly on `[0, 2π)` per trial instead of using `jammer.theta`.
    pub random_theta: bool,
    pub n_bits: u64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            th: ThConfig::default(),
            jammer: JammerSpec { fj: 1.5e9, theta: 0.0, power: 0.0, enabled: true },
            ebn0_db: 15.0,
            sjr_db: -10.0,
            waveform_mode: WaveformMode::Optimized(FhatSource::Estimated),
            n_segments: 5,
            clipper: ClipperConfig::default(),
            estimator: FreqEstimatorModel::default(),
            random_theta: false,
            n_bits: 200_000,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.th.validate()?;
        self.jammer.validate()?;
        if self.n_bits == 0 {
            return Err(Error::InvalidParameter("n_bits must be at least 1".into()));
        }
        if self.n_segments == 0 {
            return Err(Error::InvalidParameter("waveform N must be at least 1".into()));
        }
        if self.ebn0_db.is_nan() || self.sjr_db.is_nan() {
            return Err(Error::InvalidParameter("E_b/N_0 and SJR must be numbers".into()));
        }
        if self.clipper.enabled && !(self.clipper.k > 0.0) {
            return Err(Error::InvalidParameter("clipper K must be positive".into()));
        }
        FreqEstimatorModel::new(self.estimator.mu, self.estimator.sigma)?;
        Ok(())
    }

    /// Whether the optimised design changes from trial to trial.
    fn redesign_per_trial(&self) -> bool {
        matches!(self.waveform_mode, WaveformMode::Optimized(FhatSource::Estimated))
            && !self.estimator.is_deterministic()
    }
}

/// Derived powers for a configuration (unit-energy pulses).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub eb: f64,
    pub ps: f64,
    pub pj: f64,
    pub n0: f64,
    pub noise_sigma: f64,
}

/// `E_b = α²N_f`, `P_S = E_b/T_b`, `P_J = P_S·10^(−SJR/10)`, `N_0 = E_b·10^(−E_b/N_0/10)`, `σ = √(N_0/(2dt))`.
pub fn calibrate_powers(cfg: &SimConfig) -> Calibration {
    let th = &cfg.th;
    let eb = th.alpha * th.alpha * th.nf as f64;
    let ps = eb / th.tb();
    let pj = ps * 10f64.powf(-cfg.sjr_db / 10.0);
    let n0 = eb * 10f64.powf(-cfg.ebn0_db / 10.0);
    Calibration { eb, ps, pj, n0, noise_sigma: (n0 / (2.0 * th.dt)).sqrt() }
}

/// One BER measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub value: f64,
    /// Completed trials (aborted trials excluded).
    pub n_bits: u64,
    pub n_errors: u64,
    pub ber: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub clamp_count: u64,
    /// Trials whose waveform design failed.
    pub n_aborted: u64,
    /// Design and jammer frequencies of a 2-D grid cell.
    pub grid: Option<(f64, f64)>,
}

const Z95: f64 = 1.959_963_984_540_054;

/// Wilson 95% interval; with no errors, `[0, 3/n]`.
pub fn wilson_interval(errors: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    if errors == 0 {
        return (0.0, (3.0 / nf).min(1.0));
    }
    let p = errors as f64 / nf;
    let z2 = Z95 * Z95;
    let centre = (p + z2 / (2.0 * nf)) / (1.0 + z2 / nf);
    let half = Z95 / (1.0 + z2 / nf) * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

impl BerPoint {
    fn from_counts(value: f64, counts: Counts, seed: u64) -> Self {
        let ber = if counts.bits == 0 { 0.0 } else { counts.errors as f64 / counts.bits as f64 };
        let (ci_low, ci_high) = wilson_interval(counts.errors, counts.bits);
        Self {
            value,
            n_bits: counts.bits,
            n_errors: counts.errors,
            ber,
            ci_low,
            ci_high,
            seed,
            clamp_count: counts.clamped,
            n_aborted: counts.aborted,
            grid: None,
        }
    }

    pub fn overlaps(&self, other: &BerPoint) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    bits: u64,
    errors: u64,
    clamped: u64,
    aborted: u64,
}

impl Counts {
    fn merge(self, o: Counts) -> Counts {
        Counts {
            bits: self.bits + o.bits,
            errors: self.errors + o.errors,
            clamped: self.clamped + o.clamped,
            aborted: self.aborted + o.aborted,
        }
    }
}

/// A transmit pulse with its correlation template.
struct Pulse {
    w: Waveform,
    v: Template,
}

fn optimized_pulse(cfg: &SimConfig, fhat: f64) -> Result<(Pulse, bool, bool)> {
    let th = &cfg.th;
    let (fhat, clamped) = clamp_to_band(fhat, cfg.n_segments, th.tc);
    let design = design_eigen(&DesignProblem::new(fhat, th.tc, cfg.n_segments)?)?;
    let w = normalize(&make_rect_composite(&design.coeffs, th.tc, th.dt)?)?;
    let v = make_template(&w, th.delta, th.tc)?;
    Ok((Pulse { w, v }, clamped, design.converged))
}

fn doublet_pulse(th: &ThConfig) -> Result<Pulse> {
    let w = normalize(&gaussian_doublet(1.0, th.tp, th.tp / 2.0, th.dt)?)?;
    let v = make_template(&w, th.delta, th.tc)?;
    Ok(Pulse { w, v })
}

/// The pulse shared by all trials, or `None` when it is redesigned per trial.
fn shared_pulse(cfg: &SimConfig) -> Result<Option<(Pulse, bool)>> {
    match cfg.waveform_mode {
        WaveformMode::GaussianDoublet => Ok(Some((doublet_pulse(&cfg.th)?, false))),
        _ if cfg.redesign_per_trial() => Ok(None),
        WaveformMode::Optimized(src) => {
            let fhat = match src {
                FhatSource::Fixed(f) => f,
                FhatSource::Estimated => cfg.jammer.fj + cfg.estimator.mu,
            };
            let (pulse, clamped, converged) = optimized_pulse(cfg, fhat)?;
            if !converged {
                return Err(Error::InvalidParameter(format!("waveform design at {fhat:e} Hz did not converge")));
            }
            Ok(Some((pulse, clamped)))
        }
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Per-trial link state after the random draws.
struct Draw {
    bit: u8,
    code: crate::txrx::ThCode,
    tau: f64,
    jammer: JammerSpec,
}

fn draw<R: Rng>(cfg: &SimConfig, jammer: &JammerSpec, rng: &mut R) -> Result<Draw> {
    let th = &cfg.th;
    let bit = rng.random_range(0..2u8);
    let code = gen_th_code(th.nf, th.nc, rng)?;
    let tau = rng.random_range(0..th.frame_samples()) as f64 * th.dt;
    let mut jammer = *jammer;
    if cfg.random_theta {
        jammer.theta = rng.random_range(0.0..2.0 * PI);
    }
    Ok(Draw { bit, code, tau, jammer })
}

fn link_jammer(cfg: &SimConfig, cal: &Calibration) -> JammerSpec {
    if cfg.jammer.enabled && cal.pj > 0.0 {
        JammerSpec { power: cal.pj, ..cfg.jammer }
    } else {
        JammerSpec::disabled()
    }
}

fn run_trial(
    cfg: &SimConfig,
    cal: &Calibration,
    jammer: &JammerSpec,
    shared: Option<&(Pulse, bool)>,
    clipper: Option<&mut Clipper>,
    trial: u64,
) -> Result<Counts> {
    let th = &cfg.th;
    let mut rng = trial_rng(cfg.seed, trial);
    let d = draw(cfg, jammer, &mut rng)?;
    let owned;
    let (pulse, clamped) = match shared {
        Some((p, c)) => (p, *c),
        None => {
            let fhat = sample_fhat(&cfg.estimator, cfg.jammer.fj, &mut rng);
            let (p, clamped, converged) = optimized_pulse(cfg, fhat)?;
            if !converged {
                return Ok(Counts { aborted: 1, clamped: clamped as u64, ..Counts::default() });
            }
            owned = p;
            (&owned, clamped)
        }
    };
    let tx = modulate(&[d.bit], &d.code, &pulse.w, th)?;
    let mut rx = apply_channel(&tx, th, d.tau, &d.jammer, cal.noise_sigma, &mut rng);
    if let Some(clipper) = clipper {
        let start = crate::grid::snap(d.tau, th.dt);
        let clean: Vec<f64> = tx.iter().map(|x| th.alpha * x).collect();
        clipper.clip_block(&mut rx[start..start + tx.len()], &clean)?;
    }
    let out = correlate(&rx, &pulse.v, &d.code, th, d.tau, 0)?;
    Ok(Counts {
        bits: 1,
        errors: (decide(&out) != d.bit) as u64,
        clamped: clamped as u64,
        aborted: 0,
    })
}

fn run_counts(cfg: &SimConfig) -> Result<Counts> {
    cfg.validate()?;
    let cal = calibrate_powers(cfg);
    let jammer = link_jammer(cfg, &cal);
    let shared = shared_pulse(cfg)?;
    let clip = cfg.clipper;
    (0..cfg.n_bits)
        .into_par_iter()
        .map_init(
            || clip.enabled.then(|| Clipper::new(clip.k, &cfg.th)).transpose(),
            |clipper, i| {
                let clipper = match clipper {
                    Ok(c) => c.as_mut(),
                    Err(e) => return Err(e.clone()),
                };
                run_trial(cfg, &cal, &jammer, shared.as_ref(), clipper, i)
            },
        )
        .try_reduce(Counts::default, |a, b| Ok(a.merge(b)))
}

/// Monte Carlo BER on the current rayon pool. `value` of the point is 0.
pub fn run_ber(cfg: &SimConfig) -> Result<BerPoint> {
    Ok(BerPoint::from_counts(0.0, run_counts(cfg)?, cfg.seed))
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(f)
}

/// [`run_ber`] on a dedicated pool of `workers` threads.
pub fn run_ber_with_workers(cfg: &SimConfig, workers: usize) -> Result<BerPoint> {
    with_workers(workers, || run_ber(cfg))
}

/// Welch PSD of a contiguous received stretch and, with the clipper on, of the clipped stretch.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedPsd {
    pub received: Spectrum,
    pub clipped: Option<Spectrum>,
}

/// Transmit `n_bits` back-to-back bits with `τ = 0` and estimate the received PSD,
/// averaging over bit blocks. A per-trial redesign falls back to the nominal `f_J + μ`.
pub fn received_psd(cfg: &SimConfig, n_bits: usize, nfft: usize) -> Result<ReceivedPsd> {
    cfg.validate()?;
    if n_bits == 0 {
        return Err(Error::Empty("received stretch"));
    }
    let th = &cfg.th;
    let cal = calibrate_powers(cfg);
    let jammer = link_jammer(cfg, &cal);
    let pulse = match shared_pulse(cfg)? {
        Some((p, _)) => p,
        None => optimized_pulse(cfg, cfg.jammer.fj + cfg.estimator.mu)?.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let bits: Vec<u8> = (0..n_bits).map(|_| rng.random_range(0..2u8)).collect();
    let code = gen_th_code(th.nf * n_bits, th.nc, &mut rng)?;
    let tx = modulate(&bits, &code, &pulse.w, th)?;
    let mut rx = apply_channel(&tx, th, 0.0, &jammer, cal.noise_sigma, &mut rng);
    let block = th.bit_samples();
    let received = welch_psd(&rx, th.dt, block, nfft)?;
    let clipped = if cfg.clipper.enabled {
        let mut clipper = Clipper::new(cfg.clipper.k, th)?;
        for (r, t) in rx.chunks_exact_mut(block).zip(tx.chunks_exact(block)) {
            let clean: Vec<f64> = t.iter().map(|x| th.alpha * x).collect();
            clipper.clip_block(r, &clean)?;
        }
        Some(welch_psd(&rx, th.dt, block, nfft)?)
    } else {
        None
    };
    Ok(ReceivedPsd { received, clipped })
}

/// Per-bit correlator breakdown from an instrumented run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstrumentedBit {
    pub bit_index: u64,
    pub r: f64,
    pub s: f64,
    pub j: f64,
    pub n: f64,
    pub tau: f64,
}

/// Run `cfg.n_bits` trials keeping `R_k = S_k + J_k + N_k` per bit.
///
/// The clipper is bypassed here: it is nonlinear, so the breakdown would not add up.
pub fn run_instrumented(cfg: &SimConfig) -> Result<Vec<InstrumentedBit>> {
    cfg.validate()?;
    let cal = calibrate_powers(cfg);
    let jammer = link_jammer(cfg, &cal);
    let shared = shared_pulse(cfg)?;
    let th = &cfg.th;
    (0..cfg.n_bits)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(cfg.seed, i);
            let d = draw(cfg, &jammer, &mut rng)?;
            let owned;
            let pulse = match &shared {
                Some((p, _)) => p,
                None => {
                    let fhat = sample_fhat(&cfg.estimator, cfg.jammer.fj, &mut rng);
                    owned = optimized_pulse(cfg, fhat)?.0;
                    &owned
                }
            };
            let tx = modulate(&[d.bit], &d.code, &pulse.w, th)?;
            let parts = channel_components(&tx, th, d.tau, &d.jammer, cal.noise_sigma, &mut rng);
            let out = correlate_instrumented(&parts, &pulse.v, &d.code, th, d.tau, 0)?;
            let b = out.components.expect("instrumented output");
            Ok(InstrumentedBit { bit_index: i, r: out.r, s: b.s, j: b.j, n: b.n, tau: d.tau })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    Fj,
    Sjr,
    EbN0,
    MuEps,
    SigmaEps,
    /// Design frequency × jammer frequency over the same grid.
    FhatVsFj,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 6] =
        [SweepAxis::Fj, SweepAxis::Sjr, SweepAxis::EbN0, SweepAxis::MuEps, SweepAxis::SigmaEps, SweepAxis::FhatVsFj];

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Fj => "fj",
            SweepAxis::Sjr => "sjr",
            SweepAxis::EbN0 => "ebn0",
            SweepAxis::MuEps => "mu_eps",
            SweepAxis::SigmaEps => "sigma_eps",
            SweepAxis::FhatVsFj => "fhat_vs_fj",
        }
    }

    /// Whether grid values are frequencies (hertz) rather than decibels.
    pub fn is_frequency(&self) -> bool {
        !matches!(self, SweepAxis::Sjr | SweepAxis::EbN0)
    }

    fn apply(&self, cfg: &SimConfig, value: f64) -> SimConfig {
        let mut c = cfg.clone();
        match self {
            SweepAxis::Fj => c.jammer.fj = value,
            SweepAxis::Sjr => c.sjr_db = value,
            SweepAxis::EbN0 => c.ebn0_db = value,
            SweepAxis::MuEps => c.estimator.mu = value,
            SweepAxis::SigmaEps => c.estimator.sigma = value,
            SweepAxis::FhatVsFj => unreachable!("2-D axis is expanded by sweep"),
        }
        c
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown sweep axis `{s}`")))
    }
}

/// One point per grid value; for [`SweepAxis::FhatVsFj`] one point per
/// `(f̂, f_J)` pair, design frequency major.
pub fn sweep(cfg: &SimConfig, axis: SweepAxis, grid: &[f64]) -> Result<Vec<BerPoint>> {
    if grid.is_empty() {
        return Err(Error::Empty("sweep grid"));
    }
    if axis == SweepAxis::FhatVsFj {
        let mut out = Vec::with_capacity(grid.len() * grid.len());
        for &fhat in grid {
            for &fj in grid {
                let mut c = cfg.clone();
                c.waveform_mode = WaveformMode::Optimized(FhatSource::Fixed(fhat));
                c.jammer.fj = fj;
                let mut p = BerPoint::from_counts(fhat, run_counts(&c)?, cfg.seed);
                p.grid = Some((fhat, fj));
                out.push(p);
            }
        }
        return Ok(out);
    }
    grid.iter()
        .map(|&v| Ok(BerPoint::from_counts(v, run_counts(&axis.apply(cfg, v))?, cfg.seed)))
        .collect()
}

/// [`sweep`] on a dedicated pool of `workers` threads.
pub fn sweep_with_workers(cfg: &SimConfig, axis: SweepAxis, grid: &[f64], workers: usize) -> Result<Vec<BerPoint>> {
    with_workers(workers, || sweep(cfg, axis, grid))
}
