//! Single-tone jammer synthesis and the jammer-frequency estimation error model.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Lowest design frequency a clamped estimate may take, and its distance from the band edge.
pub const FHAT_MARGIN: f64 = 1e6;

/// `j(t) = √(2P_J)·cos(2π f_J t + θ_J)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JammerSpec {
    pub fj: f64,
    pub theta: f64,
    pub power: f64,
    pub enabled: bool,
}

impl JammerSpec {
    pub fn new(fj: f64, theta: f64, power: f64) -> Result<Self> {
        let spec = Self { fj, theta, power, enabled: true };
        spec.validate()?;
        Ok(spec)
    }

    pub fn disabled() -> Self {
        Self { fj: 0.0, theta: 0.0, power: 0.0, enabled: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.power >= 0.0) || !self.power.is_finite() {
            return Err(Error::InvalidParameter(format!("P_J must be nonnegative, got {:e}", self.power)));
        }
        if self.enabled && !(self.fj > 0.0 && self.fj.is_finite()) {
            return Err(Error::InvalidParameter(format!("f_J must be positive, got {:e}", self.fj)));
        }
        if !self.theta.is_finite() {
            return Err(Error::InvalidParameter("theta_J must be finite".into()));
        }
        Ok(())
    }

    pub fn amplitude(&self) -> f64 {
        (2.0 * self.power).sqrt()
    }

    /// Tone value at time `t` (0 when disabled).
    pub fn at(&self, t: f64) -> f64 {
        if !self.enabled {
            return 0.0;
        }
        self.amplitude() * (2.0 * PI * self.fj * t + self.theta).cos()
    }
}

/// Tone samples at `t0 + k·dt`, `k = 0..n`.
pub fn stj_samples(spec: &JammerSpec, t0: f64, n: usize, dt: f64) -> Vec<f64> {
    (0..n).map(|k| spec.at(t0 + k as f64 * dt)).collect()
}

/// `ε_f = f̂_J − f_J ~ N(μ, σ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FreqEstimatorModel {
    pub mu: f64,
    pub sigma: f64,
}

impl FreqEstimatorModel {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() || !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("need finite mu and sigma >= 0, got {mu:e}, {sigma:e}")));
        }
        Ok(Self { mu, sigma })
    }

    pub fn is_deterministic(&self) -> bool {
        self.sigma == 0.0
    }
}

/// Draw `f̂ = f_J + ε`. Exactly `f_J + μ` when `σ = 0` (no randomness consumed).
pub fn sample_fhat<R: Rng + ?Sized>(model: &FreqEstimatorModel, fj: f64, rng: &mut R) -> f64 {
    if model.sigma == 0.0 {
        return fj + model.mu;
    }
    let eps = Normal::new(model.mu, model.sigma).expect("sigma validated");
    fj + eps.sample(rng)
}

/// Clamp an estimate into `[f_min, 2N/T_c − f_min]`; the flag reports whether it moved.
pub fn clamp_to_band(fhat: f64, n: usize, tc: f64) -> (f64, bool) {
    let lo = FHAT_MARGIN;
    let hi = 2.0 * n as f64 / tc - FHAT_MARGIN;
    let clamped = fhat.clamp(lo, hi);
    (clamped, clamped != fhat)
}
