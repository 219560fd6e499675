//! Monocycle waveforms and their PPM correlation templates.
//!
//! Every waveform is held both as an analytic descriptor ([`Shape`]) and as
//! uniform samples. Sample `k` stands for the cell `[k·dt, (k+1)·dt)`; analytic
//! shapes are evaluated at the cell midpoint, so a rect-composite pulse is
//! represented exactly whenever its segment boundaries fall on the grid.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid;

/// Analytic description of a monocycle.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// `N` equal-width rectangles covering `[0, T_c/2]`, segment `i` at level `coeffs[i]`.
    RectComposite { coeffs: Vec<f64>, tc: f64 },
    /// `A·(1 − 4π(2t'/T_p)²)·exp(−2π(2t'/T_p)²)` with `t' = t − T_m`, truncated to `[0, T_p]`.
    GaussianDoublet { amplitude: f64, tp: f64, tm: f64 },
}

/// A sampled monocycle. `gain` multiplies the descriptor; [`normalize`] adjusts it.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    shape: Shape,
    gain: f64,
    dt: f64,
    samples: Vec<f64>,
}

impl Waveform {
    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// Pulse duration T_p (support is `[0, T_p]`).
    pub fn duration(&self) -> f64 {
        match &self.shape {
            Shape::RectComposite { tc, .. } => tc / 2.0,
            Shape::GaussianDoublet { tp, .. } => *tp,
        }
    }

    /// Discrete energy `dt·Σ s²`.
    pub fn energy(&self) -> f64 {
        self.dt * self.samples.iter().map(|s| s * s).sum::<f64>()
    }

    /// Continuous-time value of the (gain-scaled) descriptor.
    pub fn eval(&self, t: f64) -> f64 {
        self.gain * raw_value(&self.shape, t)
    }

    /// Multiply by a scalar.
    pub fn scaled(&self, c: f64) -> Waveform {
        Waveform {
            shape: self.shape.clone(),
            gain: self.gain * c,
            dt: self.dt,
            samples: self.samples.iter().map(|s| s * c).collect(),
        }
    }

    /// Re-sample the same descriptor (and gain) on a different grid.
    pub fn resample(&self, dt: f64) -> Result<Waveform> {
        let mut w = match &self.shape {
            Shape::RectComposite { coeffs, tc } => make_rect_composite(coeffs, *tc, dt)?,
            Shape::GaussianDoublet { amplitude, tp, tm } => gaussian_doublet(*amplitude, *tp, *tm, dt)?,
        };
        w.gain = self.gain;
        for s in &mut w.samples {
            *s *= self.gain;
        }
        Ok(w)
    }
}

fn raw_value(shape: &Shape, t: f64) -> f64 {
    match shape {
        Shape::RectComposite { coeffs, tc } => {
            let width = tc / (2.0 * coeffs.len() as f64);
            if t < 0.0 || t >= tc / 2.0 {
                return 0.0;
            }
            let i = ((t / width).floor() as usize).min(coeffs.len() - 1);
            coeffs[i]
        }
        Shape::GaussianDoublet { amplitude, tp, tm } => {
            if t < 0.0 || t > *tp {
                return 0.0;
            }
            doublet_profile(*amplitude, *tp, t - tm)
        }
    }
}

/// Untruncated doublet evaluated at offset `u` from its centre.
pub fn doublet_profile(amplitude: f64, tp: f64, u: f64) -> f64 {
    let x = 2.0 * u / tp;
    let x2 = x * x;
    amplitude * (1.0 - 4.0 * PI * x2) * (-2.0 * PI * x2).exp()
}

/// Piecewise-constant waveform with `coeffs.len()` segments over `[0, T_c/2]`.
///
/// The raw construction uses level `a_i` on segment `i` (no scaling).
pub fn make_rect_composite(coeffs: &[f64], tc: f64, dt: f64) -> Result<Waveform> {
    let n = coeffs.len();
    if n == 0 {
        return Err(Error::InvalidParameter("rect composite needs at least one coefficient".into()));
    }
    if coeffs.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidParameter("coefficients must be finite".into()));
    }
    if !(tc > 0.0) {
        return Err(Error::InvalidParameter(format!("T_c must be positive, got {tc:e}")));
    }
    let per_segment = grid::steps(tc / (2.0 * n as f64), dt, "T_c/(2N)")?;
    if per_segment == 0 {
        return Err(Error::SamplingGrid("segment shorter than one sample".into()));
    }
    let samples = coeffs
        .iter()
        .flat_map(|&a| std::iter::repeat_n(a, per_segment))
        .collect();
    Ok(Waveform {
        shape: Shape::RectComposite { coeffs: coeffs.to_vec(), tc },
        gain: 1.0,
        dt,
        samples,
    })
}

/// Gaussian doublet centred at `tm`, sampled at cell midpoints over `[0, T_p]`.
pub fn gaussian_doublet(amplitude: f64, tp: f64, tm: f64, dt: f64) -> Result<Waveform> {
    if !(tp > 0.0) || !amplitude.is_finite() || !tm.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "doublet needs T_p > 0 and finite A, T_m (got T_p = {tp:e})"
        )));
    }
    let n = grid::steps(tp, dt, "T_p")?;
    let samples = (0..n)
        .map(|k| doublet_profile(amplitude, tp, (k as f64 + 0.5) * dt - tm))
        .collect();
    Ok(Waveform {
        shape: Shape::GaussianDoublet { amplitude, tp, tm },
        gain: 1.0,
        dt,
        samples,
    })
}

/// Scale to unit discrete energy.
pub fn normalize(w: &Waveform) -> Result<Waveform> {
    let energy = w.energy();
    if !(energy > 0.0) || !energy.is_finite() {
        return Err(Error::ZeroEnergy);
    }
    Ok(w.scaled(1.0 / energy.sqrt()))
}

/// PPM correlation template `v(t) = w(t) − w(t − δ)` over one chip.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    samples: Vec<f64>,
    dt: f64,
    delta: f64,
}

impl Template {
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Length of the template in seconds (one chip).
    pub fn span(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }

    pub fn energy(&self) -> f64 {
        self.dt * self.samples.iter().map(|s| s * s).sum::<f64>()
    }
}

/// Build the template for PPM shift `delta` on a chip of length `chip`.
pub fn make_template(w: &Waveform, delta: f64, chip: f64) -> Result<Template> {
    let dt = w.dt();
    if !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be nonnegative, got {delta:e}")));
    }
    let shift = grid::steps(delta, dt, "delta")?;
    let chip_len = grid::steps(chip, dt, "T_c")?;
    let wlen = w.samples().len();
    if shift + wlen > chip_len {
        return Err(Error::TemplateOverflow {
            needed: (shift + wlen) as f64 * dt,
            chip,
        });
    }
    let mut samples = vec![0.0; chip_len];
    for (k, &s) in w.samples().iter().enumerate() {
        samples[k] += s;
        samples[k + shift] -= s;
    }
    Ok(Template { samples, dt, delta })
}
