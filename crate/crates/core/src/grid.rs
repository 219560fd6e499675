//! Helpers for snapping durations onto the uniform sampling grid.

use crate::error::{Error, Result};

/// Default sampling interval: 0.02 ns.
pub const DEFAULT_DT: f64 = 0.02e-9;

const GRID_RTOL: f64 = 1e-9;

/// Number of `dt` steps in `span`, or an error if `span` is not an integer multiple of `dt`.
pub fn steps(span: f64, dt: f64, what: &str) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::SamplingGrid(format!("dt must be positive, got {dt:e}")));
    }
    if !(span >= 0.0) || !span.is_finite() {
        return Err(Error::SamplingGrid(format!("{what} must be nonnegative, got {span:e}")));
    }
    let ratio = span / dt;
    let rounded = ratio.round();
    if (ratio - rounded).abs() > GRID_RTOL * rounded.max(1.0) {
        return Err(Error::SamplingGrid(format!(
            "dt = {dt:e} s does not divide {what} = {span:e} s"
        )));
    }
    Ok(rounded as usize)
}

/// Nearest grid index to `t`.
pub fn snap(t: f64, dt: f64) -> usize {
    (t / dt).round().max(0.0) as usize
}

pub fn ns(x: f64) -> f64 {
    x * 1e-9
}

pub fn ghz(x: f64) -> f64 {
    x * 1e9
}
