//! Shared fixtures for the criterion benches.

use ajwave_core::{DesignProblem, SimConfig};

/// Chip duration used throughout the benches.
pub const TC: f64 = 1e-9;

/// Design problems at the three published target frequencies.
pub fn published_problems() -> Vec<DesignProblem> {
    ajwave_core::published::ALL
        .iter()
        .map(|(f, _)| DesignProblem::new(*f, TC, 5).expect("in band"))
        .collect()
}

/// Default link with a short run length.
pub fn short_link(n_bits: u64) -> SimConfig {
    SimConfig { n_bits, ..SimConfig::default() }
}
