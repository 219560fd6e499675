//! Anti-jamming waveform design for time-hopping spread-spectrum links.
//!
//! The crate is organised bottom-up:
//!
//! * [`waveform`] builds monocycles (rect-composite and Gaussian doublet) and PPM templates.
//! * [`spectrum`] holds periodogram / Welch PSD estimators.
//! * [`designer`] evaluates the closed-form jammer-correlation cost and minimises it
//!   over the unit sphere, by eigen-decomposition or by Powell's method.
//! * [`jamming`] synthesises single-tone jammers and models frequency-estimation error.
//! * [`txrx`] is the TH-PPM transmitter, channel, correlator receiver and clipper.
//! * [`harness`] runs seeded Monte Carlo BER experiments and sweeps.
//! * [`verify`] bundles the property checks behind `ajwave verify`.
//!
//! All quantities are SI internally (seconds, hertz, watts).

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod designer;
pub mod error;
pub mod grid;
pub mod harness;
pub mod io;
pub mod jamming;
pub mod linalg;
pub mod spectrum;
pub mod txrx;
pub mod verify;
pub mod waveform;

pub use designer::{
    build_gram, cost_a, cost_f, design_eigen, design_powell, design_spectrogram,
    oracle_max_correlation, CosineGram, DesignMethod, DesignProblem, DesignResult, PowellOptions,
};
pub use error::{Error, Result};
pub use harness::{
    calibrate_powers, run_ber, sweep, BerPoint, Calibration, FhatSource, SimConfig, SweepAxis,
    WaveformMode,
};
pub use jamming::{sample_fhat, stj_samples, FreqEstimatorModel, JammerSpec};
pub use spectrum::{psd, Spectrum};
pub use txrx::{CorrelatorOutput, ThCode, ThConfig};
pub use waveform::{gaussian_doublet, make_rect_composite, make_template, normalize, Template, Waveform};

/// Published N = 5 coefficient sets (T_c = 1 ns) for 1.5, 3.0 and 6.6 GHz.
pub mod published {
    pub const W5_1_5: [f64; 5] = [-0.441, 0.717, -0.517, 0.013, 0.157];
    pub const W5_3_0: [f64; 5] = [0.487, 0.523, 0.656, 0.241, 0.032];
    pub const W5_6_6: [f64; 5] = [-0.282, 0.662, 0.197, 0.370, -0.554];

    /// `(target frequency in Hz, coefficients)`.
    pub const ALL: [(f64, [f64; 5]); 3] = [(1.5e9, W5_1_5), (3.0e9, W5_3_0), (6.6e9, W5_6_6)];
}
