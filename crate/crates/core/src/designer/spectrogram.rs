use rayon::prelude::*;

use super::{design_eigen, DesignProblem};
use crate::error::Result;
use crate::spectrum::{psd, Spectrum};
use crate::waveform::{make_rect_composite, normalize};

/// PSD of the unit-energy waveform designed for each `f̂` in `f_grid`.
///
/// `template` supplies `T_c` and `N`; its own `f̂` is ignored. Rows are in
/// `f_grid` order.
pub fn design_spectrogram(
    f_grid: &[f64],
    template: &DesignProblem,
    dt: f64,
    nfft: usize,
) -> Result<Vec<Spectrum>> {
    f_grid
        .par_iter()
        .map(|&f| {
            let design = design_eigen(&template.with_fhat(f)?)?;
            let w = normalize(&make_rect_composite(&design.coeffs, template.tc(), dt)?)?;
            psd(w.samples(), dt, nfft)
        })
        .collect()
}
