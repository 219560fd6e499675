//! Brute-force evaluation of the template/jammer correlation
//!
//! ```text
//! R(z; θ, f) = ∫₀^{T_c} v(t) · cos(2π f (t + z) + θ) dt
//! ```
//!
//! directly from template samples, independent of the closed-form cost.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::waveform::Template;

/// Correlation with the template treated as constant on each sample cell and the
/// cosine integrated exactly over the cell.
pub fn correlation_exact(tmpl: &Template, f: f64, theta: f64, z: f64) -> f64 {
    let dt = tmpl.dt();
    if f == 0.0 {
        return dt * theta.cos() * tmpl.samples().iter().sum::<f64>();
    }
    let w = 2.0 * PI * f;
    let cell = 2.0 / w * (w * dt / 2.0).sin();
    tmpl.samples()
        .iter()
        .enumerate()
        .map(|(k, &v)| v * cell * (w * ((k as f64 + 0.5) * dt + z) + theta).cos())
        .sum()
}

/// Rectangle-rule correlation `dt·Σ v[k]·cos(2πf(k·dt + z) + θ)`, the rule the
/// sampled link uses.
pub fn correlation_sampled(tmpl: &Template, f: f64, theta: f64, z: f64) -> f64 {
    let dt = tmpl.dt();
    let w = 2.0 * PI * f;
    dt * tmpl
        .samples()
        .iter()
        .enumerate()
        .map(|(k, &v)| v * (w * (k as f64 * dt + z) + theta).cos())
        .sum::<f64>()
}

/// `max_z |R(z)|` over a dense grid `z = 0, s, 2s, … < 1/f`.
///
/// Requires `grid_step ≤ T_J/200`.
pub fn oracle_max_correlation(tmpl: &Template, f: f64, theta: f64, grid_step: f64) -> Result<f64> {
    if !(f > 0.0) || !f.is_finite() {
        return Err(Error::InvalidParameter(format!("jammer frequency must be positive, got {f:e}")));
    }
    let period = 1.0 / f;
    if !(grid_step > 0.0) || grid_step > period / 200.0 * (1.0 + 1e-12) {
        return Err(Error::SamplingGrid(format!(
            "oracle grid step {grid_step:e} s coarser than T_J/200 = {:e} s",
            period / 200.0
        )));
    }
    let steps = (period / grid_step).ceil() as usize;
    Ok((0..steps)
        .map(|j| correlation_exact(tmpl, f, theta, j as f64 * grid_step).abs())
        .fold(0.0, f64::max))
}

/// Oracle on a `T_J/4000` grid; the grid maximum then undershoots the true
/// maximum by at most `1 − cos(π/4000) ≈ 3.1e-7` relative.
pub fn oracle_cost(tmpl: &Template, f: f64, theta: f64) -> Result<f64> {
    oracle_max_correlation(tmpl, f, theta, 1.0 / (4000.0 * f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designer::cost_f;
    use crate::published::W5_3_0;
    use crate::waveform::{make_rect_composite, make_template};

    const TC: f64 = 1e-9;
    const DT: f64 = 0.02e-9;

    fn rect_template(a: &[f64]) -> Template {
        let w = make_rect_composite(a, TC, DT).unwrap();
        make_template(&w, TC / 2.0, TC).unwrap()
    }

    #[test]
    fn equal_weights_match_closed_form() {
        let a = [1.0 / 5f64.sqrt(); 5];
        let o = oracle_cost(&rect_template(&a), 2e9, 0.0).unwrap();
        let c = cost_f(2e9, &a, TC);
        // 2 GHz puts a zero of A_N on this flat pulse, so both sides vanish
        assert!((o - c).abs() <= 1e-3 * o.max(1e-15), "oracle {o:e} closed {c:e}");
        let a = [0.3, -0.1, 0.8, 0.2, -0.4];
        let c = cost_f(2e9, &a, TC);
        assert!(c < 1e-20, "A_N vanishes at f·T_c = 2 for any coefficients");
        let o = oracle_cost(&rect_template(&a), 2.3e9, 0.0).unwrap();
        let c = cost_f(2.3e9, &a, TC);
        assert!((o - c).abs() <= 1e-3 * o, "oracle {o:e} closed {c:e}");
    }

    #[test]
    fn phase_does_not_change_the_max() {
        let a = [0.2, -0.5, 0.4, 0.6, -0.1];
        let t = rect_template(&a);
        let base = oracle_cost(&t, 2.3e9, 0.0).unwrap();
        for theta in [0.4, 1.7, 3.0, 5.5] {
            let o = oracle_cost(&t, 2.3e9, theta).unwrap();
            assert!((o - base).abs() <= 1e-6 * base, "θ = {theta}");
        }
    }

    #[test]
    fn published_three_ghz_is_near_null() {
        let o = oracle_cost(&rect_template(&W5_3_0), 3e9, 0.0).unwrap();
        assert!(o * 1e9 <= 5e-3, "{:e}", o * 1e9);
    }

    #[test]
    fn coarse_grid_rejected() {
        let t = rect_template(&[1.0; 5]);
        assert!(matches!(oracle_max_correlation(&t, 1e9, 0.0, 1e-11), Err(Error::SamplingGrid(_))));
        assert!(oracle_max_correlation(&t, 1e9, 0.0, 5e-12).is_ok());
        assert!(oracle_max_correlation(&t, 0.0, 0.0, 5e-12).is_err());
    }

    #[test]
    fn sampled_rule_is_shifted_scaled_exact() {
        // cell-average of cos = sinc · value at the cell centre
        let t = rect_template(&[0.3, 0.1, -0.4, 0.8, 0.2]);
        let f = 1.7e9;
        let w = 2.0 * PI * f;
        let sinc = (w * DT / 2.0).sin() / (w * DT / 2.0);
        for z in [0.0, 0.13e-9, 0.4e-9] {
            let e = correlation_exact(&t, f, 0.0, z);
            let s = correlation_sampled(&t, f, 0.0, z + DT / 2.0);
            assert!((e - sinc * s).abs() < 1e-12 * e.abs().max(1e-12));
        }
    }
}
