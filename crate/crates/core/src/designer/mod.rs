//! Anti-jamming waveform design against a single-tone jammer.
//!
//! For an `N`-segment rect-composite pulse with coefficients `a` on a chip of
//! length `T_c`, the worst case (over timing offset) of the template/jammer
//! correlation at frequency `f` is
//!
//! ```text
//! F_N(f, a) = |A_N(f; T_c)| · sqrt(X_N² + Y_N²) = |A_N(f; T_c)| · sqrt(aᵀ C a)
//! A_N(f; t) = 2/(π f) · sin(π f t / 2) · sin(π f t / (2N))
//! X_N, Y_N  = Σ a_i cos / sin((N − 1 + 2i)/(2N) · π f T_c)
//! c_ij      = cos(π f T_c |i − j| / N)
//! ```
//!
//! Designing a waveform means minimising `aᵀCa` on the unit sphere.

mod eigen;
pub mod oracle;
mod powell;
mod spectrogram;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use eigen::design_eigen;
pub use oracle::{correlation_exact, correlation_sampled, oracle_cost, oracle_max_correlation};
pub use powell::{design_powell, PowellOptions};
pub use spectrogram::design_spectrogram;

/// `A_N(f; T_c)`. Returns the limit value 0 at `f = 0`.
pub fn cost_a(f: f64, tc: f64, n: usize) -> f64 {
    if f == 0.0 {
        return 0.0;
    }
    2.0 / (PI * f) * (PI * f * tc / 2.0).sin() * (PI * f * tc / (2.0 * n as f64)).sin()
}

/// `(X_N, Y_N)` for coefficients `a` at frequency `f`.
pub fn phase_sums(f: f64, coeffs: &[f64], tc: f64) -> (f64, f64) {
    let n = coeffs.len() as f64;
    coeffs.iter().enumerate().fold((0.0, 0.0), |(x, y), (idx, &a)| {
        let i = (idx + 1) as f64;
        let phase = (n - 1.0 + 2.0 * i) / (2.0 * n) * PI * f * tc;
        (x + a * phase.cos(), y + a * phase.sin())
    })
}

/// Closed-form cost `F_N(f̂, a; T_c)` in seconds when `f̂` is in hertz and `T_c` in seconds.
pub fn cost_f(fhat: f64, coeffs: &[f64], tc: f64) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    let (x, y) = phase_sums(fhat, coeffs, tc);
    cost_a(fhat, tc, coeffs.len()).abs() * x.hypot(y)
}

/// A design request: estimated jammer frequency, chip duration, segment count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignProblem {
    fhat: f64,
    tc: f64,
    n: usize,
}

impl DesignProblem {
    /// Requires `0 < f̂ < 2N/T_c` and `N ≥ 1`. `N ≥ 3` is needed for exact nulling.
    pub fn new(fhat: f64, tc: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if !(tc > 0.0) || !tc.is_finite() {
            return Err(Error::InvalidParameter(format!("T_c must be positive, got {tc:e}")));
        }
        let band = 2.0 * n as f64 / tc;
        if !(fhat > 0.0 && fhat < band) {
            return Err(Error::OutOfBand { fhat_hz: fhat, band_hz: band });
        }
        Ok(Self { fhat, tc, n })
    }

    pub fn fhat(&self) -> f64 {
        self.fhat
    }

    pub fn tc(&self) -> f64 {
        self.tc
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Upper edge `2N/T_c` of the design band.
    pub fn band(&self) -> f64 {
        2.0 * self.n as f64 / self.tc
    }

    pub fn with_fhat(&self, fhat: f64) -> Result<Self> {
        Self::new(fhat, self.tc, self.n)
    }
}

/// The symmetric Toeplitz matrix `c_ij = cos(π f̂ T_c |i − j| / N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineGram {
    n: usize,
    step: f64,
    entries: Vec<f64>,
}

impl CosineGram {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn apply(&self, a: &[f64]) -> Vec<f64> {
        self.entries
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(a).map(|(c, x)| c * x).sum())
            .collect()
    }

    /// `aᵀ C a`, evaluated as `(uᵀa)² + (vᵀa)²` with `u_i = cos(iφ)`, `v_i = sin(iφ)`
    /// so that values near zero keep full relative precision.
    pub fn quad_form(&self, a: &[f64]) -> f64 {
        let (x, y) = a.iter().enumerate().fold((0.0, 0.0), |(x, y), (i, &ai)| {
            let ph = self.step * i as f64;
            (x + ai * ph.cos(), y + ai * ph.sin())
        });
        x * x + y * y
    }
}

pub fn build_gram(problem: &DesignProblem) -> CosineGram {
    let n = problem.n;
    let step = PI * problem.fhat * problem.tc / n as f64;
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = (step * i.abs_diff(j) as f64).cos();
        }
    }
    CosineGram { n, step, entries }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DesignMethod {
    #[default]
    Eigen,
    Powell,
}

impl fmt::Display for DesignMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DesignMethod::Eigen => "eigen",
            DesignMethod::Powell => "powell",
        })
    }
}

impl FromStr for DesignMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eigen" => Ok(DesignMethod::Eigen),
            "powell" => Ok(DesignMethod::Powell),
            other => Err(Error::Parse(format!("unknown design method `{other}`"))),
        }
    }
}

/// Outcome of a design run.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    /// Unit-norm coefficient vector.
    pub coeffs: Vec<f64>,
    pub fhat: f64,
    pub tc: f64,
    /// `F_N` at `fhat`, in seconds.
    pub cost: f64,
    pub method: DesignMethod,
    /// Jacobi sweeps (eigen) or outer iterations (Powell).
    pub iterations: usize,
    pub min_eigenvalue: f64,
    /// `λ = aᵀCa` of the KKT system at the returned point.
    pub lagrange_lambda: f64,
    pub converged: bool,
}

impl DesignResult {
    /// `h(a) = aᵀCa`.
    pub fn objective(&self) -> f64 {
        self.lagrange_lambda
    }
}

fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > 0.0 && norm.is_finite()).then(|| a.iter().map(|x| x / norm).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::published::*;

    const TC: f64 = 1e-9;

    #[test]
    fn a_vanishes_on_grid_and_at_zero() {
        // f·T_c = 2kN
        assert!(cost_a(10e9, TC, 5).abs() < 1e-25);
        assert!(cost_a(20e9, TC, 5).abs() < 1e-25);
        assert_eq!(cost_a(0.0, TC, 5), 0.0);
        assert!(cost_a(1e-3, TC, 5).abs() < 1e-20);
    }

    #[test]
    fn a_at_one_and_a_half_ghz() {
        // (2/(1.5π))·sin(0.75π)·sin(0.15π) ns
        let expected_ns = 2.0 / (1.5 * PI) * (0.75 * PI).sin() * (0.15 * PI).sin();
        assert!((expected_ns - 0.136245).abs() < 1e-6);
        assert!((cost_a(1.5e9, TC, 5) * 1e9 - expected_ns).abs() < 1e-12);
    }

    #[test]
    fn published_vector_near_null() {
        let f_ns = cost_f(1.5e9, &W5_1_5, TC) * 1e9;
        assert!(f_ns <= 5e-3, "F = {f_ns}");
        let (x, y) = phase_sums(1.5e9, &W5_1_5, TC);
        assert!(x.abs() < 2e-3 && y.abs() < 2e-3);
    }

    #[test]
    fn zero_coefficients_cost_nothing() {
        assert_eq!(cost_f(2e9, &[0.0; 5], TC), 0.0);
        assert_eq!(cost_f(2e9, &[], TC), 0.0);
    }

    #[test]
    fn cost_matches_ns_specialisation() {
        // F_5 with phases (i+2)/5·π f, f in GHz, t in ns
        let a = [0.3, -0.2, 0.5, 0.1, 0.7];
        let f = 2.7;
        let g = build_gram(&DesignProblem::new(f * 1e9, TC, 5).unwrap());
        let dense: f64 = g.apply(&a).iter().zip(&a).map(|(y, x)| y * x).sum();
        assert!((g.quad_form(&a) - dense).abs() < 1e-12);
        let (mut x, mut y) = (0.0, 0.0);
        for (k, ai) in a.iter().enumerate() {
            let ph = (k as f64 + 3.0) / 5.0 * PI * f;
            x += ai * ph.cos();
            y += ai * ph.sin();
        }
        let a5 = 2.0 / (PI * f) * (PI * f / 2.0).sin() * (PI * f / 10.0).sin();
        let expected = a5.abs() * x.hypot(y);
        assert!((cost_f(f * 1e9, &a, TC) * 1e9 - expected).abs() < 1e-13);
    }

    #[test]
    fn sign_matrix_at_five_ghz() {
        let g = build_gram(&DesignProblem::new(5e9, TC, 5).unwrap());
        for i in 0..5 {
            for j in 0..5 {
                let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                assert!((g.get(i, j) - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn low_frequency_gram_is_all_ones() {
        let g = build_gram(&DesignProblem::new(1.0, TC, 5).unwrap());
        assert!(g.entries().iter().all(|&c| (c - 1.0).abs() < 1e-15));
    }

    #[test]
    fn problem_band_checks() {
        assert!(matches!(DesignProblem::new(10e9, TC, 5), Err(Error::OutOfBand { .. })));
        assert!(DesignProblem::new(0.0, TC, 5).is_err());
        assert!(DesignProblem::new(-1e9, TC, 5).is_err());
        assert!(DesignProblem::new(1e9, TC, 0).is_err());
        assert!(DesignProblem::new(9.99e9, TC, 5).is_ok());
    }

    #[test]
    fn method_round_trip() {
        for m in [DesignMethod::Eigen, DesignMethod::Powell] {
            assert_eq!(m.to_string().parse::<DesignMethod>().unwrap(), m);
        }
        assert!("newton".parse::<DesignMethod>().is_err());
    }
}
