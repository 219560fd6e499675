//! Powell's conjugate-direction method for `min aᵀCa` subject to `‖a‖ = 1`.
//!
//! Line searches run on the Rayleigh quotient `q(a) = aᵀCa / aᵀa`, which equals
//! `h(a) = aᵀCa` on the unit sphere. Using `h` itself would let the first
//! coordinate search collapse the iterate to `a = 0`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::eigen::fix_sign;
use super::{build_gram, cost_f, normalized, CosineGram, DesignMethod, DesignProblem, DesignResult};
use crate::error::{Error, Result};

const GOLDEN: f64 = 0.618_033_988_749_894_8;
const BRACKET_STEP: f64 = 1e-3;
const BRACKET_LIMIT: f64 = 1e8;
const LINE_TOL: f64 = 1e-12;
const RESTART_NORM: f64 = 1e-14;
const PROBE_EPS: f64 = 1e-3;
const MAX_GOLDEN: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct PowellOptions {
    /// Starting point; drawn from `seed` when `None`.
    pub init: Option<Vec<f64>>,
    /// Stop once the KKT residual `‖Ca − λa‖` (with `λ = aᵀCa`, `‖a‖ = 1`) is below this.
    pub tol: f64,
    /// Maximum number of outer iterations (direction-set resets).
    pub max_outer: usize,
    /// Maximum inner conjugate-direction cycles per outer iteration.
    pub max_inner: usize,
    /// Drives the random start and the second-order probe at stationary points.
    pub seed: u64,
}

impl Default for PowellOptions {
    fn default() -> Self {
        Self { init: None, tol: 1e-10, max_outer: 50, max_inner: 200, seed: 0 }
    }
}

impl PowellOptions {
    pub fn with_init(init: Vec<f64>) -> Self {
        Self { init: Some(init), ..Self::default() }
    }

    pub fn seeded(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

struct Rayleigh<'a> {
    gram: &'a CosineGram,
}

impl Rayleigh<'_> {
    fn eval(&self, a: &[f64]) -> f64 {
        let norm2: f64 = a.iter().map(|x| x * x).sum();
        if !(norm2 > 0.0) {
            return f64::INFINITY;
        }
        let q = self.gram.quad_form(a) / norm2;
        if q.is_nan() {
            f64::INFINITY
        } else {
            q
        }
    }

    fn along(&self, p: &[f64], u: &[f64], gamma: f64) -> f64 {
        let x: Vec<f64> = p.iter().zip(u).map(|(pi, ui)| pi + gamma * ui).collect();
        self.eval(&x)
    }

    /// Golden-section minimiser of `γ ↦ q(p + γu)` on a doubling bracket.
    fn line_min(&self, p: &[f64], u: &[f64]) -> f64 {
        let f = |g: f64| self.along(p, u, g);
        let f0 = f(0.0);
        let (fp, fm) = (f(BRACKET_STEP), f(-BRACKET_STEP));
        let (lo, hi) = if fp >= f0 && fm >= f0 {
            (-BRACKET_STEP, BRACKET_STEP)
        } else {
            let dir = if fp < fm { 1.0 } else { -1.0 };
            let (mut a, mut b, mut fb) = (0.0f64, dir * BRACKET_STEP, fp.min(fm));
            loop {
                let c = 2.0 * b;
                let fc = f(c);
                if fc >= fb {
                    break (a.min(c), a.max(c));
                }
                if c.abs() > BRACKET_LIMIT {
                    return c;
                }
                a = b;
                b = c;
                fb = fc;
            }
        };
        let (mut a, mut b) = (lo, hi);
        let mut x1 = b - GOLDEN * (b - a);
        let mut x2 = a + GOLDEN * (b - a);
        let (mut f1, mut f2) = (f(x1), f(x2));
        // relative once |γ| > 1, where absolute resolution runs out
        let mut iters = 0;
        while (b - a).abs() > LINE_TOL * (1.0 + a.abs().max(b.abs())) && iters < MAX_GOLDEN {
            iters += 1;
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - GOLDEN * (b - a);
                f1 = f(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + GOLDEN * (b - a);
                f2 = f(x2);
            }
        }
        let g = 0.5 * (a + b);
        if f(g) <= f0 {
            g
        } else {
            0.0
        }
    }
}

fn kkt_residual(gram: &CosineGram, a: &[f64]) -> (f64, f64) {
    let ca = gram.apply(a);
    let lambda: f64 = ca.iter().zip(a).map(|(x, y)| x * y).sum();
    let r = ca
        .iter()
        .zip(a)
        .map(|(x, y)| (x - lambda * y).powi(2))
        .sum::<f64>()
        .sqrt();
    (lambda, r)
}

fn unit_basis(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Probe `2N` random directions around a stationary point; returns a descent
/// direction if one exists.
fn descent_probe(q: &Rayleigh<'_>, a: &[f64], rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    let base = q.eval(a);
    for _ in 0..2 * a.len() {
        let d = random_vector(rng, a.len());
        let x: Vec<f64> = a.iter().zip(&d).map(|(ai, di)| ai + PROBE_EPS * di).collect();
        if q.eval(&x) < base - 1e-12 * PROBE_EPS * PROBE_EPS {
            return normalized(&x);
        }
    }
    None
}

/// One outer iteration of the conjugate-direction scheme, starting from
/// directions `e_1..e_N`.
fn conjugate_cycles(q: &Rayleigh<'_>, start: &[f64], max_inner: usize) -> Vec<f64> {
    let n = start.len();
    let mut dirs = unit_basis(n);
    let mut a = start.to_vec();
    for _ in 0..max_inner {
        let p0 = a.clone();
        let q0 = q.eval(&p0);
        let mut p = p0.clone();
        for u in &dirs {
            let g = q.line_min(&p, u);
            p.iter_mut().zip(u).for_each(|(pi, ui)| *pi += g * ui);
        }
        let new_dir: Vec<f64> = p.iter().zip(&p0).map(|(x, y)| x - y).collect();
        dirs.rotate_left(1);
        let moved = new_dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = p0.iter().map(|x| x * x).sum::<f64>().sqrt();
        let next = match normalized(&new_dir) {
            Some(u) if moved > RESTART_NORM * scale => {
                let g = q.line_min(&p0, &u);
                let x: Vec<f64> = p0.iter().zip(&u).map(|(pi, ui)| pi + g * ui).collect();
                dirs[n - 1] = u;
                x
            }
            _ => {
                dirs = unit_basis(n);
                p
            }
        };
        a = normalized(&next).unwrap_or(p0);
        let q1 = q.eval(&a);
        if q0 - q1 <= 1e-15 * q0.abs() + f64::MIN_POSITIVE {
            break;
        }
    }
    a
}

/// Minimise `aᵀCa` on the unit sphere with Powell's method.
///
/// Each outer iteration resets the direction set to the unit vectors, runs
/// conjugate-direction cycles until the objective stalls, and re-normalises.
/// Iteration stops when the KKT residual falls below `tol` at a point that a
/// random second-order probe cannot improve. Exhausting `max_outer` returns the
/// best iterate with `converged = false`.
pub fn design_powell(problem: &DesignProblem, opts: &PowellOptions) -> Result<DesignResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {:e}", opts.tol)));
    }
    let gram = build_gram(problem);
    let n = gram.n();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let init = match &opts.init {
        Some(v) if v.len() != n => {
            return Err(Error::LengthMismatch(format!("init has {} entries, N = {n}", v.len())))
        }
        Some(v) => v.clone(),
        None => random_vector(&mut rng, n),
    };
    let mut a = normalized(&init).ok_or_else(|| Error::InvalidParameter("init must be nonzero and finite".into()))?;
    let q = Rayleigh { gram: &gram };

    let mut best = a.clone();
    let mut best_q = q.eval(&a);
    let mut outer = 0;
    let converged = loop {
        let (_, residual) = kkt_residual(&gram, &a);
        if residual < opts.tol {
            match descent_probe(&q, &a, &mut rng) {
                None => break true,
                Some(escape) => a = escape,
            }
        }
        if outer >= opts.max_outer {
            break false;
        }
        outer += 1;
        a = conjugate_cycles(&q, &a, opts.max_inner);
        let qa = q.eval(&a);
        if qa < best_q {
            best_q = qa;
            best = a.clone();
        }
    };
    let mut coeffs = if converged { a } else { best };
    fix_sign(&mut coeffs);
    let (lambda, _) = kkt_residual(&gram, &coeffs);
    Ok(DesignResult {
        cost: cost_f(problem.fhat(), &coeffs, problem.tc()),
        coeffs,
        fhat: problem.fhat(),
        tc: problem.tc(),
        method: DesignMethod::Powell,
        iterations: outer,
        min_eigenvalue: lambda,
        lagrange_lambda: lambda,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designer::design_eigen;

    const TC: f64 = 1e-9;

    fn e1() -> Vec<f64> {
        vec![1.0, 0.0, 0.0, 0.0, 0.0]
    }

    #[test]
    fn converges_from_first_unit_vector() {
        let p = DesignProblem::new(1.5e9, TC, 5).unwrap();
        let r = design_powell(&p, &PowellOptions::with_init(e1())).unwrap();
        assert!(r.converged);
        assert!(r.objective() <= 1e-8, "h = {:e}", r.objective());
        let norm: f64 = r.coeffs.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-10);
        let eig = design_eigen(&p).unwrap();
        assert!((r.objective() - eig.objective()).abs() <= 1e-8);
    }

    #[test]
    fn null_space_start_is_a_fixed_point() {
        let p = DesignProblem::new(1.5e9, TC, 5).unwrap();
        let start = design_eigen(&p).unwrap().coeffs;
        let r = design_powell(&p, &PowellOptions::with_init(start)).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 1);
        assert!(r.objective().abs() < 1e-12);
    }

    #[test]
    fn projects_out_the_alternating_direction() {
        let p = DesignProblem::new(5e9, TC, 5).unwrap();
        let s = 1.0 / 5f64.sqrt();
        let r = design_powell(&p, &PowellOptions::with_init(vec![s; 5])).unwrap();
        assert!(r.converged);
        assert!(r.objective().abs() < 1e-12);
        let alt: f64 = r.coeffs.iter().enumerate().map(|(i, a)| if i % 2 == 0 { *a } else { -*a }).sum();
        assert!(alt.abs() < 1e-6);
    }

    #[test]
    fn escapes_a_maximising_eigenvector() {
        // the top eigenvector is stationary for the Rayleigh quotient
        let p = DesignProblem::new(2.0e9, TC, 5).unwrap();
        let g = build_gram(&p);
        let eig = crate::linalg::jacobi_eigen(g.entries(), 5).unwrap();
        let top = eig.vector(4);
        let r = design_powell(&p, &PowellOptions { init: Some(top), seed: 3, ..Default::default() }).unwrap();
        assert!(r.converged);
        assert!(r.objective() <= 1e-8);
    }

    #[test]
    fn seeded_start_is_reproducible() {
        let p = DesignProblem::new(6.6e9, TC, 5).unwrap();
        let a = design_powell(&p, &PowellOptions::seeded(7)).unwrap();
        let b = design_powell(&p, &PowellOptions::seeded(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exhausting_the_budget_is_flagged() {
        let p = DesignProblem::new(1.5e9, TC, 5).unwrap();
        let opts = PowellOptions { init: Some(e1()), max_outer: 0, ..Default::default() };
        let r = design_powell(&p, &opts).unwrap();
        assert!(!r.converged);
        assert_eq!(r.coeffs.len(), 5);
    }

    #[test]
    fn bad_options() {
        let p = DesignProblem::new(1.5e9, TC, 5).unwrap();
        assert!(design_powell(&p, &PowellOptions::with_init(vec![0.0; 5])).is_err());
        assert!(design_powell(&p, &PowellOptions::with_init(vec![1.0; 3])).is_err());
        let opts = PowellOptions { tol: 0.0, ..Default::default() };
        assert!(design_powell(&p, &opts).is_err());
    }

    #[test]
    fn two_segments_reach_smallest_eigenvalue() {
        let p = DesignProblem::new(1.3e9, TC, 2).unwrap();
        let r = design_powell(&p, &PowellOptions::seeded(1)).unwrap();
        let expected = 1.0 - (std::f64::consts::PI * 1.3e9 * TC / 2.0).cos().abs();
        assert!((r.objective() - expected).abs() < 1e-8);
    }
}
