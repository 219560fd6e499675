use super::{build_gram, cost_f, normalized, DesignMethod, DesignProblem, DesignResult};
use crate::error::{Error, Result};
use crate::linalg::jacobi_eigen;

/// Eigenvalues at or below this fraction of the largest are treated as zero.
const NULL_RTOL: f64 = 1e-10;

/// Minimise `aᵀCa` over the unit sphere through the eigen-decomposition of `C`.
///
/// For `N ≥ 3` the minimum is 0 and is attained on the null space of `C`. The
/// returned representative is the first vector of the Gram–Schmidt
/// orthonormalised null-space basis (ascending eigen-index), sign-fixed so the
/// largest-magnitude coefficient is positive. When `C` has no null space the
/// eigenvector of the smallest eigenvalue is returned instead.
pub fn design_eigen(problem: &DesignProblem) -> Result<DesignResult> {
    let gram = build_gram(problem);
    let n = gram.n();
    let eig = jacobi_eigen(gram.entries(), n)?;
    let lambda_max = eig.max_value();

    let null: Vec<usize> = (0..n)
        .filter(|&j| eig.values[j] <= NULL_RTOL * lambda_max)
        .collect();
    let basis = if null.is_empty() {
        vec![eig.vector(0)]
    } else {
        gram_schmidt(null.iter().map(|&j| eig.vector(j)))
    };
    let mut a = basis
        .into_iter()
        .next()
        .ok_or_else(|| Error::InvalidParameter("degenerate eigenbasis".into()))?;
    fix_sign(&mut a);

    let lambda = gram.quad_form(&a);
    Ok(DesignResult {
        cost: cost_f(problem.fhat(), &a, problem.tc()),
        coeffs: a,
        fhat: problem.fhat(),
        tc: problem.tc(),
        method: DesignMethod::Eigen,
        iterations: eig.sweeps,
        min_eigenvalue: eig.values[0],
        lagrange_lambda: lambda,
        converged: eig.converged,
    })
}

fn gram_schmidt(vectors: impl Iterator<Item = Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mut v in vectors {
        for q in &out {
            let d: f64 = v.iter().zip(q).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= d * y);
        }
        if let Some(u) = normalized(&v) {
            out.push(u);
        }
    }
    out
}

/// Flip so the largest-magnitude entry (first on ties) is positive.
pub(crate) fn fix_sign(a: &mut [f64]) {
    let pivot = a
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |best, (i, &x)| if x.abs() > best.1 { (i, x.abs()) } else { best })
        .0;
    if a.get(pivot).is_some_and(|&x| x < 0.0) {
        a.iter_mut().for_each(|x| *x = -*x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::published::W5_1_5;
    use std::f64::consts::PI;

    const TC: f64 = 1e-9;

    fn norm2(a: &[f64]) -> f64 {
        a.iter().map(|x| x * x).sum()
    }

    #[test]
    fn nulls_one_and_a_half_ghz() {
        let p = DesignProblem::new(1.5e9, TC, 5).unwrap();
        let r = design_eigen(&p).unwrap();
        assert!((norm2(&r.coeffs) - 1.0).abs() < 1e-10);
        assert!(r.cost * 1e9 <= 1e-10, "cost = {:e} ns", r.cost * 1e9);
        assert!(r.lagrange_lambda.abs() < 1e-12);
        // published vector is a different point of the same optimum set
        assert!(cost_f(1.5e9, &W5_1_5, TC) * 1e9 < 5e-3);
        let largest = r.coeffs.iter().cloned().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        assert!(largest > 0.0);
    }

    #[test]
    fn five_ghz_null_space_is_orthogonal_to_alternating() {
        let p = DesignProblem::new(5e9, TC, 5).unwrap();
        let r = design_eigen(&p).unwrap();
        let alt: f64 = r.coeffs.iter().enumerate().map(|(i, a)| if i % 2 == 0 { *a } else { -*a }).sum();
        assert!(alt.abs() < 1e-12);
        assert!(r.lagrange_lambda.abs() < 1e-12);
        // (1,1,0,0,0)/√2 is also a zero of the quadratic form
        let g = build_gram(&p);
        let s = 0.5f64.sqrt();
        assert!(g.quad_form(&[s, s, 0.0, 0.0, 0.0]).abs() < 1e-12);
    }

    #[test]
    fn two_segments_cannot_null() {
        for f in [1.3e9, 2.2e9, 3.7e9] {
            let p = DesignProblem::new(f, TC, 2).unwrap();
            let r = design_eigen(&p).unwrap();
            let expected = 1.0 - (PI * f * TC / 2.0).cos().abs();
            assert!((r.lagrange_lambda - expected).abs() < 1e-12, "f = {f}");
            assert!((r.min_eigenvalue - expected).abs() < 1e-12);
            assert!(r.lagrange_lambda > 0.0);
        }
    }

    #[test]
    fn deterministic() {
        let p = DesignProblem::new(6.6e9, TC, 5).unwrap();
        assert_eq!(design_eigen(&p).unwrap(), design_eigen(&p).unwrap());
    }

    #[test]
    fn sign_fix() {
        let mut a = [0.1, -0.9, 0.3];
        fix_sign(&mut a);
        assert_eq!(a, [-0.1, 0.9, -0.3]);
    }
}
