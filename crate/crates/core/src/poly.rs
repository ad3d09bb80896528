//! Dense eigenvalues and polynomial roots.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

const SCHUR_MAX_ITER: usize = 10_000;
const POLISH_STEPS: usize = 8;

pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::RootSolverFailure("non-finite matrix entry".into()));
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::RootSolverFailure("Schur iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Roots of the monic polynomial `x^n + c[n-1] x^(n-1) + ... + c[0]`, with
/// `coeffs = [c0, ..., c(n-1), 1]` in ascending order.
pub fn companion_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len() - 1;
    if coeffs[n] != 1.0 {
        return Err(Error::RootSolverFailure(format!(
            "polynomial not monic (leading coefficient {})",
            coeffs[n]
        )));
    }
    let mut comp = DMatrix::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        comp[(i, n - 1)] = -coeffs[i];
    }
    let mut roots = eigenvalues(&comp)?;
    polish(coeffs, &mut roots);
    Ok(roots)
}

/// Newton refinement of companion eigenvalues. Small roots next to large
/// ones lose relative accuracy in the QR iteration; a few steps on the
/// polynomial itself recover it. A step is kept only if it lowers `|p|` and
/// stays well inside the gap to the neighbouring roots.
fn polish(coeffs: &[f64], roots: &mut [Complex64]) {
    let deriv: Vec<f64> = coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect();
    for i in 0..roots.len() {
        for _ in 0..POLISH_STEPS {
            let x = roots[i];
            let px = eval(coeffs, x);
            let dpx = eval(&deriv, x);
            if px.norm() == 0.0 || dpx.norm() == 0.0 {
                break;
            }
            let step = px / dpx;
            let gap = roots
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, r)| (r - x).norm())
                .fold(f64::INFINITY, f64::min);
            let next = x - step;
            if !(step.norm() < 0.25 * gap && eval(coeffs, next).norm() < px.norm()) {
                break;
            }
            roots[i] = next;
        }
    }
}

/// Horner evaluation at a complex point, ascending coefficients.
pub fn eval(coeffs: &[f64], x: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}
