//! Bogoliubov diagonalization at a stable point and the vacuum metrics.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{build_model, QuadraticModel, DIM, N_MODES};
use crate::params::{derive_quantities, PhysicalConstants, SystemParams};
use crate::poly;
use crate::stability::{classify_point, Phase};

/// Scaled eigenvalues closer than this are treated as one eigenspace.
pub const CLUSTER_TOL: f64 = 1e-9;

/// Largest singular value accepted as part of a null space (scaled units).
const NULL_TOL: f64 = 1e-6;

type CMat = DMatrix<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovTransform {
    /// Columns `(v1, u1, ..., v5, u5)`, with `u_i` the particle-hole partner of `v_i`.
    pub t: CMat,
    /// Normal frequencies `v_i^dag MT v_i` (rad/s), ascending. Signed: the
    /// quadratic form is indefinite at gyroscopically stabilized points.
    pub omegas: [f64; N_MODES],
}

fn partner(v: &DVector<Complex64>) -> DVector<Complex64> {
    DVector::from_fn(DIM, |i, _| v[i ^ 1].conj())
}

fn g_inner(a: &DVector<Complex64>, b: &DVector<Complex64>) -> Complex64 {
    a.iter()
        .zip(b.iter())
        .enumerate()
        .map(|(i, (x, y))| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            x.conj() * y * s
        })
        .sum()
}

fn to_complex(m: &DMatrix<f64>) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn bogoliubov_transform(model: &QuadraticModel, tol: f64) -> Result<BogoliubovTransform> {
    let scale = model.freq_scale;
    let k = &model.kt / scale;
    let g = &model.g;

    let mut eig = poly::eigenvalues(&k)?;
    if let Some(z) = eig.iter().find(|z| z.im.abs() > tol * z.norm().max(1.0)) {
        return Err(Error::NotStable(format!("complex eigenvalue {z}")));
    }
    eig.sort_by(|a, b| a.re.total_cmp(&b.re));

    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for z in &eig {
        match clusters.last_mut() {
            Some(cl) if z.re - cl.last().unwrap() <= CLUSTER_TOL * z.re.abs().max(1.0) => cl.push(z.re),
            _ => clusters.push(vec![z.re]),
        }
    }

    let mut positive: Vec<DVector<f64>> = Vec::with_capacity(N_MODES);
    for cl in &clusters {
        let lambda = cl.iter().sum::<f64>() / cl.len() as f64;
        let shifted = &k - DMatrix::identity(DIM, DIM) * lambda;
        let svd = SVD::new(shifted, false, true);
        let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
        let mut order: Vec<usize> = (0..DIM).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        let null = &order[..cl.len()];
        if let Some(&worst) = null.last() {
            if svd.singular_values[worst] > NULL_TOL {
                return Err(Error::NotStable(format!(
                    "defective eigenvalue {lambda} (singular value {:e})",
                    svd.singular_values[worst]
                )));
            }
        }
        let w = DMatrix::from_fn(DIM, null.len(), |i, j| v_t[(null[j], i)]);
        let form = w.transpose() * g * &w;
        let se = SymmetricEigen::new(form);
        for (idx, &h) in se.eigenvalues.iter().enumerate() {
            if h.abs() < tol {
                return Err(Error::ZeroNormVector { norm: h });
            }
            if h > 0.0 {
                positive.push(&w * se.eigenvectors.column(idx) / h.sqrt());
            }
        }
    }
    if positive.len() != N_MODES {
        return Err(Error::NotStable(format!(
            "{} positive-norm modes instead of {N_MODES}",
            positive.len()
        )));
    }

    // Indefinite Gram-Schmidt against earlier v_j (norm +1) and u_j (norm -1).
    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(N_MODES);
    for v in &positive {
        let mut v = v.map(|x| Complex64::new(x, 0.0));
        for b in &basis {
            let u = partner(b);
            v -= b * g_inner(b, &v);
            v += &u * g_inner(&u, &v);
        }
        let norm = g_inner(&v, &v).re;
        if norm < tol {
            return Err(Error::ZeroNormVector { norm });
        }
        basis.push(v / Complex64::new(norm.sqrt(), 0.0));
    }

    let m = to_complex(&(&model.mt / scale));
    let mut modes: Vec<(f64, DVector<Complex64>)> = basis
        .into_iter()
        .map(|v| ((v.adjoint() * &m * &v)[(0, 0)].re * scale, v))
        .collect();
    modes.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut t = CMat::zeros(DIM, DIM);
    let mut omegas = [0.0; N_MODES];
    for (i, (w, v)) in modes.iter().enumerate() {
        t.set_column(2 * i, v);
        t.set_column(2 * i + 1, &partner(v));
        omegas[i] = *w;
    }
    Ok(BogoliubovTransform { t, omegas })
}

impl BogoliubovTransform {
    /// Multiplies `v_i` by `exp(i phi_i)` and `u_i` by the conjugate phase.
    pub fn rephase(&self, phases: &[f64; N_MODES]) -> Self {
        let mut t = self.t.clone();
        for (i, &phi) in phases.iter().enumerate() {
            let z = Complex64::from_polar(1.0, phi);
            for r in 0..DIM {
                t[(r, 2 * i)] *= z;
                t[(r, 2 * i + 1)] *= z.conj();
            }
        }
        Self { t, omegas: self.omegas }
    }

    /// `max |T^dag G T - G|`.
    pub fn symplectic_residual(&self, g: &DMatrix<f64>) -> f64 {
        let g = to_complex(g);
        (self.t.adjoint() * &g * &self.t - g)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `T^dag MT T` in units of `scale`.
    pub fn diagonalized(&self, model: &QuadraticModel) -> CMat {
        let m = to_complex(&(&model.mt / model.freq_scale));
        self.t.adjoint() * m * &self.t
    }

    /// Largest off-diagonal entry and largest pairing mismatch of `T^dag MT T`, scaled units.
    pub fn diagonal_residuals(&self, model: &QuadraticModel) -> (f64, f64) {
        let d = self.diagonalized(model);
        let mut off: f64 = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                if i != j {
                    off = off.max(d[(i, j)].norm());
                }
            }
        }
        let pair = (0..N_MODES)
            .map(|i| (d[(2 * i, 2 * i)] - d[(2 * i + 1, 2 * i + 1)]).norm())
            .fold(0.0, f64::max);
        (off, pair)
    }

    /// `G T^dag G`.
    pub fn inverse(&self) -> CMat {
        let g = to_complex(&crate::hamiltonian::metric());
        &g * self.t.adjoint() * &g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    pub theta: CMat,
}

pub fn covariance(t: &BogoliubovTransform) -> CovarianceMatrix {
    CovarianceMatrix {
        theta: &t.t * t.t.adjoint() / Complex64::new(2.0, 0.0),
    }
}

impl CovarianceMatrix {
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.theta + self.theta.adjoint()) / Complex64::new(2.0, 0.0);
        SymmetricEigen::new(herm).eigenvalues.iter().copied().collect()
    }

    pub fn det_2theta(&self) -> Complex64 {
        (&self.theta * Complex64::new(2.0, 0.0)).determinant()
    }

    pub fn block_det(&self, mode: usize) -> f64 {
        let (a, b) = (2 * mode, 2 * mode + 1);
        let th = &self.theta;
        (th[(a, a)] * th[(b, b)] - th[(a, b)] * th[(b, a)]).re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateMetrics {
    /// Order `b_R, b_L, m, k, s`.
    pub purities: [f64; N_MODES],
    pub entanglement: f64,
    pub squeezing: f64,
}

pub fn mode_metrics(theta: &CovarianceMatrix) -> Result<StateMetrics> {
    let mut purities = [0.0; N_MODES];
    for (a, p) in purities.iter_mut().enumerate() {
        let det = theta.block_det(a);
        if det.is_nan() || det <= 0.0 {
            return Err(Error::NonPositiveBlockDeterminant { mode: a, det });
        }
        *p = 1.0 / (2.0 * det.sqrt());
    }
    let min = theta.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
    Ok(StateMetrics {
        purities,
        entanglement: N_MODES as f64 - purities.iter().sum::<f64>(),
        squeezing: 1.0 / (2.0 * min).sqrt(),
    })
}

/// Full state at one parameter point; `NotStable` unless the point classifies as stable.
pub fn state_at(
    c: &PhysicalConstants,
    p: &SystemParams,
    tol: f64,
) -> Result<(QuadraticModel, BogoliubovTransform, StateMetrics)> {
    let d = derive_quantities(c, p)?;
    let model = build_model(&d)?;
    let verdict = classify_point(&d, &model, tol)?;
    if !verdict.classification.is_stable() {
        return Err(Error::NotStable(verdict.classification.to_string()));
    }
    let t = bogoliubov_transform(&model, tol)?;
    let metrics = mode_metrics(&covariance(&t))?;
    Ok((model, t, metrics))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateRow {
    pub b0: f64,
    pub classification: Phase,
    pub metrics: Option<StateMetrics>,
    pub note: Option<String>,
}

pub fn state_scan(
    c: &PhysicalConstants,
    p_template: &SystemParams,
    r_fixed: f64,
    b0_list: &[f64],
    tol: f64,
) -> Vec<StateRow> {
    b0_list
        .par_iter()
        .map(|&b0| {
            let p = p_template.with_point(r_fixed, b0);
            let classification = crate::stability::classify_params(c, &p, tol)
                .map(|v| v.classification)
                .unwrap_or(Phase::Unstable);
            if !classification.is_stable() {
                return StateRow {
                    b0,
                    classification,
                    metrics: None,
                    note: None,
                };
            }
            match state_at(c, &p, tol) {
                Ok((_, _, m)) => StateRow {
                    b0,
                    classification,
                    metrics: Some(m),
                    note: None,
                },
                Err(e) => StateRow {
                    b0,
                    classification,
                    metrics: None,
                    note: Some(e.to_string()),
                },
            }
        })
        .collect()
}
