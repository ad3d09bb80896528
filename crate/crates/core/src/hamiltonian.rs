//! Coupling matrix, quadratic forms and dynamical matrices.
//!
//! The compact basis is `psi = (b_R^dag, k^dag, b_L, m, s)`; the full
//! ladder basis is `Psi = (b_R, b_R^dag, b_L, b_L^dag, m, m^dag, k, k^dag, s, s^dag)`.

use nalgebra::{DMatrix, Matrix2, SMatrix};

use crate::error::{Error, Result};
use crate::params::DerivedQuantities;

pub const N_MODES: usize = 5;
pub const DIM: usize = 2 * N_MODES;

/// Mode names in `Psi` pair order.
pub const MODE_NAMES: [&str; N_MODES] = ["b_R", "b_L", "m", "k", "s"];

/// For each `psi` slot: the `Psi` pair index of its mode and whether the slot
/// holds the creation operator.
const PSI_SLOTS: [(usize, bool); N_MODES] = [(0, true), (3, true), (1, false), (2, false), (4, false)];

pub type CouplingMatrix = SMatrix<f64, N_MODES, N_MODES>;

#[rustfmt::skip]
pub fn build_c(d: &DerivedQuantities) -> CouplingMatrix {
    let e = d.eta;
    let g = d.g_coupling;
    let ge = g * e;
    let wl = d.omega_l;
    let wk = d.omega_k;
    CouplingMatrix::from_row_slice(&[
        d.omega_minus, ge, -d.omega_plus, -ge, g,
        ge, wk, ge, wl * e * e, wk / e,
        -d.omega_plus, ge, d.omega_minus, -ge, g,
        -ge, wl * e * e, -ge, -wl * e * e, wl * e,
        g, wk / e, g, wl * e, d.omega_mu,
    ])
}

/// Swaps the `(a, a^dag)` slots of every mode.
pub fn particle_hole_swap() -> DMatrix<f64> {
    let mut s = DMatrix::zeros(DIM, DIM);
    for k in 0..N_MODES {
        s[(2 * k, 2 * k + 1)] = 1.0;
        s[(2 * k + 1, 2 * k)] = 1.0;
    }
    s
}

pub fn metric() -> DMatrix<f64> {
    DMatrix::from_fn(DIM, DIM, |i, j| match (i == j, i % 2) {
        (true, 0) => 1.0,
        (true, _) => -1.0,
        _ => 0.0,
    })
}

/// Expands `psi^dag C psi + h.c.` in the ladder basis and symmetrizes under
/// particle-hole conjugation. `C` is real, so the result is real symmetric.
pub fn build_mt(c: &CouplingMatrix) -> Result<DMatrix<f64>> {
    let scale = c.amax();
    for i in 0..N_MODES {
        for j in 0..i {
            let (u, l) = (c[(j, i)], c[(i, j)]);
            if (u - l).abs() > 1e-12 * scale || !u.is_finite() || !l.is_finite() {
                return Err(Error::AsymmetricInput {
                    row: j,
                    col: i,
                    upper: u,
                    lower: l,
                });
            }
        }
    }

    let mut h = DMatrix::<f64>::zeros(DIM, DIM);
    for (i, &(mode_i, dag_i)) in PSI_SLOTS.iter().enumerate() {
        // (psi_i)^dag is Psi_p with p the slot of the adjoint; as a row of
        // Psi^dag it sits at p ^ 1.
        let p = 2 * mode_i + usize::from(!dag_i);
        for (j, &(mode_j, dag_j)) in PSI_SLOTS.iter().enumerate() {
            let q = 2 * mode_j + usize::from(dag_j);
            h[(p ^ 1, q)] += c[(i, j)];
        }
    }
    let h = &h + h.transpose();
    let s = particle_hole_swap();
    Ok((&h + &s * &h * &s) / 2.0)
}

#[derive(Debug, Clone)]
pub struct QuadraticModel {
    pub c: CouplingMatrix,
    pub mz: Matrix2<f64>,
    pub mt: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub kt: DMatrix<f64>,
    pub kz: Matrix2<f64>,
    /// Largest absolute entry of `C`; eigensolves run on matrices divided by it.
    pub freq_scale: f64,
}

pub fn build_model(d: &DerivedQuantities) -> Result<QuadraticModel> {
    model_from_c(build_c(d), d.omega_z_sq)
}

/// Builds the model around an arbitrary symmetric coupling matrix.
pub fn model_from_c(c: CouplingMatrix, omega_z_sq: f64) -> Result<QuadraticModel> {
    let mt = build_mt(&c)?;
    let g = metric();
    let kt = &g * &mt;
    let wz = omega_z_sq.abs().sqrt();
    let mz = Matrix2::identity() * wz;
    let kz = Matrix2::new(1.0, 0.0, 0.0, -1.0) * mz;
    let freq_scale = c.amax();
    Ok(QuadraticModel {
        c,
        mz,
        mt,
        g,
        kt,
        kz,
        freq_scale,
    })
}

impl QuadraticModel {
    /// `max |MT - MT^T|` relative to the scale.
    pub fn hermiticity_residual(&self) -> f64 {
        (&self.mt - self.mt.transpose()).amax() / self.freq_scale
    }

    /// `max |Sigma MT* Sigma - MT|` relative to the scale.
    pub fn particle_hole_residual(&self) -> f64 {
        let s = particle_hole_swap();
        (&s * &self.mt * &s - &self.mt).amax() / self.freq_scale
    }

    /// Eigenvalues of `KT / freq_scale`, in scaled units.
    pub fn kt_eigenvalues_scaled(&self) -> Result<Vec<num_complex::Complex64>> {
        crate::poly::eigenvalues(&(&self.kt / self.freq_scale))
    }
}
