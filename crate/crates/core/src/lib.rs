//! Linear stability and Gaussian vacuum properties of a nanomagnet levitated
//! in an Ioffe-Pritchard trap.
//!
//! The pipeline is `params` -> `hamiltonian` -> `stability` / `gaussian`.
//! Stability is decided from the transverse characteristic polynomial and
//! cross-checked against the spectrum of the dynamical matrix.

pub mod cli;
pub mod error;
pub mod gaussian;
pub mod hamiltonian;
pub mod io;
pub mod params;
pub mod poly;
pub mod stability;
pub mod sturm;

pub use error::{Error, Result};
pub use gaussian::{
    bogoliubov_transform, covariance, mode_metrics, state_at, state_scan, BogoliubovTransform, CovarianceMatrix,
    StateMetrics, StateRow,
};
pub use hamiltonian::{build_c, build_model, build_mt, model_from_c, CouplingMatrix, QuadraticModel};
pub use params::{
    derive_quantities, validate_regime, Config, DerivedQuantities, PhysicalConstants, RegimeReport, SystemParams,
};
pub use stability::{
    analytic_borders, axis, classify_params, classify_point, crosscheck_spectrum, pt_coefficients, refine_boundary,
    refine_radius_boundary, sweep_grid, AnalyticBorders, CharPolyT, Phase, PhaseDiagram, Spacing, StabilityVerdict,
    DEFAULT_TOL,
};
