//! Physical constants, raw inputs and the derived frequency set.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ratio below which a "much less than" regime condition is considered satisfied.
pub const REGIME_THRESHOLD: f64 = 0.1;

/// Spin magnitude below which the macrospin picture is flagged.
pub const MACROSPIN_MIN_S: f64 = 1e2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalConstants {
    pub hbar: f64,
    #[serde(rename = "mu_B")]
    pub mu_b: f64,
    pub amu: f64,
    /// Gyromagnetic ratio, electron value by default.
    pub gamma0: f64,
    pub g_grav: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: 1.054_571_817e-34,
            mu_b: 9.274_010_078_3e-24,
            amu: 1.660_539_066_60e-27,
            gamma0: 1.760_859_630e11,
            g_grav: 9.81,
        }
    }
}

impl PhysicalConstants {
    fn validate(&self) -> Result<()> {
        positive("hbar", self.hbar)?;
        positive("mu_b", self.mu_b)?;
        positive("amu", self.amu)?;
        positive("gamma0", self.gamma0)?;
        finite("g_grav", self.g_grav)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    #[serde(rename = "rho_M")]
    pub rho_m: f64,
    pub rho_mu: f64,
    pub k_a: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "B0")]
    pub b0: f64,
    #[serde(rename = "Bp")]
    pub b_grad: f64,
    #[serde(rename = "Bpp")]
    pub b_curv: f64,
    #[serde(default, rename = "omega_S")]
    pub omega_s: f64,
}

impl SystemParams {
    /// Material and trap values of the reference phase diagram: a 50 amu
    /// per Bohr magneton magnet with rho_M = 1e4 kg/m^3, k_a = 1e4 J/m^3,
    /// B' = 1e4 T/m, B'' = 1e6 T/m^2.
    pub fn reference(c: &PhysicalConstants, radius: f64, b0: f64) -> Self {
        let rho_m = 1e4;
        Self {
            rho_m,
            rho_mu: rho_m * c.mu_b / (50.0 * c.amu),
            k_a: 1e4,
            radius,
            b0,
            b_grad: 1e4,
            b_curv: 1e6,
            omega_s: 0.0,
        }
    }

    pub fn with_point(&self, radius: f64, b0: f64) -> Self {
        Self { radius, b0, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        positive("rho_M", self.rho_m)?;
        positive("rho_mu", self.rho_mu)?;
        positive("k_a", self.k_a)?;
        positive("R", self.radius)?;
        positive("B0", self.b0)?;
        if !(self.b_grad.is_finite() && self.b_grad >= 0.0) {
            return Err(Error::NonPositiveInput {
                name: "Bp",
                requirement: "finite and non-negative",
                value: self.b_grad,
            });
        }
        finite("Bpp", self.b_curv)?;
        finite("omega_S", self.omega_s)
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveInput {
            name,
            requirement: "finite and positive",
            value,
        })
    }
}

fn finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveInput {
            name,
            requirement: "finite",
            value,
        })
    }
}

/// Every quantity the Hamiltonian and the characteristic polynomial need.
/// Frequencies are angular (rad/s), lengths in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    pub volume: f64,
    pub mass: f64,
    pub inertia: f64,
    pub moment: f64,
    pub spin: f64,
    pub total_j: f64,
    pub eta: f64,
    pub anisotropy_d: f64,
    pub omega_l: f64,
    pub omega_d: f64,
    pub omega_i: f64,
    /// Signed: negative when the curvature is anti-confining.
    pub omega_z_sq: f64,
    pub omega_t: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub omega_k: f64,
    pub omega_mu: f64,
    pub omega_s: f64,
    pub g_coupling: f64,
    pub r0: f64,
    pub z0: Option<f64>,
}

impl DerivedQuantities {
    pub fn omega_z(&self) -> Option<f64> {
        (self.omega_z_sq > 0.0).then(|| self.omega_z_sq.sqrt())
    }
}

/// Anisotropy frequency evaluated from the material constants alone.
pub fn omega_d_material(c: &PhysicalConstants, p: &SystemParams) -> f64 {
    p.k_a * c.gamma0 / p.rho_mu
}

pub fn derive_quantities(c: &PhysicalConstants, p: &SystemParams) -> Result<DerivedQuantities> {
    c.validate()?;
    p.validate()?;
    let hbar = c.hbar;
    let trap_margin = p.b_grad * p.b_grad - p.b0 * p.b_curv / 2.0;
    if trap_margin <= 0.0 {
        return Err(Error::TransverseTrapUndefined { margin: trap_margin });
    }

    let volume = 4.0 / 3.0 * PI * p.radius.powi(3);
    let mass = p.rho_m * volume;
    let inertia = 0.4 * mass * p.radius * p.radius;
    let moment = p.rho_mu * volume;
    let spin = moment / (hbar * c.gamma0);
    let total_j = inertia * p.omega_s / hbar + spin;
    if total_j <= 0.0 {
        return Err(Error::NegativeJ { j: total_j });
    }
    let eta = if p.omega_s == 0.0 { 1.0 } else { (spin / total_j).sqrt() };

    let anisotropy_d = 4.0 * PI * p.radius.powi(3) * p.k_a / (3.0 * hbar * hbar * spin * spin);
    let omega_l = c.gamma0 * p.b0;
    let omega_d = hbar * anisotropy_d * spin;
    let omega_i = hbar * spin / inertia;
    let omega_z_sq = hbar * c.gamma0 * p.b_curv * spin / mass;
    let omega_t = (hbar * c.gamma0 * spin * trap_margin / (mass * p.b0)).sqrt();
    let shift = omega_z_sq / (2.0 * omega_t);
    let omega_plus = (omega_t + shift) / 2.0;
    let omega_minus = (omega_t - shift) / 2.0;
    let omega_k = omega_i + p.omega_s - omega_l * eta * eta;
    let omega_mu = omega_i + 2.0 * omega_d - omega_l;
    let r0 = (hbar / (2.0 * mass * omega_t)).sqrt();
    let z0 = (omega_z_sq > 0.0).then(|| (hbar / (2.0 * mass * omega_z_sq.sqrt())).sqrt());
    // Transverse tilt fluctuations carry a 1/sqrt(S) scale, hence sqrt(S) r0.
    let g_coupling = omega_l * p.b_grad * spin.sqrt() * r0 / p.b0;

    Ok(DerivedQuantities {
        volume,
        mass,
        inertia,
        moment,
        spin,
        total_j,
        eta,
        anisotropy_d,
        omega_l,
        omega_d,
        omega_i,
        omega_z_sq,
        omega_t,
        omega_plus,
        omega_minus,
        omega_k,
        omega_mu,
        omega_s: p.omega_s,
        g_coupling,
        r0,
        z0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub gravity_ratio: f64,
    pub gravity_ok: bool,
    pub slow_rotation_ratio: f64,
    pub slow_rotation_ok: bool,
    pub macrospin_ok: bool,
    pub omega_t_real: bool,
    pub trap_z_confining: bool,
}

/// Gravity sag `Mg/(mu B'')` relative to the smaller trap length scale
/// `min(sqrt(B0/B''), B'/B'')`.
pub fn validate_regime(c: &PhysicalConstants, p: &SystemParams, d: &DerivedQuantities) -> RegimeReport {
    let gravity_ratio = if p.b_curv > 0.0 {
        let sag = d.mass * c.g_grav.abs() / (d.moment * p.b_curv);
        let length = (p.b0 / p.b_curv).sqrt().min(p.b_grad / p.b_curv);
        sag / length
    } else {
        f64::INFINITY
    };
    let slow_rotation_ratio = (d.inertia * p.omega_s / c.hbar).abs() / d.spin;
    RegimeReport {
        gravity_ratio,
        gravity_ok: gravity_ratio < REGIME_THRESHOLD,
        slow_rotation_ratio,
        slow_rotation_ok: slow_rotation_ratio < REGIME_THRESHOLD,
        macrospin_ok: d.spin >= MACROSPIN_MIN_S,
        omega_t_real: p.b_grad * p.b_grad - p.b0 * p.b_curv / 2.0 > 0.0,
        trap_z_confining: p.b_curv > 0.0,
    }
}

/// On-disk run configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Config {
    #[serde(flatten)]
    pub params: SystemParams,
    #[serde(default)]
    pub constants: PhysicalConstants,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.constants.validate()?;
        cfg.params.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference(radius: f64, b0: f64) -> (PhysicalConstants, SystemParams) {
        let c = PhysicalConstants::default();
        (c, SystemParams::reference(&c, radius, b0))
    }

    #[test]
    fn eta_is_one_without_rotation() {
        let (c, p) = reference(2e-9, 1e-2);
        let d = derive_quantities(&c, &p).unwrap();
        assert_eq!(d.eta, 1.0);
        assert_eq!(d.omega_k, d.omega_i - d.omega_l);
    }

    #[test]
    fn trap_boundary_is_rejected() {
        let (c, p) = reference(2e-9, 200.0);
        assert!(matches!(
            derive_quantities(&c, &p),
            Err(Error::TransverseTrapUndefined { .. })
        ));
    }

    #[test]
    fn fast_counter_rotation_is_rejected() {
        let (c, mut p) = reference(2e-9, 1e-2);
        let d = derive_quantities(&c, &p).unwrap();
        p.omega_s = -1.01 * d.spin * c.hbar / d.inertia;
        assert!(matches!(derive_quantities(&c, &p), Err(Error::NegativeJ { .. })));
    }

    #[test]
    fn missing_omega_s_defaults_to_zero() {
        let cfg =
            Config::from_json(r#"{"rho_M":1e4,"rho_mu":1e6,"k_a":1e4,"R":2e-9,"B0":1e-2,"Bp":1e4,"Bpp":1e6}"#).unwrap();
        assert_eq!(cfg.params.omega_s, 0.0);
        assert_eq!(cfg.constants, PhysicalConstants::default());
    }

    #[test]
    fn partial_constants_override() {
        let cfg = Config::from_json(
            r#"{"rho_M":1e4,"rho_mu":1e6,"k_a":1e4,"R":2e-9,"B0":1e-2,"Bp":1e4,"Bpp":1e6,
                "omega_S":0,"constants":{"gamma0":8.794e10}}"#,
        )
        .unwrap();
        assert_eq!(cfg.constants.gamma0, 8.794e10);
        assert_eq!(cfg.constants.hbar, PhysicalConstants::default().hbar);
    }

    #[test]
    fn missing_key_names_the_key() {
        let err = Config::from_json(r#"{"rho_mu":1e6,"k_a":1e4,"R":2e-9,"B0":1e-2,"Bp":1e4,"Bpp":1e6}"#).unwrap_err();
        assert!(err.to_string().contains("rho_M"), "{err}");
    }
}
