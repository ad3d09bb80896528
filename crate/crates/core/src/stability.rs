//! Characteristic polynomial, point classification, analytic borders and
//! the (B0, R) sweep.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{build_model, QuadraticModel};
use crate::params::{derive_quantities, DerivedQuantities, PhysicalConstants, SystemParams};
use crate::poly;
use crate::sturm;

pub const DEFAULT_TOL: f64 = 1e-8;

/// Margin multiplier: classifications within this many tolerances of a
/// threshold are reported as marginal.
pub const MARGIN_FACTOR: f64 = 10.0;

/// Relative bracket width at which boundary bisection stops.
pub const BISECTION_WIDTH: f64 = 1e-6;

pub const MAX_GRID: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Phase {
    Unstable,
    StableEdh,
    StableA,
    Marginal,
}

impl Phase {
    pub fn code(self) -> u8 {
        match self {
            Phase::Unstable => 0,
            Phase::StableEdh => 1,
            Phase::StableA => 2,
            Phase::Marginal => 3,
        }
    }

    pub fn is_stable(self) -> bool {
        matches!(self, Phase::StableEdh | Phase::StableA)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Unstable => "UNSTABLE",
            Phase::StableEdh => "STABLE_EDH",
            Phase::StableA => "STABLE_A",
            Phase::Marginal => "MARGINAL",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Transverse characteristic polynomial `P_T(lambda) = sum a_k lambda^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharPolyT {
    pub a: [Complex64; 6],
}

pub fn pt_coefficients(d: &DerivedQuantities) -> CharPolyT {
    let (wd, wi, wl, wt, ws) = (d.omega_d, d.omega_i, d.omega_l, d.omega_t, d.omega_s);
    let wz2 = d.omega_z_sq;
    let wt2 = wt * wt;
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    CharPolyT {
        a: [
            re(-2.0 * wd * wi * wl * wt2),
            im(wd * wz2 * (ws + wi) + ws * wl * wt2),
            re(-2.0 * wd * wi * wl - 0.5 * (2.0 * wd - ws) * wz2 - wl * wt2),
            im(-2.0 * wd * (ws + wi) + ws * wl + 0.5 * wz2),
            re(2.0 * wd - ws - wl),
            im(-1.0),
        ],
    }
}

impl CharPolyT {
    /// Inverse of [`CharPolyT::q`]: the `a_k` whose `q(nu)` has the given
    /// ascending coefficients (leading one must be 1).
    pub fn from_q(q: [f64; 6]) -> Self {
        let mut a = [Complex64::new(0.0, 0.0); 6];
        let mut minus_ik = Complex64::new(1.0, 0.0);
        for k in 0..6 {
            a[k] = minus_ik * q[k];
            minus_ik *= -Complex64::i();
        }
        Self { a }
    }

    fn rotated(&self) -> [Complex64; 6] {
        let mut ik = Complex64::new(1.0, 0.0);
        let mut out = [Complex64::new(0.0, 0.0); 6];
        for (k, a) in self.a.iter().enumerate() {
            out[k] = a * ik;
            ik *= Complex64::i();
        }
        out
    }

    /// Coefficients of `q(nu) = P_T(i nu)`, ascending.
    pub fn q(&self) -> [f64; 6] {
        self.rotated().map(|z| z.re)
    }

    /// Largest imaginary part of the `q` coefficients relative to the largest real part.
    pub fn q_imag_residual(&self) -> f64 {
        let r = self.rotated();
        let big = r.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        r.iter().map(|z| z.im.abs()).fold(0.0, f64::max) / big
    }

    /// Monic `q` in the variable `x = nu / scale`.
    pub fn q_scaled(&self, scale: f64) -> [f64; 6] {
        let q = self.q();
        let lead = q[5];
        let mut out = [0.0; 6];
        for k in 0..6 {
            out[k] = q[k] / lead / scale.powi(5 - k as i32);
        }
        out[5] = 1.0;
        out
    }

    /// Roots of `q` in rad/s.
    pub fn roots_nu(&self, scale: f64) -> Result<Vec<Complex64>> {
        Ok(poly::companion_roots(&self.q_scaled(scale))?
            .into_iter()
            .map(|x| x * scale)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub z_stable: bool,
    pub t_stable: bool,
    /// Sorted by real part.
    #[serde(serialize_with = "serialize_roots")]
    pub roots_nu: [Complex64; 5],
    pub classification: Phase,
    /// `max |Im x| / max(1, |x|)` over the scaled roots `x = nu / scale`.
    pub max_offaxis: f64,
    /// Smallest pairwise distance between real scaled roots, relative to `max(1, |x|)`.
    pub min_separation: f64,
    pub real_root_count: usize,
}

fn serialize_roots<S: serde::Serializer>(roots: &[Complex64; 5], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(5))?;
    for z in roots {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol < 1e-4 {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(tol))
    }
}

/// Root-set summary in scaled units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSummary {
    pub all_real: bool,
    pub real_count: usize,
    pub max_offaxis: f64,
    pub min_separation: f64,
    pub marginal: bool,
}

pub fn summarize_roots(scaled: &[Complex64], tol: f64) -> RootSummary {
    let offaxis: Vec<f64> = scaled.iter().map(|x| x.im.abs() / x.norm().max(1.0)).collect();
    let real: Vec<f64> = scaled
        .iter()
        .zip(&offaxis)
        .filter(|(_, &o)| o <= tol)
        .map(|(x, _)| x.re)
        .collect();
    let mut min_separation = f64::INFINITY;
    for i in 0..real.len() {
        for j in 0..i {
            let scale = real[i].abs().max(real[j].abs()).max(1.0);
            min_separation = min_separation.min((real[i] - real[j]).abs() / scale);
        }
    }
    let max_offaxis = offaxis.iter().copied().fold(0.0, f64::max);
    let near_axis = offaxis.iter().any(|&o| o > 0.0 && o <= MARGIN_FACTOR * tol);
    RootSummary {
        all_real: real.len() == scaled.len(),
        real_count: real.len(),
        max_offaxis,
        min_separation,
        marginal: near_axis || min_separation <= MARGIN_FACTOR * tol,
    }
}

pub fn classify_point(d: &DerivedQuantities, model: &QuadraticModel, tol: f64) -> Result<StabilityVerdict> {
    classify_polynomial(
        &pt_coefficients(d),
        model.freq_scale,
        d.omega_z_sq > 0.0,
        d.omega_d > d.omega_l,
        tol,
    )
}

/// Classification from the transverse polynomial alone. `edh` selects the
/// label used when the point is stable.
pub fn classify_polynomial(
    poly: &CharPolyT,
    scale: f64,
    z_stable: bool,
    edh: bool,
    tol: f64,
) -> Result<StabilityVerdict> {
    check_tol(tol)?;
    let mut scaled = poly::companion_roots(&poly.q_scaled(scale))?;
    scaled.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let summary = summarize_roots(&scaled, tol);

    let t_stable = summary.all_real && summary.min_separation > tol;
    let classification = if !z_stable {
        Phase::Unstable
    } else if summary.marginal {
        Phase::Marginal
    } else if t_stable {
        if edh {
            Phase::StableEdh
        } else {
            Phase::StableA
        }
    } else {
        Phase::Unstable
    };

    let mut roots_nu = [Complex64::new(0.0, 0.0); 5];
    for (r, x) in roots_nu.iter_mut().zip(&scaled) {
        *r = x * scale;
    }
    Ok(StabilityVerdict {
        z_stable,
        t_stable,
        roots_nu,
        classification,
        max_offaxis: summary.max_offaxis,
        min_separation: summary.min_separation,
        real_root_count: summary.real_count,
    })
}

/// Derives, builds and classifies one parameter point.
pub fn classify_params(c: &PhysicalConstants, p: &SystemParams, tol: f64) -> Result<StabilityVerdict> {
    let d = derive_quantities(c, p)?;
    let model = build_model(&d)?;
    classify_point(&d, &model, tol)
}

/// Exact distinct-real-root count of the scaled monic `q`, for comparison
/// with the tolerance-based count.
pub fn sturm_real_roots(d: &DerivedQuantities, model: &QuadraticModel) -> usize {
    sturm::count_real_roots(&pt_coefficients(d).q_scaled(model.freq_scale))
}

/// Largest distance (scaled units) between the eigenvalues of `i KT` and the
/// roots of `P_T` together with their conjugates, under a greedy
/// closest-pair matching.
pub fn crosscheck_spectrum(model: &QuadraticModel, poly: &CharPolyT) -> f64 {
    let scale = model.freq_scale;
    let Ok(eig) = model.kt_eigenvalues_scaled() else {
        return f64::INFINITY;
    };
    let Ok(roots_nu) = poly.roots_nu(scale) else {
        return f64::INFINITY;
    };
    let eig: Vec<Complex64> = eig.iter().map(|z| z * Complex64::i()).collect();
    let mut targets: Vec<Complex64> = roots_nu.iter().map(|nu| Complex64::i() * nu / scale).collect();
    targets.extend(targets.clone().iter().map(|z| z.conj()));

    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(100);
    for (i, e) in eig.iter().enumerate() {
        for (j, t) in targets.iter().enumerate() {
            pairs.push(((e - t).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut used_e = [false; 10];
    let mut used_t = [false; 10];
    let mut worst: f64 = 0.0;
    for (dist, i, j) in pairs {
        if !used_e[i] && !used_t[j] {
            used_e[i] = true;
            used_t[j] = true;
            worst = worst.max(dist);
        }
    }
    if used_e.iter().all(|&u| u) {
        worst
    } else {
        f64::INFINITY
    }
}

/// Closed-form phase borders of the reference diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticBorders {
    /// Lower edge of the Einstein-de Haas window (T).
    pub b_c1: f64,
    /// Lower edge of the atom-like phase (T).
    pub b_c2: f64,
    #[serde(skip)]
    rc_prefactor: f64,
}

impl AnalyticBorders {
    /// Upper radius of the Einstein-de Haas window at bias `b0` (m).
    pub fn r_c(&self, b0: f64) -> f64 {
        (self.rc_prefactor / b0).sqrt()
    }
}

pub fn analytic_borders(c: &PhysicalConstants, p: &SystemParams) -> AnalyticBorders {
    let b_c1 = 3.0 * (c.hbar * p.rho_mu * p.b_grad * p.b_grad / (4.0 * c.mu_b * c.gamma0 * p.rho_m)).cbrt();
    let b_c2 = 2.0 * p.k_a * c.mu_b / (c.hbar * c.gamma0 * p.rho_mu);
    let rc_prefactor = 5.0 * p.rho_mu / (8.0 * c.gamma0 * c.gamma0 * p.rho_m);
    AnalyticBorders {
        b_c1,
        b_c2,
        rc_prefactor,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

/// `n` points from `min` to `max` inclusive.
pub fn axis(min: f64, max: f64, n: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && min > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "range [{min}, {max}] must be positive and finite"
        )));
    }
    if n == 0 || n > MAX_GRID {
        return Err(Error::InvalidGrid(format!("{n} points outside 1..={MAX_GRID}")));
    }
    if n == 1 {
        return Ok(vec![min]);
    }
    if max <= min {
        return Err(Error::InvalidGrid(format!("max {max} must exceed min {min}")));
    }
    let step = |i: usize| i as f64 / (n - 1) as f64;
    let mut out: Vec<f64> = match spacing {
        Spacing::Log => {
            let (a, b) = (min.ln(), max.ln());
            (0..n).map(|i| (a + (b - a) * step(i)).exp()).collect()
        }
        Spacing::Linear => (0..n).map(|i| min + (max - min) * step(i)).collect(),
    };
    out[0] = min;
    out[n - 1] = max;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub classification: Phase,
    pub max_offaxis: f64,
    pub omega_l: f64,
    pub omega_d: f64,
    pub omega_i: f64,
    pub note: Option<String>,
}

impl SweepCell {
    fn evaluate(c: &PhysicalConstants, p: &SystemParams, tol: f64) -> Self {
        let failed = |note: String, d: Option<&DerivedQuantities>| SweepCell {
            classification: Phase::Unstable,
            max_offaxis: f64::NAN,
            omega_l: d.map_or(f64::NAN, |d| d.omega_l),
            omega_d: d.map_or(f64::NAN, |d| d.omega_d),
            omega_i: d.map_or(f64::NAN, |d| d.omega_i),
            note: Some(note),
        };
        let d = match derive_quantities(c, p) {
            Ok(d) => d,
            Err(e) => return failed(e.to_string(), None),
        };
        match build_model(&d).and_then(|m| classify_point(&d, &m, tol)) {
            Ok(v) => SweepCell {
                classification: v.classification,
                max_offaxis: v.max_offaxis,
                omega_l: d.omega_l,
                omega_d: d.omega_d,
                omega_i: d.omega_i,
                note: None,
            },
            Err(e) => failed(e.to_string(), Some(&d)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDiagram {
    pub b0_axis: Vec<f64>,
    pub r_axis: Vec<f64>,
    /// Row-major with `R` as the slow index.
    pub cells: Vec<SweepCell>,
    pub borders: AnalyticBorders,
}

/// A 4-connected set of stable cells, as `(i_r, i_b0)` indices.
#[derive(Debug, Clone, PartialEq)]
pub struct StableComponent {
    pub cells: Vec<(usize, usize)>,
    pub n_edh: usize,
    pub n_a: usize,
}

impl StableComponent {
    pub fn dominant(&self) -> Phase {
        if self.n_edh >= self.n_a {
            Phase::StableEdh
        } else {
            Phase::StableA
        }
    }

    pub fn mean_b0_index(&self) -> f64 {
        self.cells.iter().map(|&(_, j)| j as f64).sum::<f64>() / self.cells.len() as f64
    }
}

impl PhaseDiagram {
    pub fn cell(&self, i_r: usize, i_b0: usize) -> &SweepCell {
        &self.cells[i_r * self.b0_axis.len() + i_b0]
    }

    pub fn stable_components(&self) -> Vec<StableComponent> {
        let (nr, nb) = (self.r_axis.len(), self.b0_axis.len());
        let mut seen = vec![false; nr * nb];
        let mut out = Vec::new();
        for start in 0..nr * nb {
            if seen[start] || !self.cells[start].classification.is_stable() {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = StableComponent {
                cells: Vec::new(),
                n_edh: 0,
                n_a: 0,
            };
            while let Some(k) = stack.pop() {
                let (i, j) = (k / nb, k % nb);
                comp.cells.push((i, j));
                match self.cells[k].classification {
                    Phase::StableEdh => comp.n_edh += 1,
                    _ => comp.n_a += 1,
                }
                let mut push = |ii: usize, jj: usize| {
                    let kk = ii * nb + jj;
                    if !seen[kk] && self.cells[kk].classification.is_stable() {
                        seen[kk] = true;
                        stack.push(kk);
                    }
                };
                if i > 0 {
                    push(i - 1, j);
                }
                if i + 1 < nr {
                    push(i + 1, j);
                }
                if j > 0 {
                    push(i, j - 1);
                }
                if j + 1 < nb {
                    push(i, j + 1);
                }
            }
            comp.cells.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Classifies every `(R, B0)` cell in parallel on the current rayon pool.
pub fn sweep_grid(
    c: &PhysicalConstants,
    p_template: &SystemParams,
    b0_axis: &[f64],
    r_axis: &[f64],
    tol: f64,
) -> Result<PhaseDiagram> {
    check_tol(tol)?;
    for (name, ax) in [("B0", b0_axis), ("R", r_axis)] {
        if ax.len() < 2 || ax.len() > MAX_GRID {
            return Err(Error::InvalidGrid(format!("{name} axis needs 2..={MAX_GRID} points")));
        }
        let increasing = |a: f64, b: f64| a.partial_cmp(&b) == Some(std::cmp::Ordering::Less);
        if ax.windows(2).any(|w| !increasing(w[0], w[1])) || !increasing(0.0, ax[0]) {
            return Err(Error::InvalidGrid(format!(
                "{name} axis must be positive and strictly increasing"
            )));
        }
    }
    let nb = b0_axis.len();
    let cells: Vec<SweepCell> = (0..r_axis.len() * nb)
        .into_par_iter()
        .map(|k| SweepCell::evaluate(c, &p_template.with_point(r_axis[k / nb], b0_axis[k % nb]), tol))
        .collect();
    Ok(PhaseDiagram {
        b0_axis: b0_axis.to_vec(),
        r_axis: r_axis.to_vec(),
        cells,
        borders: analytic_borders(c, p_template),
    })
}

fn point_phase(c: &PhysicalConstants, p: &SystemParams, tol: f64) -> Result<Phase> {
    check_tol(tol)?;
    match classify_params(c, p, tol) {
        Ok(v) => Ok(v.classification),
        Err(Error::InvalidTolerance(t)) => Err(Error::InvalidTolerance(t)),
        Err(e) if e.is_input_error() => Err(e),
        Err(_) => Ok(Phase::Unstable),
    }
}

fn bisect(lo: f64, hi: f64, mut phase_at: impl FnMut(f64) -> Result<Phase>) -> Result<f64> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "bracket [{lo}, {hi}] must be positive and increasing"
        )));
    }
    let (mut lo, mut hi) = (lo, hi);
    let lo_phase = phase_at(lo)?;
    let hi_phase = phase_at(hi)?;
    if lo_phase == hi_phase {
        return Err(Error::NoSignChange {
            lo,
            hi,
            class: lo_phase.to_string(),
        });
    }
    while hi / lo - 1.0 > BISECTION_WIDTH {
        let mid = (lo * hi).sqrt();
        if phase_at(mid)? == lo_phase {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bias field at which the classification changes between the bracket ends, at fixed radius.
pub fn refine_boundary(
    c: &PhysicalConstants,
    p_template: &SystemParams,
    fixed_r: f64,
    b0_bracket: (f64, f64),
    tol: f64,
) -> Result<f64> {
    bisect(b0_bracket.0, b0_bracket.1, |b0| {
        point_phase(c, &p_template.with_point(fixed_r, b0), tol)
    })
}

/// Radius at which the classification changes between the bracket ends, at fixed bias.
pub fn refine_radius_boundary(
    c: &PhysicalConstants,
    p_template: &SystemParams,
    fixed_b0: f64,
    r_bracket: (f64, f64),
    tol: f64,
) -> Result<f64> {
    bisect(r_bracket.0, r_bracket.1, |r| {
        point_phase(c, &p_template.with_point(r, fixed_b0), tol)
    })
}
