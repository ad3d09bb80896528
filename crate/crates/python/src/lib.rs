use maglev::{
    analytic_borders, axis, build_model, classify_point, crosscheck_spectrum, derive_quantities, pt_coefficients,
    refine_boundary, state_at, state_scan as core_state_scan, sweep_grid, Config, Error, PhysicalConstants, Spacing,
    SystemParams,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyComplex, PyDict};

fn to_py(e: Error) -> PyErr {
    if e.is_input_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

/// Physical inputs plus constants. Defaults are the reference material and trap.
#[pyclass(name = "Params", skip_from_py_object)]
#[derive(Clone)]
struct Params {
    #[pyo3(get, set)]
    rho_m: f64,
    #[pyo3(get, set)]
    rho_mu: f64,
    #[pyo3(get, set)]
    k_a: f64,
    #[pyo3(get, set)]
    radius: f64,
    #[pyo3(get, set)]
    b0: f64,
    #[pyo3(get, set)]
    b_grad: f64,
    #[pyo3(get, set)]
    b_curv: f64,
    #[pyo3(get, set)]
    omega_s: f64,
    #[pyo3(get, set)]
    gamma0: f64,
}

impl Params {
    fn constants(&self) -> PhysicalConstants {
        PhysicalConstants {
            gamma0: self.gamma0,
            ..PhysicalConstants::default()
        }
    }

    fn system(&self) -> SystemParams {
        SystemParams {
            rho_m: self.rho_m,
            rho_mu: self.rho_mu,
            k_a: self.k_a,
            radius: self.radius,
            b0: self.b0,
            b_grad: self.b_grad,
            b_curv: self.b_curv,
            omega_s: self.omega_s,
        }
    }

    fn from_parts(c: &PhysicalConstants, p: &SystemParams) -> Self {
        Self {
            rho_m: p.rho_m,
            rho_mu: p.rho_mu,
            k_a: p.k_a,
            radius: p.radius,
            b0: p.b0,
            b_grad: p.b_grad,
            b_curv: p.b_curv,
            omega_s: p.omega_s,
            gamma0: c.gamma0,
        }
    }
}

#[pymethods]
impl Params {
    #[new]
    #[pyo3(signature = (radius, b0, rho_m=None, rho_mu=None, k_a=None, b_grad=None, b_curv=None, omega_s=0.0, gamma0=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        radius: f64,
        b0: f64,
        rho_m: Option<f64>,
        rho_mu: Option<f64>,
        k_a: Option<f64>,
        b_grad: Option<f64>,
        b_curv: Option<f64>,
        omega_s: f64,
        gamma0: Option<f64>,
    ) -> Self {
        let c = PhysicalConstants::default();
        let r = SystemParams::reference(&c, radius, b0);
        let mut p = Self::from_parts(&c, &r);
        p.rho_m = rho_m.unwrap_or(r.rho_m);
        p.rho_mu = rho_mu.unwrap_or(r.rho_mu);
        p.k_a = k_a.unwrap_or(r.k_a);
        p.b_grad = b_grad.unwrap_or(r.b_grad);
        p.b_curv = b_curv.unwrap_or(r.b_curv);
        p.omega_s = omega_s;
        p.gamma0 = gamma0.unwrap_or(c.gamma0);
        p
    }

    /// Parses the CLI's JSON config format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let cfg = Config::from_json(text).map_err(to_py)?;
        Ok(Self::from_parts(&cfg.constants, &cfg.params))
    }

    fn with_point(&self, radius: f64, b0: f64) -> Self {
        Self {
            radius,
            b0,
            ..self.clone()
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Params(radius={:e}, b0={:e}, omega_s={:e})",
            self.radius, self.b0, self.omega_s
        )
    }
}

/// Derived quantities as a dict.
#[pyfunction]
fn derive<'py>(py: Python<'py>, params: PyRef<'_, Params>) -> PyResult<Bound<'py, PyDict>> {
    let d = derive_quantities(&params.constants(), &params.system()).map_err(to_py)?;
    let out = PyDict::new(py);
    for (k, v) in [
        ("S", d.spin),
        ("J", d.total_j),
        ("eta", d.eta),
        ("mass", d.mass),
        ("inertia", d.inertia),
        ("omega_L", d.omega_l),
        ("omega_D", d.omega_d),
        ("omega_I", d.omega_i),
        ("omega_Z_sq", d.omega_z_sq),
        ("omega_T", d.omega_t),
        ("omega_plus", d.omega_plus),
        ("omega_minus", d.omega_minus),
        ("omega_k", d.omega_k),
        ("omega_mu", d.omega_mu),
        ("g", d.g_coupling),
        ("r0", d.r0),
    ] {
        out.set_item(k, v)?;
    }
    out.set_item("z0", d.z0)?;
    Ok(out)
}

/// Coupling matrix and ladder-basis quadratic form as nested lists.
#[pyfunction]
fn matrices<'py>(py: Python<'py>, params: PyRef<'_, Params>) -> PyResult<Bound<'py, PyDict>> {
    let d = derive_quantities(&params.constants(), &params.system()).map_err(to_py)?;
    let m = build_model(&d).map_err(to_py)?;
    let rows =
        |x: &nalgebra::DMatrix<f64>| -> Vec<Vec<f64>> { x.row_iter().map(|r| r.iter().copied().collect()).collect() };
    let out = PyDict::new(py);
    out.set_item("C", rows(&nalgebra::DMatrix::from_fn(5, 5, |i, j| m.c[(i, j)])))?;
    out.set_item("MT", rows(&m.mt))?;
    out.set_item("KT", rows(&m.kt))?;
    Ok(out)
}

/// Stability verdict at one point.
#[pyfunction]
#[pyo3(signature = (params, tol=maglev::DEFAULT_TOL))]
fn classify<'py>(py: Python<'py>, params: PyRef<'_, Params>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
    let d = derive_quantities(&params.constants(), &params.system()).map_err(to_py)?;
    let model = build_model(&d).map_err(to_py)?;
    let v = classify_point(&d, &model, tol).map_err(to_py)?;
    let roots: Vec<Bound<'py, PyComplex>> = v
        .roots_nu
        .iter()
        .map(|z| PyComplex::from_doubles(py, z.re, z.im))
        .collect();
    let out = PyDict::new(py);
    out.set_item("classification", v.classification.as_str())?;
    out.set_item("code", v.classification.code())?;
    out.set_item("z_stable", v.z_stable)?;
    out.set_item("t_stable", v.t_stable)?;
    out.set_item("roots_nu", roots)?;
    out.set_item("max_offaxis", v.max_offaxis)?;
    out.set_item("crosscheck", crosscheck_spectrum(&model, &pt_coefficients(&d)))?;
    Ok(out)
}

/// Closed-form borders; `R_c` evaluated at the params' own bias.
#[pyfunction]
fn borders<'py>(py: Python<'py>, params: PyRef<'_, Params>) -> PyResult<Bound<'py, PyDict>> {
    let b = analytic_borders(&params.constants(), &params.system());
    let out = PyDict::new(py);
    out.set_item("B_c1", b.b_c1)?;
    out.set_item("B_c2", b.b_c2)?;
    out.set_item("R_c", b.r_c(params.b0))?;
    Ok(out)
}

/// Purities, entanglement, squeezing and normal frequencies at a stable point.
#[pyfunction]
#[pyo3(signature = (params, tol=maglev::DEFAULT_TOL))]
fn state<'py>(py: Python<'py>, params: PyRef<'_, Params>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
    let (model, t, m) = state_at(&params.constants(), &params.system(), tol).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("purities", m.purities.to_vec())?;
    out.set_item("entanglement", m.entanglement)?;
    out.set_item("squeezing", m.squeezing)?;
    out.set_item("omegas", t.omegas.to_vec())?;
    out.set_item("symplectic_residual", t.symplectic_residual(&model.g))?;
    Ok(out)
}

/// Classification grid over log- or linear-spaced axes; rows are radii.
#[pyfunction]
#[pyo3(signature = (params, b0_min, b0_max, r_min, r_max, n_b0, n_r, tol=maglev::DEFAULT_TOL, linear=false))]
#[allow(clippy::too_many_arguments)]
fn sweep<'py>(
    py: Python<'py>,
    params: PyRef<'_, Params>,
    b0_min: f64,
    b0_max: f64,
    r_min: f64,
    r_max: f64,
    n_b0: usize,
    n_r: usize,
    tol: f64,
    linear: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let sp = if linear { Spacing::Linear } else { Spacing::Log };
    let b0s = axis(b0_min, b0_max, n_b0, sp).map_err(to_py)?;
    let rs = axis(r_min, r_max, n_r, sp).map_err(to_py)?;
    let (c, p) = (params.constants(), params.system());
    let diagram = py.detach(|| sweep_grid(&c, &p, &b0s, &rs, tol)).map_err(to_py)?;
    let grid: Vec<Vec<u8>> = diagram
        .cells
        .chunks(b0s.len())
        .map(|row| row.iter().map(|c| c.classification.code()).collect())
        .collect();
    let out = PyDict::new(py);
    out.set_item("B0", diagram.b0_axis.clone())?;
    out.set_item("R", diagram.r_axis.clone())?;
    out.set_item("classification", grid)?;
    out.set_item("stable_components", diagram.stable_components().len())?;
    Ok(out)
}

/// Metrics along B0 at fixed radius; gap rows are `None`.
#[pyfunction]
#[pyo3(signature = (params, radius, b0_list, tol=maglev::DEFAULT_TOL))]
fn state_scan<'py>(
    py: Python<'py>,
    params: PyRef<'_, Params>,
    radius: f64,
    b0_list: Vec<f64>,
    tol: f64,
) -> PyResult<Vec<Option<Bound<'py, PyDict>>>> {
    let (c, p) = (params.constants(), params.system());
    let rows = py.detach(|| core_state_scan(&c, &p, radius, &b0_list, tol));
    rows.into_iter()
        .map(|r| {
            r.metrics
                .map(|m| {
                    let d = PyDict::new(py);
                    d.set_item("B0", r.b0)?;
                    d.set_item("purities", m.purities.to_vec())?;
                    d.set_item("entanglement", m.entanglement)?;
                    d.set_item("squeezing", m.squeezing)?;
                    Ok(d)
                })
                .transpose()
        })
        .collect()
}

/// Bias at which the classification changes inside `(lo, hi)` at fixed radius.
#[pyfunction]
#[pyo3(signature = (params, radius, lo, hi, tol=maglev::DEFAULT_TOL))]
fn boundary(params: PyRef<'_, Params>, radius: f64, lo: f64, hi: f64, tol: f64) -> PyResult<f64> {
    refine_boundary(&params.constants(), &params.system(), radius, (lo, hi), tol).map_err(to_py)
}

#[pymodule]
fn maglev_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Params>()?;
    m.add_function(wrap_pyfunction!(derive, m)?)?;
    m.add_function(wrap_pyfunction!(matrices, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(borders, m)?)?;
    m.add_function(wrap_pyfunction!(state, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(state_scan, m)?)?;
    m.add_function(wrap_pyfunction!(boundary, m)?)?;
    Ok(())
}
