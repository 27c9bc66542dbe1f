//! Python bindings. Signals are lists of floats, images lists of rows;
//! results come back in the same shape.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tvlinf::oracle::{self, Region, StepData};
use tvlinf::{
    adaptive, energy, generators, metrics, Error, GridSpec, InnerModel, RegParams, ScalarField,
    VectorField,
};

fn err(e: Error) -> PyErr {
    match e {
        Error::NotConverged(_) | Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A 1D signal or a 2D image as handed over from Python.
#[derive(FromPyObject)]
enum Data {
    Image(Vec<Vec<f64>>),
    Signal(Vec<f64>),
}

fn to_field(data: Data, h: f64) -> PyResult<ScalarField> {
    match data {
        Data::Signal(v) => ScalarField::new(GridSpec::line(v.len(), h).map_err(err)?, v).map_err(err),
        Data::Image(rows) => {
            let r = rows.len();
            let c = rows.first().map_or(0, Vec::len);
            if rows.iter().any(|row| row.len() != c) {
                return Err(PyValueError::new_err("image rows differ in length"));
            }
            let grid = GridSpec::new(&[r, c], &[h, h]).map_err(err)?;
            ScalarField::new(grid, rows.concat()).map_err(err)
        }
    }
}

fn shaped(py: Python<'_>, f: &ScalarField) -> PyResult<Py<PyAny>> {
    let grid = f.grid();
    Ok(if grid.dims() == 1 {
        f.values().to_vec().into_pyobject(py)?.into_any().unbind()
    } else {
        let cols = grid.sizes()[1];
        let rows: Vec<Vec<f64>> = f.values().chunks(cols).map(<[f64]>::to_vec).collect();
        rows.into_pyobject(py)?.into_any().unbind()
    })
}

fn shaped_vector(py: Python<'_>, w: &VectorField) -> PyResult<Vec<Py<PyAny>>> {
    (0..w.grid().dims())
        .map(|k| {
            let c = ScalarField::new(w.grid().clone(), w.component(k).to_vec()).map_err(err)?;
            shaped(py, &c)
        })
        .collect()
}

/// Result of a solve: `u`, the slope field `w` (one array per axis) and
/// iteration statistics.
#[pyclass(module = "tvlinf_py", get_all)]
struct Solution {
    u: Py<PyAny>,
    w: Vec<Py<PyAny>>,
    iterations: usize,
    converged: bool,
    energy: Option<f64>,
    energy_history: Vec<f64>,
    residual_history: Vec<f64>,
}

#[pymethods]
impl Solution {
    fn __repr__(&self) -> String {
        format!(
            "Solution(iterations={}, converged={}, energy={:?})",
            self.iterations, self.converged, self.energy
        )
    }
}

fn solution(
    py: Python<'_>,
    u: &ScalarField,
    w: Option<&VectorField>,
    report: &tvlinf::SolveReport,
) -> PyResult<Solution> {
    let zero = VectorField::zeros(u.grid());
    Ok(Solution {
        u: shaped(py, u)?,
        w: shaped_vector(py, w.unwrap_or(&zero))?,
        iterations: report.iterations,
        converged: report.converged,
        energy: report.final_energy(),
        energy_history: report.energy_history.clone(),
        residual_history: report.residual_history.clone(),
    })
}

fn params(
    alpha: f64,
    beta: Option<f64>,
    beta_map: Option<ScalarField>,
    tol: f64,
    max_iters: usize,
    mu: Option<f64>,
) -> PyResult<RegParams> {
    let mut p = match (beta, beta_map) {
        (_, Some(map)) => RegParams::with_beta_map(alpha, map),
        (Some(b), None) => RegParams::new(alpha, b),
        (None, None) => return Err(PyValueError::new_err("give beta or beta_map")),
    };
    p = p.tol(tol).max_iters(max_iters);
    if let Some(m) = mu {
        p = p.mu(m);
    }
    Ok(p)
}

/// Minimises `½‖f − u‖² + α‖∇u − w‖₁ + β‖w‖∞`; `beta_map` makes β spatially varying.
#[pyfunction]
#[pyo3(signature = (f, alpha, beta=None, *, beta_map=None, h=1.0, tol=1e-6, max_iters=20000, mu=None))]
#[allow(clippy::too_many_arguments)]
fn solve_tvlinf(
    py: Python<'_>,
    f: Data,
    alpha: f64,
    beta: Option<f64>,
    beta_map: Option<Data>,
    h: f64,
    tol: f64,
    max_iters: usize,
    mu: Option<f64>,
) -> PyResult<Solution> {
    let f = to_field(f, h)?;
    let map = beta_map.map(|m| to_field(m, h)).transpose()?;
    let p = params(alpha, beta, map, tol, max_iters, mu)?;
    let s = py.detach(|| tvlinf::solve_tvlinf(&f, &p)).map_err(err)?;
    solution(py, &s.u, Some(&s.w), &s.report)
}

/// Total-variation (ROF) denoising.
#[pyfunction]
#[pyo3(signature = (f, alpha, *, h=1.0, tol=1e-6, max_iters=20000))]
fn solve_tv(py: Python<'_>, f: Data, alpha: f64, h: f64, tol: f64, max_iters: usize) -> PyResult<Solution> {
    let f = to_field(f, h)?;
    let p = params(alpha, Some(1.0), None, tol, max_iters, None)?;
    let (u, report) = py.detach(|| tvlinf::solve_tv(&f, alpha, &p)).map_err(err)?;
    solution(py, &u, None, &report)
}

/// Second-order TGV denoising with first-order weight `alpha`, second-order `beta`.
#[pyfunction]
#[pyo3(signature = (f, alpha, beta, *, h=1.0, tol=1e-6, max_iters=20000))]
fn solve_tgv(
    py: Python<'_>,
    f: Data,
    alpha: f64,
    beta: f64,
    h: f64,
    tol: f64,
    max_iters: usize,
) -> PyResult<Solution> {
    let f = to_field(f, h)?;
    let p = params(alpha, Some(beta), None, tol, max_iters, None)?;
    let s = py.detach(|| tvlinf::solve_tgv(&f, alpha, beta, &p)).map_err(err)?;
    solution(py, &s.u, Some(&s.w), &s.report)
}

/// Bregman iterates `u¹ … u^K` of the TVL∞ (or, with `model="tv"`, TV) denoiser.
#[pyfunction]
#[pyo3(signature = (f, alpha, beta, outer, *, model="tvlinf", h=1.0, tol=1e-6, max_iters=20000))]
#[allow(clippy::too_many_arguments)]
fn bregman(
    py: Python<'_>,
    f: Data,
    alpha: f64,
    beta: f64,
    outer: usize,
    model: &str,
    h: f64,
    tol: f64,
    max_iters: usize,
) -> PyResult<Vec<Py<PyAny>>> {
    let inner = match model {
        "tvlinf" => InnerModel::TvlInf,
        "tv" => InnerModel::Tv,
        "tgv" => InnerModel::Tgv { beta },
        other => return Err(PyValueError::new_err(format!("unknown model {other:?}"))),
    };
    let f = to_field(f, h)?;
    let p = params(alpha, Some(beta), None, tol, max_iters, None)?;
    let runs = py.detach(|| tvlinf::bregman_iterate(&f, &p, outer, inner)).map_err(err)?;
    runs.iter().map(|(u, _)| shaped(py, u)).collect()
}

/// Value of the TVL∞ energy at `(u, w)`; `w` holds one array per axis.
#[pyfunction]
#[pyo3(signature = (u, w, f, alpha, beta, *, h=1.0))]
fn energy_tvlinf(u: Data, w: Vec<Data>, f: Data, alpha: f64, beta: f64, h: f64) -> PyResult<f64> {
    let u = to_field(u, h)?;
    let comps = w
        .into_iter()
        .map(|c| to_field(c, h).map(ScalarField::into_values))
        .collect::<PyResult<Vec<_>>>()?;
    let w = VectorField::new(u.grid().clone(), comps).map_err(err)?;
    energy::energy_tvlinf(&u, &w, &to_field(f, h)?, &RegParams::new(alpha, beta)).map_err(err)
}

fn step(half_length: f64, jump: f64, slope: f64) -> PyResult<StepData> {
    StepData::new(half_length, jump, slope).map_err(err)
}

/// `"yellow"`, `"tv"` or `"other"` for step data on `(−L, L)`.
#[pyfunction]
fn classify_region(half_length: f64, jump: f64, slope: f64, alpha: f64, beta: f64) -> PyResult<&'static str> {
    Ok(match oracle::classify_region(&step(half_length, jump, slope)?, alpha, beta) {
        Region::YellowAffineJump => "yellow",
        Region::TvRegime => "tv",
        Region::OtherRegion => "other",
    })
}

/// Closed-form minimiser sampled at `n` cell centres: `(x, f, u, |w|)`.
#[pyfunction]
fn exact_solution(
    half_length: f64,
    jump: f64,
    slope: f64,
    alpha: f64,
    beta: f64,
    n: usize,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>, f64)> {
    let data = step(half_length, jump, slope)?;
    let sol = oracle::exact_solution_yellow(&data, alpha, beta).map_err(err)?;
    let (_, xs) = oracle::sample_points(half_length, n).map_err(err)?;
    let f = oracle::sample_data(&data, n).map_err(err)?;
    let (u, _) = sol.sample(n).map_err(err)?;
    Ok((xs, f.into_values(), u.into_values(), sol.w_mag()))
}

/// Exact discrete 1D ROF solution (taut string) with threshold `lam`.
#[pyfunction]
fn rof_1d_exact(y: Vec<f64>, lam: f64) -> Vec<f64> {
    oracle::rof_1d_exact(&y, lam)
}

/// Optimality-certificate residuals of a 1D pair `(u, w)`.
#[pyfunction]
#[pyo3(signature = (u, w, f, alpha, beta, *, h=1.0, tol=5e-3))]
#[allow(clippy::too_many_arguments)]
fn certificate<'py>(
    py: Python<'py>,
    u: Vec<f64>,
    w: Vec<f64>,
    f: Vec<f64>,
    alpha: f64,
    beta: f64,
    h: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let u = to_field(Data::Signal(u), h)?;
    let w = VectorField::new(u.grid().clone(), vec![w]).map_err(err)?;
    let f = to_field(Data::Signal(f), h)?;
    let c = oracle::build_certificate(&u, &w, &f, alpha, beta).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("phi", c.phi.values().to_vec())?;
    d.set_item("r_boundary", c.r_boundary)?;
    d.set_item("r_linf", c.r_linf)?;
    d.set_item("r_l1", c.r_l1)?;
    d.set_item("r_pairing", c.r_pairing)?;
    d.set_item("r_sign", c.r_sign)?;
    d.set_item("r_coupling", c.r_coupling)?;
    d.set_item("jump_edges", c.jump_edges)?;
    d.set_item("max_residual", c.max_residual())?;
    d.set_item("passed", c.passes(tol))?;
    Ok(d)
}

#[pyfunction]
fn ssim(a: Data, b: Data) -> PyResult<f64> {
    metrics::ssim(&to_field(a, 1.0)?, &to_field(b, 1.0)?).map_err(err)
}

#[pyfunction]
fn psnr(a: Data, b: Data) -> PyResult<f64> {
    metrics::psnr(&to_field(a, 1.0)?, &to_field(b, 1.0)?).map_err(err)
}

/// `c / (|∇G_σ f| + eps)`.
#[pyfunction]
#[pyo3(signature = (f, c, *, eps=1e-4, sigma=2.0, window=9, h=1.0))]
fn beta_from_data(py: Python<'_>, f: Data, c: f64, eps: f64, sigma: f64, window: usize, h: f64) -> PyResult<Py<PyAny>> {
    let b = adaptive::beta_from_data(&to_field(f, h)?, c, eps, sigma, window).map_err(err)?;
    shaped(py, &b)
}

/// `c / (|∇u_ref| + eps)`.
#[pyfunction]
#[pyo3(signature = (u_ref, c, *, eps=1e-4, h=1.0))]
fn beta_from_reference(py: Python<'_>, u_ref: Data, c: f64, eps: f64, h: f64) -> PyResult<Py<PyAny>> {
    let b = adaptive::beta_from_reference(&to_field(u_ref, h)?, c, eps).map_err(err)?;
    shaped(py, &b)
}

#[pyfunction]
fn circle(py: Python<'_>, n: usize) -> PyResult<Py<PyAny>> {
    shaped(py, &generators::circle_2d(n).map_err(err)?)
}

#[pyfunction]
fn pyramid(py: Python<'_>, n: usize) -> PyResult<Py<PyAny>> {
    shaped(py, &generators::pyramid_square_2d(n).map_err(err)?)
}

/// Affine step `slope·x + jump·[x > 0]` sampled at `n` cell centres of `(−L, L)`.
#[pyfunction]
#[pyo3(signature = (n, half_length=1.0, jump=1.0, slope=1.0))]
fn affine_step(n: usize, half_length: f64, jump: f64, slope: f64) -> PyResult<Vec<f64>> {
    Ok(generators::affine_step_1d(n, half_length, jump, slope)
        .map_err(err)?
        .into_values())
}

/// Adds seeded Gaussian noise of the given variance.
#[pyfunction]
fn add_noise(py: Python<'_>, f: Data, variance: f64, seed: u64) -> PyResult<Py<PyAny>> {
    shaped(py, &generators::add_gaussian_noise(&to_field(f, 1.0)?, variance, seed).map_err(err)?)
}

#[pymodule]
fn tvlinf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(solve_tvlinf, m)?)?;
    m.add_function(wrap_pyfunction!(solve_tv, m)?)?;
    m.add_function(wrap_pyfunction!(solve_tgv, m)?)?;
    m.add_function(wrap_pyfunction!(bregman, m)?)?;
    m.add_function(wrap_pyfunction!(energy_tvlinf, m)?)?;
    m.add_function(wrap_pyfunction!(classify_region, m)?)?;
    m.add_function(wrap_pyfunction!(exact_solution, m)?)?;
    m.add_function(wrap_pyfunction!(rof_1d_exact, m)?)?;
    m.add_function(wrap_pyfunction!(certificate, m)?)?;
    m.add_function(wrap_pyfunction!(ssim, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(beta_from_data, m)?)?;
    m.add_function(wrap_pyfunction!(beta_from_reference, m)?)?;
    m.add_function(wrap_pyfunction!(circle, m)?)?;
    m.add_function(wrap_pyfunction!(pyramid, m)?)?;
    m.add_function(wrap_pyfunction!(affine_step, m)?)?;
    m.add_function(wrap_pyfunction!(add_noise, m)?)?;
    Ok(())
}
