//! Python bindings: `import tfock`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use tfock_core::ergodic::{self, CesaroSpec, CommutantConfig, GeneratorFamily};
use tfock_core::spectral::{self, cauchy, SpectrumSet};
use tfock_core::wick::{self, full::normal_order_full};
use tfock_core::{Complex64, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NoConvergence { .. }
        | Error::PathDisagreement { .. }
        | Error::NearZeroDenominator { .. }
        | Error::SetMismatch(_)
        | Error::Tolerance(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn word_or_str(word: &Bound<'_, PyAny>) -> PyResult<tfock_core::Monomial> {
    if let Ok(w) = word.cast::<Word>() {
        return Ok(w.borrow().0.clone());
    }
    let s: String = word.extract()?;
    s.parse().map_err(py_err)
}

/// Deformation parameter `t`, truncation level `m` and window half-width `L`.
#[pyclass(frozen, from_py_object, name = "Params", module = "tfock")]
#[derive(Clone, Copy)]
struct Params(tfock_core::ModelParams);

#[pymethods]
impl Params {
    #[new]
    #[pyo3(signature = (t, m, window = 1))]
    fn new(t: f64, m: usize, window: i64) -> PyResult<Self> {
        tfock_core::ModelParams::new(t, m, window)
            .map(Self)
            .map_err(py_err)
    }

    #[getter]
    fn t(&self) -> f64 {
        self.0.t
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m
    }

    #[getter]
    fn window(&self) -> i64 {
        self.0.window
    }

    /// Number of basis words of length at most `m` over `2L + 1` modes.
    fn dimension(&self) -> u128 {
        self.0.dimension()
    }

    fn __repr__(&self) -> String {
        format!(
            "Params(t={}, m={}, window={})",
            self.0.t, self.0.m, self.0.window
        )
    }
}

/// A monomial in creators `c_i`, annihilators `a_i` and level projections `p_h`.
#[pyclass(frozen, from_py_object, name = "Word", module = "tfock")]
#[derive(Clone)]
struct Word(tfock_core::Monomial);

#[pymethods]
impl Word {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        text.parse().map(Self).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Word('{}')", self.0)
    }

    fn shifted(&self, k: i64, window: i64) -> PyResult<Self> {
        self.0.shifted(k, window).map(Self).map_err(py_err)
    }

    fn normal_order(&self, params: &Params) -> PyResult<NormalForm> {
        wick::normal_order(&self.0, &params.0)
            .map(NormalForm)
            .map_err(py_err)
    }

    /// Matrix in the orthonormalized word basis, as nested lists.
    fn matrix(&self, params: &Params) -> PyResult<Vec<Vec<Complex64>>> {
        let dense = self
            .0
            .to_operator(&params.0)
            .and_then(|op| op.to_orthonormal_dense())
            .map_err(py_err)?;
        Ok(dense
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect())
    }
}

/// Wick-ordered form `Σ c · a†…P_h…a`.
#[pyclass(frozen, name = "NormalForm", module = "tfock")]
struct NormalForm(wick::NormalForm);

#[pymethods]
impl NormalForm {
    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("NormalForm('{}')", self.0)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn terms(&self) -> Vec<(String, Complex64)> {
        self.0.terms().map(|(t, c)| (t.to_string(), *c)).collect()
    }

    /// Conditional expectation onto the shift-fixed algebra.
    fn expectation(&self) -> NormalForm {
        NormalForm(wick::fixed_point_expectation(&self.0))
    }

    /// Coefficients on `P_0..P_m`, or `None` if other terms are present.
    fn projection_coefficients(&self) -> Option<Vec<Complex64>> {
        self.0.projection_coefficients()
    }

    fn matrix(&self, params: &Params) -> PyResult<Vec<Vec<Complex64>>> {
        let dense = self
            .0
            .to_operator(&params.0)
            .and_then(|op| op.to_orthonormal_dense())
            .map_err(py_err)?;
        Ok(dense
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect())
    }
}

/// Finitely supported probability measure on the real line.
#[pyclass(frozen, name = "Measure", module = "tfock")]
struct Measure(spectral::DiscreteMeasure);

#[pymethods]
impl Measure {
    #[getter]
    fn atoms(&self) -> Vec<(f64, f64)> {
        self.0.atoms.iter().map(|a| (a.z, a.b)).collect()
    }

    fn support(&self) -> Vec<f64> {
        self.0.support()
    }

    fn weights(&self) -> Vec<f64> {
        self.0.weights()
    }

    fn moment(&self, n: u32) -> f64 {
        self.0.moment(n)
    }

    fn cauchy(&self, z: Complex64) -> PyResult<Complex64> {
        cauchy::cauchy_rational(&self.0, z).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.0.atoms.len()
    }

    fn __repr__(&self) -> String {
        format!("Measure({:?})", self.atoms())
    }
}

/// Vacuum spectral measure of `x_0` on the m-truncated space.
#[pyfunction]
fn measure(m: usize, t: f64) -> PyResult<Measure> {
    spectral::truncated_measure(m, t)
        .map(Measure)
        .map_err(py_err)
}

/// Spectrum of the truncated position operator as a sorted list.
#[pyfunction]
fn spectrum(m: usize, t: f64) -> PyResult<Vec<f64>> {
    match spectral::spectrum_truncated(m, t).map_err(py_err)? {
        SpectrumSet::Finite(points) => Ok(points),
        SpectrumSet::Band { .. } => unreachable!("truncated spectrum is finite"),
    }
}

/// Full-space spectrum: `(half_width, outliers)`.
#[pyfunction]
fn spectrum_full(t: f64) -> PyResult<(f64, Vec<f64>)> {
    match spectral::spectrum_full(t).map_err(py_err)? {
        SpectrumSet::Band {
            half_width,
            outliers,
        } => Ok((half_width, outliers)),
        SpectrumSet::Finite(_) => unreachable!("full spectrum is a band"),
    }
}

/// Diagonalizes `x_1` on the window `[-L, L]` and returns its distinct eigenvalues.
#[pyfunction]
fn verify_spectrum(m: usize, t: f64, window: i64) -> PyResult<Vec<f64>> {
    spectral::verify_spectrum(m, t, window)
        .map(|v| v.window_spectrum)
        .map_err(py_err)
}

/// Cauchy transform of the vacuum measure at `z` (`Im z > 0`).
#[pyfunction]
#[pyo3(signature = (m, t, z, method = "rational"))]
fn cauchy_transform(m: usize, t: f64, z: Complex64, method: &str) -> PyResult<Complex64> {
    match method {
        "rational" => {
            spectral::truncated_measure(m, t).and_then(|mu| cauchy::cauchy_rational(&mu, z))
        }
        "cfrac" => cauchy::cauchy_cfrac_truncated(m, t, z),
        "hierarchy" => cauchy::cauchy_hierarchy(m, t, z),
        other => return Err(PyValueError::new_err(format!("unknown method '{other}'"))),
    }
    .map_err(py_err)
}

#[pyfunction]
fn normal_order(word: &Bound<'_, PyAny>, m: usize, t: f64) -> PyResult<NormalForm> {
    let w = word_or_str(word)?;
    let params = tfock_core::ModelParams::new(t, m, w.max_abs_mode().max(1)).map_err(py_err)?;
    wick::normal_order(&w, &params)
        .map(NormalForm)
        .map_err(py_err)
}

/// Coefficients of `E(word)` on `P_0..P_m`.
#[pyfunction]
fn expectation(word: &Bound<'_, PyAny>, m: usize, t: f64) -> PyResult<Vec<Complex64>> {
    Ok(normal_order(word, m, t)?
        .expectation()
        .projection_coefficients()
        .expect("expectation lies in span{P_h}"))
}

/// Full-space expectation `(vacuum, rest)`: the coefficients of `P_Ω` and `I − P_Ω`.
#[pyfunction]
fn expectation_full(word: &Bound<'_, PyAny>, t: f64) -> PyResult<(Complex64, Complex64)> {
    let e = normal_order_full(&word_or_str(word)?, t)
        .map_err(py_err)?
        .expectation();
    Ok((e.vacuum, e.rest))
}

/// Invariant state with barycentric weights on the extreme states, evaluated on `word`.
#[pyfunction]
fn state(word: &Bound<'_, PyAny>, m: usize, t: f64, weights: Vec<f64>) -> PyResult<Complex64> {
    let w = word_or_str(word)?;
    let params = tfock_core::ModelParams::new(t, m, w.max_abs_mode().max(1)).map_err(py_err)?;
    wick::invariant_state_eval(&weights, &w, &params).map_err(py_err)
}

/// `‖(1/n) Σ_{k<n} τ^k(word)‖`, on a window wide enough for every shift by default.
#[pyfunction]
#[pyo3(signature = (word, m, t, n, window = None, tol = ergodic::DEFAULT_NORM_TOL, seed = 7))]
fn cesaro_norm(
    word: &Bound<'_, PyAny>,
    m: usize,
    t: f64,
    n: usize,
    window: Option<i64>,
    tol: f64,
    seed: u64,
) -> PyResult<f64> {
    let w = word_or_str(word)?;
    let window = window.unwrap_or(w.max_abs_mode() + n as i64).max(1);
    let params = tfock_core::ModelParams::new(t, m, window).map_err(py_err)?;
    let spec = CesaroSpec::new(w, n, params).map_err(py_err)?;
    let sum = ergodic::cesaro_sum(&spec).map_err(py_err)?;
    let norm = ergodic::operator_norm(&sum, tol, seed).map_err(py_err)?;
    Ok(norm.value / n as f64)
}

/// Dimension of the commutant on the reachable interior subspace.
#[pyfunction]
#[pyo3(signature = (m, window, t = 0.7, projections_only = false))]
fn commutant_dimension(m: usize, window: i64, t: f64, projections_only: bool) -> PyResult<usize> {
    let params = tfock_core::ModelParams::new(t, m, window).map_err(py_err)?;
    let family = if projections_only {
        GeneratorFamily::ProjectionsOnly
    } else {
        GeneratorFamily::All
    };
    ergodic::commutant_dimension(&CommutantConfig {
        params,
        family,
        depth: m + 1,
    })
    .map(|r| r.dimension)
    .map_err(py_err)
}

#[pymodule]
fn tfock(module: &Bound<'_, PyModule>) -> PyResult<()> {
    module.add_class::<Params>()?;
    module.add_class::<Word>()?;
    module.add_class::<NormalForm>()?;
    module.add_class::<Measure>()?;
    module.add_function(wrap_pyfunction!(measure, module)?)?;
    module.add_function(wrap_pyfunction!(spectrum, module)?)?;
    module.add_function(wrap_pyfunction!(spectrum_full, module)?)?;
    module.add_function(wrap_pyfunction!(verify_spectrum, module)?)?;
    module.add_function(wrap_pyfunction!(cauchy_transform, module)?)?;
    module.add_function(wrap_pyfunction!(normal_order, module)?)?;
    module.add_function(wrap_pyfunction!(expectation, module)?)?;
    module.add_function(wrap_pyfunction!(expectation_full, module)?)?;
    module.add_function(wrap_pyfunction!(state, module)?)?;
    module.add_function(wrap_pyfunction!(cesaro_norm, module)?)?;
    module.add_function(wrap_pyfunction!(commutant_dimension, module)?)?;
    Ok(())
}
