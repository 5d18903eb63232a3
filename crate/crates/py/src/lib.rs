//! Python module `ppaas`.
//!
//! Matrices cross the boundary as lists of rows; reports come back as plain
//! dicts decoded from the JSON report.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use ppaas_core::attacks::{AttackSpec, DEFAULT_KNOWN_FRACTION, DEFAULT_RIDGE};
use ppaas_core::dataset::{self as ds, LabelColumn};
use ppaas_core::fis;
use ppaas_core::orchestrator::{self, PoolConfig};
use ppaas_core::perturbation::{self as pert, Perturbator};
use ppaas_core::privacy_metric::{self as pm, DEFAULT_BIN_WIDTH};
use ppaas_core::resistance_metric as rm;
use ppaas_core::utility_metric::Classifier;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != d) {
        return Err(err("rows must all have the same length"));
    }
    Ok(DMatrix::from_fn(n, d, |i, j| rows[i][j]))
}

fn json_to_py(py: Python<'_>, s: &str) -> PyResult<Py<PyAny>> {
    Ok(py.import("json")?.call_method1("loads", (s,))?.unbind())
}

#[pyclass(name = "Dataset", module = "ppaas", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDataset {
    inner: ds::Dataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    #[pyo3(signature = (features, labels, attr_names=None, label_name="class", id="py"))]
    fn new(
        features: Vec<Vec<f64>>,
        labels: Vec<String>,
        attr_names: Option<Vec<String>>,
        label_name: &str,
        id: &str,
    ) -> PyResult<Self> {
        let m = matrix(&features)?;
        let names = attr_names.unwrap_or_else(|| (0..m.ncols()).map(|j| format!("x{j}")).collect());
        Ok(Self {
            inner: ds::Dataset::new(id, m, labels, names, label_name).map_err(err)?,
        })
    }

    /// Loads a CSV; `label` is a column name or index, default last column.
    #[staticmethod]
    #[pyo3(signature = (path, label=None))]
    fn from_csv(path: &str, label: Option<&str>) -> PyResult<Self> {
        let sel = label.map_or(LabelColumn::Last, LabelColumn::parse);
        Ok(Self {
            inner: ds::load_csv(path, &sel).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (seed=0))]
    fn blobs(seed: u64) -> Self {
        Self {
            inner: ppaas_core::synthetic::blobs(seed),
        }
    }

    fn zscore(&self) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.zscore_normalize().map_err(err)?,
        })
    }

    fn features(&self) -> Vec<Vec<f64>> {
        rows(self.inner.features())
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    #[getter]
    fn attr_names(&self) -> Vec<String> {
        self.inner.attr_names().to_vec()
    }

    #[getter]
    fn n_records(&self) -> usize {
        self.inner.n_records()
    }

    #[getter]
    fn n_attrs(&self) -> usize {
        self.inner.n_attrs()
    }

    #[getter]
    fn normalized(&self) -> bool {
        self.inner.normalization() == ds::Normalization::Zscored
    }

    fn to_csv(&self, path: &str) -> PyResult<()> {
        let f = std::fs::File::create(path).map_err(err)?;
        self.inner.write_csv(f).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(id={:?}, n_records={}, n_attrs={}, normalized={})",
            self.inner.id(),
            self.inner.n_records(),
            self.inner.n_attrs(),
            self.normalized()
        )
    }
}

#[pyclass(name = "PerturbedInstance", module = "ppaas", frozen)]
struct PyPerturbed {
    inner: pert::PerturbedInstance,
}

#[pymethods]
impl PyPerturbed {
    fn features(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.features)
    }

    #[getter]
    fn algorithm(&self) -> &'static str {
        self.inner.algorithm().name()
    }

    #[getter]
    fn params(&self) -> BTreeMap<String, f64> {
        self.inner.provenance.params.clone()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.provenance.seed
    }

    fn provenance_json(&self) -> PyResult<String> {
        self.inner.provenance_json().map_err(err)
    }

    fn to_csv(&self, path: &str) -> PyResult<()> {
        std::fs::write(path, self.inner.to_csv_bytes()).map_err(err)
    }

    fn __repr__(&self) -> String {
        let (n, d) = self.inner.shape();
        format!("PerturbedInstance(algorithm={:?}, shape=({n}, {d}), seed={})", self.algorithm(), self.seed())
    }
}

#[pyclass(name = "FisModel", module = "ppaas", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyFisModel {
    inner: fis::FisModel,
}

#[pymethods]
impl PyFisModel {
    #[new]
    fn new() -> Self {
        Self {
            inner: fis::FisModel::default(),
        }
    }

    #[staticmethod]
    fn from_toml(document: &str) -> PyResult<Self> {
        Ok(Self {
            inner: fis::load_fis_config(document).map_err(err)?,
        })
    }

    fn fuzzy_index(&self, privacy: f64, resistance: f64, utility: f64) -> PyResult<f64> {
        fis::fuzzy_index(privacy, resistance, utility, &self.inner).map_err(err)
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml()
    }

    #[getter]
    fn n_rules(&self) -> usize {
        self.inner.rules.rules.len()
    }
}

#[pyfunction]
#[pyo3(signature = (x, bin_width=DEFAULT_BIN_WIDTH))]
fn inherent_uncertainty(x: Vec<f64>, bin_width: f64) -> PyResult<f64> {
    Ok(pm::inherent_uncertainty(&x, bin_width).map_err(err)?.h)
}

/// Minimum privacy guarantee of `perturbed` (instance or list of rows).
#[pyfunction]
#[pyo3(signature = (original, perturbed, bin_width=DEFAULT_BIN_WIDTH))]
fn min_privacy_guarantee(original: &PyDataset, perturbed: &Bound<'_, PyAny>, bin_width: f64) -> PyResult<f64> {
    let m = match perturbed.cast::<PyPerturbed>() {
        Ok(p) => p.get().inner.features.clone(),
        Err(_) => matrix(&perturbed.extract::<Vec<Vec<f64>>>()?)?,
    };
    Ok(pm::min_privacy_guarantee(&original.inner, &m, bin_width).map_err(err)?.minimum)
}

#[pyfunction]
fn scale_privacy(values: Vec<f64>) -> PyResult<Vec<f64>> {
    pm::scale_privacy(&values).map_err(err)
}

/// Returns `(scaled, degenerate)`.
#[pyfunction]
fn scale_resistance(values: Vec<f64>) -> PyResult<(Vec<f64>, bool)> {
    let s = rm::scale_resistance(&values).map_err(err)?;
    Ok((s.values, s.degenerate))
}

#[pyfunction]
fn var_p(x: Vec<f64>, xr: Vec<f64>) -> PyResult<f64> {
    rm::var_p(&x, &xr).map_err(err)
}

#[pyfunction]
fn accuracy(predictions: Vec<String>, truth: Vec<String>) -> PyResult<f64> {
    ppaas_core::utility_metric::accuracy(&predictions, &truth).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (privacy, resistance, utility, model=None))]
fn fuzzy_index(privacy: f64, resistance: f64, utility: f64, model: Option<&PyFisModel>) -> PyResult<f64> {
    let default;
    let m = match model {
        Some(m) => &m.inner,
        None => {
            default = fis::FisModel::default();
            &default
        }
    };
    fis::fuzzy_index(privacy, resistance, utility, m).map_err(err)
}

/// Perturbs a z-scored dataset with one algorithm
/// (`additive_noise`, `rotation`, `geometric`, `laplace_ldp`).
#[pyfunction]
#[pyo3(signature = (dataset, algorithm, seed=0, sigma=None, epsilon=None, iterations=None, bin_width=DEFAULT_BIN_WIDTH))]
fn perturb(
    dataset: &PyDataset,
    algorithm: &str,
    seed: u64,
    sigma: Option<f64>,
    epsilon: Option<f64>,
    iterations: Option<usize>,
    bin_width: f64,
) -> PyResult<PyPerturbed> {
    let mut p = Perturbator::from_name(algorithm).ok_or_else(|| err(format!("unknown algorithm {algorithm:?}")))?;
    match &mut p {
        Perturbator::AdditiveNoise { sigma: s } => *s = sigma.unwrap_or(*s),
        Perturbator::Rotation { iterations: it } => *it = iterations.unwrap_or(*it),
        Perturbator::Geometric { iterations: it, sigma: s } => {
            *it = iterations.unwrap_or(*it);
            *s = sigma.unwrap_or(*s);
        }
        Perturbator::LaplaceLdp { epsilon: e } => *e = epsilon.unwrap_or(*e),
    }
    Ok(PyPerturbed {
        inner: p.apply(&dataset.inner, seed, bin_width).map_err(err)?,
    })
}

/// Runs one attack (`naive`, `known_io`, `ica`); returns a dict with the
/// reconstruction and its per-attribute `Var(P)`.
#[pyfunction]
#[pyo3(signature = (perturbed, original, attack="known_io", seed=0, known_fraction=DEFAULT_KNOWN_FRACTION))]
fn run_attack(
    py: Python<'_>,
    perturbed: &PyPerturbed,
    original: &PyDataset,
    attack: &str,
    seed: u64,
    known_fraction: f64,
) -> PyResult<Py<PyAny>> {
    let spec = match attack {
        "known_io" => AttackSpec::KnownIo {
            known_fraction,
            ridge: DEFAULT_RIDGE,
        },
        other => AttackSpec::from_name(other).ok_or_else(|| err(format!("unknown attack {other:?}")))?,
    };
    let r = spec.run(&perturbed.inner, &original.inner, seed).map_err(err)?;
    let var = rm::var_per_attribute(&original.inner, &r).map_err(err)?;
    let min_var = var.iter().copied().fold(f64::INFINITY, f64::min);
    let out = serde_json::json!({
        "attack": r.attack.name(),
        "assumptions": r.assumptions,
        "per_attribute_var": var,
        "min_var": min_var,
        "min_std": min_var.sqrt(),
        "reconstructed": rows(&r.reconstructed),
    });
    json_to_py(py, &out.to_string())
}

/// Default pool configuration as a JSON string, editable and accepted by
/// `evaluate(config=...)`.
#[pyfunction]
fn default_config() -> String {
    serde_json::to_string_pretty(&PoolConfig::default()).expect("serializable")
}

/// Runs the release loop on a z-scored dataset. Returns `(report, released)`
/// where `released` is the winning instance or `None` when the threshold was
/// not met.
#[pyfunction]
#[pyo3(signature = (dataset, config=None, seed=None, fi_threshold=None, max_rounds=None, pool=None, attacks=None, classifiers=None))]
#[allow(clippy::too_many_arguments)]
fn evaluate(
    py: Python<'_>,
    dataset: &PyDataset,
    config: Option<&str>,
    seed: Option<u64>,
    fi_threshold: Option<f64>,
    max_rounds: Option<usize>,
    pool: Option<Vec<String>>,
    attacks: Option<Vec<String>>,
    classifiers: Option<Vec<String>>,
) -> PyResult<(Py<PyAny>, Option<PyPerturbed>)> {
    let mut cfg: PoolConfig = match config {
        Some(doc) => serde_json::from_str(doc).map_err(err)?,
        None => PoolConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = fi_threshold {
        cfg.fi_threshold = t;
    }
    if let Some(r) = max_rounds {
        cfg.max_rounds = r;
    }
    fn names<T>(v: &[String], f: impl Fn(&str) -> Option<T>) -> PyResult<Vec<T>> {
        v.iter().map(|n| f(n).ok_or_else(|| err(format!("unknown pool member {n:?}")))).collect()
    }
    if let Some(p) = pool {
        cfg.perturbators = names(&p, Perturbator::from_name)?;
    }
    if let Some(a) = attacks {
        cfg.attacks = names(&a, AttackSpec::from_name)?;
    }
    if let Some(c) = classifiers {
        cfg.classifiers = names(&c, Classifier::from_name)?;
    }
    let d = dataset.inner.clone();
    let outcome = py.detach(|| orchestrator::release_loop(&d, &cfg)).map_err(err)?;
    let report = json_to_py(py, &outcome.report.to_json().map_err(err)?)?;
    let released = outcome.released().cloned().map(|inner| PyPerturbed { inner });
    Ok((report, released))
}

#[pymodule]
fn ppaas(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyPerturbed>()?;
    m.add_class::<PyFisModel>()?;
    m.add_function(wrap_pyfunction!(inherent_uncertainty, m)?)?;
    m.add_function(wrap_pyfunction!(min_privacy_guarantee, m)?)?;
    m.add_function(wrap_pyfunction!(scale_privacy, m)?)?;
    m.add_function(wrap_pyfunction!(scale_resistance, m)?)?;
    m.add_function(wrap_pyfunction!(var_p, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(fuzzy_index, m)?)?;
    m.add_function(wrap_pyfunction!(perturb, m)?)?;
    m.add_function(wrap_pyfunction!(run_attack, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
