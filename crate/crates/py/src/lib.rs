//! Python bindings for `permstab`.

use std::path::PathBuf;
use std::sync::Arc;

use permstab::asymhom::{commuting_witnesses, distance_floor_to_commuting, flagship_family, Tech2Family};
use permstab::group::GroupSpec;
use permstab::lab::{nearest_homomorphism_bruteforce, run_experiment, ExperimentConfig, OracleCaps};
use permstab::rounding::{nearest_right_translation, theorem_almost_pipeline, AlmostOptions};
use permstab::spectral::{kazhdan_auto, SpectralOptions};
use permstab::{FinGroup, MarkedGroup, MarkedMap, Rational};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

fn err(e: permstab::Error) -> PyErr {
    match e {
        permstab::Error::Internal(_) | permstab::Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn fraction<'py>(py: Python<'py>, r: Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((*r.numer(), *r.denom()))
}

fn parse_fraction(s: &str) -> PyResult<Rational> {
    s.parse().map_err(|_| PyValueError::new_err(format!("cannot parse fraction {s:?}")))
}

fn to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(a) => {
            let list = PyList::empty(py);
            for x in a {
                list.append(to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(o) => {
            let dict = PyDict::new(py);
            for (k, x) in o {
                dict.set_item(k, to_py(py, x)?)?;
            }
            dict.into_any()
        }
    })
}

fn serialized<'py>(py: Python<'py>, v: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let value = serde_json::to_value(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    to_py(py, &value)
}

/// A permutation of `{0..n-1}` given by its images.
#[pyclass(name = "Perm", module = "permstab_py", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyPerm(permstab::Perm);

#[pymethods]
impl PyPerm {
    #[new]
    fn new(images: Vec<u32>) -> PyResult<Self> {
        permstab::Perm::from_images(images).map(PyPerm).map_err(err)
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        PyPerm(permstab::Perm::identity(n))
    }

    fn images(&self) -> Vec<u32> {
        self.0.images().to_vec()
    }

    fn apply(&self, x: usize) -> PyResult<usize> {
        if x >= self.0.len() {
            return Err(PyValueError::new_err("point out of range"));
        }
        Ok(self.0.apply(x))
    }

    /// `self ∘ other`.
    fn compose(&self, other: &PyPerm) -> PyResult<PyPerm> {
        self.0.compose(&other.0).map(PyPerm).map_err(err)
    }

    fn inverse(&self) -> PyPerm {
        PyPerm(self.0.inverse())
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Perm({:?})", self.0.images())
    }
}

/// Normalized Hamming distance as a `Fraction`.
#[pyfunction]
fn hamming<'py>(py: Python<'py>, a: &PyPerm, b: &PyPerm) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, permstab::hamming(&a.0, &b.0).map_err(err)?)
}

#[pyfunction]
fn hs_distance(a: &PyPerm, b: &PyPerm) -> PyResult<f64> {
    permstab::hs_distance(&a.0, &b.0).map_err(err)
}

/// `d_H(ab, ba)` as a `Fraction`.
#[pyfunction]
fn commutator_defect<'py>(py: Python<'py>, a: &PyPerm, b: &PyPerm) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, permstab::commutator_defect(&a.0, &b.0).map_err(err)?)
}

/// A finite group built from a spec such as `"sl2(5)"` or `"cyclic(4) x sym(3)"`.
#[pyclass(name = "Group", module = "permstab_py", frozen)]
struct PyGroup(Arc<FinGroup>);

#[pymethods]
impl PyGroup {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        let spec: GroupSpec = spec.parse().map_err(err)?;
        Ok(PyGroup(Arc::new(spec.build(&Default::default()).map_err(err)?)))
    }

    fn order(&self) -> usize {
        self.0.order()
    }

    fn name(&self) -> String {
        self.0.name().into()
    }

    fn generators(&self) -> Vec<u32> {
        self.0.generators().to_vec()
    }

    fn mul(&self, a: u32, b: u32) -> PyResult<u32> {
        self.check(&[a, b])?;
        Ok(self.0.mul(a, b))
    }

    fn inv(&self, a: u32) -> PyResult<u32> {
        self.check(&[a])?;
        Ok(self.0.inv(a))
    }

    fn label(&self, a: u32) -> PyResult<String> {
        self.check(&[a])?;
        Ok(self.0.label(a))
    }

    /// `x -> g x`.
    fn left_translation(&self, g: u32) -> PyResult<PyPerm> {
        self.check(&[g])?;
        Ok(PyPerm(self.0.left_translation(g)))
    }

    /// `x -> x g⁻¹`.
    fn right_translation(&self, g: u32) -> PyResult<PyPerm> {
        self.check(&[g])?;
        Ok(PyPerm(self.0.right_translation(g)))
    }

    /// Certified bracket on the Kazhdan constant for `gens` (default: the
    /// group's generators).
    #[pyo3(signature = (gens=None, tol=1e-8))]
    fn kazhdan<'py>(&self, py: Python<'py>, gens: Option<Vec<u32>>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        let s = gens.unwrap_or_else(|| self.0.generators().to_vec());
        self.check(&s)?;
        let opts = SpectralOptions { tol, ..SpectralOptions::default() };
        let g = Arc::clone(&self.0);
        let b = py.detach(|| kazhdan_auto(&g, &s, &opts)).map_err(err)?;
        serialized(py, &b)
    }

    /// Nearest right translation to `phi` with the `κ²·dist ≤ 4·defect` check.
    fn nearest_right_translation<'py>(
        &self,
        py: Python<'py>,
        s: Vec<u32>,
        phi: &PyPerm,
        kappa_lower: f64,
    ) -> PyResult<Bound<'py, PyAny>> {
        self.check(&s)?;
        serialized(py, &nearest_right_translation(&self.0, &s, &phi.0, kappa_lower).map_err(err)?)
    }

    /// Round an almost-action of the group generated by `k_gens` on
    /// `{0..y_size-1}` to an exact action.
    #[pyo3(signature = (y_size, k_gens, s=None, kappa_lower=None))]
    fn round_almost_action<'py>(
        &self,
        py: Python<'py>,
        y_size: usize,
        k_gens: Vec<PyRef<'py, PyPerm>>,
        s: Option<Vec<u32>>,
        kappa_lower: Option<f64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let s = s.unwrap_or_else(|| (1..self.0.order() as u32).collect());
        self.check(&s)?;
        let gens: Vec<permstab::Perm> = k_gens.iter().map(|p| p.0.clone()).collect();
        let opts = AlmostOptions { kappa_lower, ..AlmostOptions::default() };
        let g = Arc::clone(&self.0);
        let r = py
            .detach(|| theorem_almost_pipeline(g, &s, y_size, &gens, &opts))
            .map_err(err)?;
        serialized(py, &r)
    }

    fn __repr__(&self) -> String {
        format!("Group({}, order={})", self.0.name(), self.0.order())
    }
}

impl PyGroup {
    fn check(&self, xs: &[u32]) -> PyResult<()> {
        match xs.iter().find(|&&x| x as usize >= self.0.order()) {
            Some(x) => Err(PyValueError::new_err(format!("element {x} out of range"))),
            None => Ok(()),
        }
    }
}

/// The SL2(p) family with its generator images and defect data.
#[pyclass(name = "Family", module = "permstab_py", frozen)]
struct PyFamily(Tech2Family);

#[pymethods]
impl PyFamily {
    #[new]
    #[pyo3(signature = (p, alpha="1/7", beta="1/6", seed=0))]
    fn new(py: Python<'_>, p: u32, alpha: &str, beta: &str, seed: u64) -> PyResult<Self> {
        let (a, b) = (parse_fraction(alpha)?, parse_fraction(beta)?);
        py.detach(|| flagship_family(p, a, b, seed)).map(PyFamily).map_err(err)
    }

    fn order(&self) -> usize {
        self.0.order()
    }

    fn summary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        serialized(py, &self.0.summary())
    }

    /// Generator images in presentation order.
    fn images(&self) -> PyResult<Vec<PyPerm>> {
        Ok(self.0.marked_map().map_err(err)?.images.into_iter().map(PyPerm).collect())
    }

    /// `(h, closed-form defect, direct defect)` for each `h` in the image of Λ.
    fn commutator_curve<'py>(&self, py: Python<'py>) -> PyResult<Vec<(u32, Bound<'py, PyAny>, Bound<'py, PyAny>)>> {
        self.0
            .commutator_curve()
            .into_iter()
            .map(|c| Ok((c.h, fraction(py, c.closed_form)?, fraction(py, c.direct)?)))
            .collect()
    }

    fn distance_floor<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, distance_floor_to_commuting(&self.0))
    }

    #[pyo3(signature = (samples=8, seed=0))]
    fn witnesses<'py>(&self, py: Python<'py>, samples: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        serialized(py, &commuting_witnesses(&self.0, samples, seed))
    }
}

/// Nearest commuting pair to `(a, b)`, i.e. the nearest action of Z².
#[pyfunction]
#[pyo3(signature = (a, b, exhaustive_cap=10_000_000, seed=0))]
fn nearest_commuting_pair<'py>(
    py: Python<'py>,
    a: &PyPerm,
    b: &PyPerm,
    exhaustive_cap: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let m = MarkedMap::new(MarkedGroup::free_abelian(2, "a"), vec![a.0.clone(), b.0.clone()]).map_err(err)?;
    let caps = OracleCaps { exhaustive_cap, seed, ..OracleCaps::default() };
    let r = py.detach(|| nearest_homomorphism_bruteforce(&m, &caps)).map_err(err)?;
    serialized(py, &r)
}

/// Run an experiment grid from TOML text; returns the run report.
#[pyfunction]
#[pyo3(signature = (config, out, seed=None))]
fn run<'py>(py: Python<'py>, config: &str, out: PathBuf, seed: Option<u64>) -> PyResult<Bound<'py, PyAny>> {
    let mut cfg = ExperimentConfig::from_toml_str(config).map_err(err)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let report = py.detach(|| run_experiment(&cfg, &out)).map_err(err)?;
    serialized(py, &report)
}

#[pymodule]
fn permstab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPerm>()?;
    m.add_class::<PyGroup>()?;
    m.add_class::<PyFamily>()?;
    m.add_function(wrap_pyfunction!(hamming, m)?)?;
    m.add_function(wrap_pyfunction!(hs_distance, m)?)?;
    m.add_function(wrap_pyfunction!(commutator_defect, m)?)?;
    m.add_function(wrap_pyfunction!(nearest_commuting_pair, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
