//! Python bindings. Inputs are JSON text or the equivalent Python dicts and
//! lists; reports come back as plain Python objects.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::{json, Value};

use dman_core::atlas::{self, AtlasDiagram};
use dman_core::io::{self, AtlasJson, CospanJson, CoverJson, HypercoverJson, PointJson, PresheafJson, PresheafMapJson};
use dman_core::qsmooth::{self as qs, CospanPresentation, RationalPoint};
use dman_core::sheaf::{self, Presheaf, PresheafMap};
use dman_core::simplicial::{self, IndexedHypercover};
use dman_core::sweep::{self, SweepBounds};

create_exception!(dman, DmanError, PyValueError);

fn err(e: dman_core::Error) -> PyErr {
    DmanError::new_err(format!("{}: {e}", e.kind()))
}

fn json_text(obj: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(s) = obj.extract::<String>() {
        return Ok(s);
    }
    obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()
}

fn parse<T: io::DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    io::from_str(&json_text(obj)?).map_err(err)
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(u)) => u.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for x in items {
                list.append(to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, x) in map {
                dict.set_item(k, to_py(py, x)?)?;
            }
            dict.into_any()
        }
    })
}

fn report<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let value = serde_json::to_value(v).map_err(|e| DmanError::new_err(e.to_string()))?;
    to_py(py, &value)
}

/// A monotone diagram of opens indexed by a finite poset.
#[pyclass(name = "Atlas", frozen)]
struct PyAtlas {
    inner: AtlasDiagram,
}

#[pymethods]
impl PyAtlas {
    #[new]
    fn new(data: &Bound<'_, PyAny>) -> PyResult<Self> {
        let j: AtlasJson = parse(data)?;
        Ok(PyAtlas {
            inner: j.to_model().map_err(err)?,
        })
    }

    /// Closes a cover `{"space": ..., "cover": [[points]]}` under intersections.
    #[staticmethod]
    fn complete(cover: &Bound<'_, PyAny>) -> PyResult<Self> {
        let (space, opens) = parse::<CoverJson>(cover)?.to_model().map_err(err)?;
        Ok(PyAtlas {
            inner: atlas::atlas_completion(&space, &opens).map_err(err)?,
        })
    }

    fn is_atlas(&self) -> bool {
        self.inner.is_atlas()
    }

    fn meet_condition(&self) -> PyResult<bool> {
        self.inner.is_atlas_meet_condition_default().map_err(err)
    }

    fn is_site(&self) -> bool {
        self.inner.is_site()
    }

    fn covered(&self) -> Vec<String> {
        self.inner.space().labels_of(self.inner.covered())
    }

    #[pyo3(signature = (trunc = 3))]
    fn to_hypercover(&self, trunc: usize) -> PyResult<PyHypercover> {
        Ok(PyHypercover {
            inner: simplicial::atlas_to_hypercover(&self.inner, trunc).map_err(err)?,
        })
    }

    fn subordinate(&self, atlas: &PyAtlas) -> PyResult<PyAtlas> {
        Ok(PyAtlas {
            inner: atlas::subordinate(&self.inner, &atlas.inner).map_err(err)?.diagram,
        })
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        report(py, &AtlasJson::from_model(&self.inner))
    }

    fn __repr__(&self) -> String {
        format!(
            "Atlas(|I|={}, points={}, atlas={})",
            self.inner.index().len(),
            self.inner.space().n_points(),
            self.inner.is_atlas()
        )
    }
}

/// A truncated simplicial system of opens.
#[pyclass(name = "Hypercover", frozen)]
struct PyHypercover {
    inner: IndexedHypercover,
}

#[pymethods]
impl PyHypercover {
    #[new]
    fn new(data: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(PyHypercover {
            inner: parse::<HypercoverJson>(data)?.to_model().map_err(err)?,
        })
    }

    #[pyo3(signature = (up_to = None))]
    fn is_hypercover(&self, up_to: Option<usize>) -> PyResult<bool> {
        self.inner
            .is_hypercover(up_to.unwrap_or(self.inner.truncation()))
            .map_err(err)
    }

    fn level_sizes(&self) -> Vec<usize> {
        self.inner.shape().sizes().to_vec()
    }

    /// Reads the hypercover back as a diagram; returns the verdicts and the
    /// diagram when one exists.
    fn to_atlas<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let r = simplicial::hypercover_to_atlas(&self.inner).map_err(err)?;
        let v = json!({
            "verdict": r.verdict(),
            "atlas_verdict": r.atlas_verdict,
            "joins_verdict": r.joins_verdict,
            "horizon": r.horizon,
            "diagram": r.diagram.as_ref().map(AtlasJson::from_model),
        });
        to_py(py, &v)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        report(py, &HypercoverJson::from_model(&self.inner))
    }
}

/// A presheaf of finite sets on the opens of a finite space.
#[pyclass(name = "Presheaf", frozen)]
struct PyPresheaf {
    inner: Presheaf,
}

#[pymethods]
impl PyPresheaf {
    #[new]
    fn new(data: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(PyPresheaf {
            inner: parse::<PresheafJson>(data)?.to_model().map_err(err)?,
        })
    }

    fn is_sheaf(&self) -> bool {
        sheaf::is_sheaf(&self.inner)
    }

    fn descent(&self, atlas: &PyAtlas) -> PyResult<bool> {
        sheaf::descent_check(&self.inner, &atlas.inner).map_err(err)
    }

    fn hypercover_descent(&self, hypercover: &PyHypercover) -> PyResult<bool> {
        sheaf::hypercover_descent_check(&self.inner, &hypercover.inner).map_err(err)
    }

    fn sheafify(&self) -> PyResult<PyPresheaf> {
        Ok(PyPresheaf {
            inner: sheaf::sheafify(&self.inner).map_err(err)?.sheaf,
        })
    }

    fn is_local_wrt(&self, map: &PyPresheafMap) -> PyResult<bool> {
        sheaf::is_local_wrt(&self.inner, &map.inner).map_err(err)
    }

    fn sizes(&self) -> Vec<usize> {
        self.inner.sizes().to_vec()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        report(py, &PresheafJson::from_model(&self.inner))
    }
}

/// A natural transformation between presheaves on one space.
#[pyclass(name = "PresheafMap", frozen)]
struct PyPresheafMap {
    inner: PresheafMap,
}

#[pymethods]
impl PyPresheafMap {
    #[new]
    fn new(data: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(PyPresheafMap {
            inner: parse::<PresheafMapJson>(data)?.to_model().map_err(err)?,
        })
    }

    /// The colimit of the representables of an atlas, mapped to the
    /// representable of the open it covers.
    #[staticmethod]
    fn atlas_colimit(atlas: &PyAtlas) -> PyResult<Self> {
        Ok(PyPresheafMap {
            inner: sheaf::atlas_colimit(&atlas.inner).map_err(err)?,
        })
    }

    fn is_local_isomorphism(&self) -> PyResult<bool> {
        sheaf::is_local_isomorphism(&self.inner).map_err(err)
    }

    fn is_isomorphism(&self) -> bool {
        self.inner.is_isomorphism()
    }
}

/// A cospan `ℚ^a -> ℚ^c <- ℚ^b` of polynomial maps.
#[pyclass(name = "Cospan", frozen)]
struct PyCospan {
    inner: CospanPresentation,
}

impl PyCospan {
    fn point(&self, x: Option<Vec<String>>, y: Option<Vec<String>>) -> PyResult<RationalPoint> {
        match (x, y) {
            (None, None) => RationalPoint::origin(&self.inner).map_err(err),
            (x, y) => PointJson {
                x: x.unwrap_or_default(),
                y: y.unwrap_or_default(),
            }
            .to_model(&self.inner)
            .map_err(err),
        }
    }
}

#[pymethods]
impl PyCospan {
    #[new]
    fn new(data: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(PyCospan {
            inner: parse::<CospanJson>(data)?.to_model().map_err(err)?,
        })
    }

    #[getter]
    fn dims(&self) -> (usize, usize, usize) {
        (self.inner.a(), self.inner.b(), self.inner.c())
    }

    fn vdim(&self) -> i64 {
        qs::virtual_dimension(&self.inner)
    }

    /// Points are lists of rationals written `"p/q"`; both default to the origin.
    #[pyo3(signature = (x = None, y = None))]
    fn is_transverse(&self, x: Option<Vec<String>>, y: Option<Vec<String>>) -> PyResult<bool> {
        qs::is_transverse(&self.inner, &self.point(x, y)?).map_err(err)
    }

    /// Homology of the tangent complex as `{degree: dim}`.
    #[pyo3(signature = (x = None, y = None))]
    fn tangent_homology(&self, x: Option<Vec<String>>, y: Option<Vec<String>>) -> PyResult<Vec<(i32, usize)>> {
        Ok(qs::tangent_complex(&self.inner, &self.point(x, y)?).map_err(err)?.homology())
    }

    #[pyo3(signature = (x = None, y = None, jet = 2, levels = 3, target = 1))]
    fn betti(
        &self,
        x: Option<Vec<String>>,
        y: Option<Vec<String>>,
        jet: u32,
        levels: usize,
        target: usize,
    ) -> PyResult<Vec<usize>> {
        qs::mapping_space_betti(&self.inner, &self.point(x, y)?, jet, levels, target).map_err(err)
    }

    #[pyo3(signature = (x = None, y = None, jet = 2, levels = 3, target = 1))]
    fn nerve_betti(
        &self,
        x: Option<Vec<String>>,
        y: Option<Vec<String>>,
        jet: u32,
        levels: usize,
        target: usize,
    ) -> PyResult<Vec<usize>> {
        qs::nerve_cosimplicial_betti(&self.inner, &self.point(x, y)?, jet, levels, target).map_err(err)
    }

    fn product(&self, other: &PyCospan) -> PyCospan {
        PyCospan {
            inner: qs::product(&self.inner, &other.inner),
        }
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        report(py, &CospanJson::from_model(&self.inner))
    }
}

#[pyfunction]
fn koszul_betti(codim: usize) -> Vec<usize> {
    qs::koszul_betti(codim)
}

#[pyfunction]
#[pyo3(signature = (bound = "1"))]
fn pl_check<'py>(py: Python<'py>, bound: &str) -> PyResult<Bound<'py, PyAny>> {
    let b = qs::linalg::parse_rational(bound).ok_or_else(|| DmanError::new_err(format!("`{bound}` is not a rational")))?;
    report(py, &qs::pl_retraction_check(&b))
}

#[pyfunction]
#[pyo3(signature = (suite, points = 3, poset = 3, corpus = 50, seed = 7, trunc = 3, jet = 2, levels = 3))]
#[allow(clippy::too_many_arguments)]
fn run_sweep<'py>(
    py: Python<'py>,
    suite: &str,
    points: usize,
    poset: usize,
    corpus: usize,
    seed: u64,
    trunc: usize,
    jet: u32,
    levels: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let bounds = SweepBounds {
        points,
        poset,
        trunc,
        jet,
        levels,
        corpus,
        seed,
    };
    let r = py.detach(|| sweep::run(suite, &bounds)).map_err(err)?;
    report(py, &r)
}

#[pymodule]
fn dman(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DmanError", m.py().get_type::<DmanError>())?;
    m.add_class::<PyAtlas>()?;
    m.add_class::<PyHypercover>()?;
    m.add_class::<PyPresheaf>()?;
    m.add_class::<PyPresheafMap>()?;
    m.add_class::<PyCospan>()?;
    m.add_function(wrap_pyfunction!(koszul_betti, m)?)?;
    m.add_function(wrap_pyfunction!(pl_check, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add("SUITES", sweep::SUITES.to_vec())?;
    Ok(())
}
