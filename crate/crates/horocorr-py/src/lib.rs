//! Python bindings for the horocorr geometry kernel.
//!
//! Exposed as the extension module `horocorr._native`; the pure-Python
//! package `horocorr` re-exports everything here. Scalar data crosses the
//! boundary as plain floats/lists; structured verdicts and reports cross as
//! the JSON-shaped dicts the CLI would print.

use pyo3::exceptions::{PyArithmeticError, PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;

use horocorr_core::acceptance;
use horocorr_core::catalog;
use horocorr_core::correspondence::{
    self, convexity_check, metric_to_hypersurface, with_principal_curvatures, HypersurfaceMesh,
};
use horocorr_core::embed::embeddedness_check;
use horocorr_core::flow::{flow_invariance_check, measure_curvatures, normal_flow};
use horocorr_core::mesh_io::{write_obj_file, MeshSidecar};
use horocorr_core::sphere::build_grid;
use horocorr_core::tolerances::{FLOW_SEARCH_MARGIN, MODEL_TOL};
use horocorr_core::Error as CoreError;

fn to_py_err(err: CoreError) -> PyErr {
    match err {
        CoreError::InvalidInput(_)
        | CoreError::DimensionMismatch(_, _)
        | CoreError::EmptyGrid(_)
        | CoreError::OutsideDomain(_) => PyValueError::new_err(err.to_string()),
        CoreError::MathDomain(_) | CoreError::DegenerateLambda { .. } => {
            PyArithmeticError::new_err(err.to_string())
        }
        CoreError::Io(_) => PyIOError::new_err(err.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Round-trip a `Serialize` value through JSON into native Python objects
/// (dicts, lists, numbers, strings) via the stdlib `json` module.
fn serialize_to_py<'py, T: serde::Serialize>(
    py: Python<'py>,
    value: &T,
) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Minkowski pairing `⟨u,v⟩ = −u₀v₀ + Σᵢ uᵢvᵢ` on raw coordinate slices.
fn mink(u: &[f64], v: &[f64]) -> f64 {
    let spatial: f64 = u[1..].iter().zip(&v[1..]).map(|(a, b)| a * b).sum();
    spatial - u[0] * v[0]
}

/// A hypersurface mesh in the hyperboloid model: positions `phi`, unit
/// normals `eta`, horosphere vectors `psi = phi − eta`, support function,
/// Gauss map, and (where measured) principal curvatures.
#[pyclass(frozen)]
struct Hypersurface {
    inner: HypersurfaceMesh,
}

#[pymethods]
impl Hypersurface {
    /// Total flow time baked into this mesh.
    #[getter]
    fn flow_time(&self) -> f64 {
        self.inner.flow_time
    }

    /// Human-readable construction label.
    #[getter]
    fn label(&self) -> String {
        self.inner.label.clone()
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    /// Sphere dimension n; the mesh lives in H^{n+1} ⊂ R^{1,n+1}.
    #[getter]
    fn sphere_dim(&self) -> usize {
        self.inner.grid.sphere_dim
    }

    /// Hyperboloid positions, one `[x0, …, x_{n+1}]` row per node.
    fn vertices(&self) -> Vec<Vec<f64>> {
        self.inner.phi.iter().map(|v| v.coords().to_vec()).collect()
    }

    /// Unit normals in R^{1,n+1}, aligned with `vertices()`.
    fn normals(&self) -> Vec<Vec<f64>> {
        self.inner.eta.iter().map(|v| v.coords().to_vec()).collect()
    }

    /// Gauss-map sphere points, one `[x1, …, x_{n+1}]` row per node.
    fn gauss_map(&self) -> Vec<Vec<f64>> {
        self.inner
            .gauss
            .iter()
            .map(|p| p.coords().to_vec())
            .collect()
    }

    /// Horospherical support value per node.
    fn support(&self) -> Vec<f64> {
        self.inner.support.clone()
    }

    /// Principal curvatures per node (`None` where the finite-difference
    /// stencil does not fit, e.g. on the grid rim).
    fn kappas(&self) -> Vec<Option<Vec<f64>>> {
        self.inner.kappas.clone()
    }

    /// Largest violation of the model identities `⟨φ,φ⟩ = −1`, `⟨η,η⟩ = 1`,
    /// `⟨φ,η⟩ = 0`, `⟨φ,ψ⟩ = −1` over all nodes.
    fn max_invariant_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for idx in 0..self.inner.node_count() {
            let phi = self.inner.phi[idx].coords();
            let eta = self.inner.eta[idx].coords();
            let psi = self.inner.psi[idx].coords();
            worst = worst
                .max((mink(phi, phi) + 1.0).abs())
                .max((mink(eta, eta) - 1.0).abs())
                .max(mink(phi, eta).abs())
                .max((mink(phi, psi) + 1.0).abs());
        }
        worst
    }

    /// Check every model identity within `tol`; raises on the first failure.
    #[pyo3(signature = (tol = MODEL_TOL))]
    fn validate(&self, tol: f64) -> PyResult<()> {
        self.inner.validate(tol).map_err(to_py_err)
    }

    /// Classify horospherical convexity from the measured curvatures.
    /// Returns e.g. `{"UniformlyWeaklyHC": {"kappa0": …}}`.
    fn convexity<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let verdict = convexity_check(&self.inner).map_err(to_py_err)?;
        serialize_to_py(py, &verdict)
    }

    /// Full self-intersection report for n = 2 meshes (dict with `verdict`,
    /// triangle and candidate-pair counts).
    fn embeddedness<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let verdict = embeddedness_check(&self.inner).map_err(to_py_err)?;
        serialize_to_py(py, &verdict)
    }

    /// True when the triangulated image has no self-intersections.
    fn is_embedded(&self) -> PyResult<bool> {
        let verdict = embeddedness_check(&self.inner).map_err(to_py_err)?;
        Ok(matches!(
            verdict.verdict,
            horocorr_core::embed::Embeddedness::Embedded
        ))
    }

    /// Flow every node a signed hyperbolic distance `dt` along its normal,
    /// re-measure curvatures, and compare against the Möbius evolution law.
    /// Returns `(flowed_mesh, invariance_report)`; the report's `violations`
    /// list is empty when Gauss map, edge scaling, and curvature evolution
    /// all hold within tolerance.
    fn flow<'py>(
        &self,
        py: Python<'py>,
        dt: f64,
    ) -> PyResult<(Hypersurface, Bound<'py, PyAny>)> {
        let mut result = normal_flow(&self.inner, dt).map_err(to_py_err)?;
        measure_curvatures(&mut result).map_err(to_py_err)?;
        let report = flow_invariance_check(&self.inner, &result);
        Ok((
            Hypersurface { inner: result.mesh },
            serialize_to_py(py, &report)?,
        ))
    }

    /// Write the mesh as Wavefront OBJ (n = 2 only; Y-up ball coordinates).
    fn write_obj(&self, path: std::path::PathBuf) -> PyResult<()> {
        write_obj_file(&self.inner, &path).map_err(to_py_err)
    }

    /// Per-node curvature/eigenvalue sidecar as a dict (the JSON the CLI
    /// writes next to an OBJ).
    fn sidecar<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        serialize_to_py(py, &MeshSidecar::from_mesh(&self.inner))
    }

    fn __repr__(&self) -> String {
        format!(
            "Hypersurface(label='{}', nodes={}, flow_time={})",
            self.inner.label,
            self.inner.node_count(),
            self.inner.flow_time
        )
    }
}

/// Build the hypersurface of a catalog metric at flow time `t`, with
/// principal curvatures measured wherever the finite-difference stencil fits.
///
/// `metric` is a catalog id (`"constant:<c>"`, `"flat-punctured"`,
/// `"cylindric"`); `resolution` defaults to 64 sites per axis; `margin` adds
/// extra distance to the domain boundary on top of the metric's own.
#[pyfunction]
#[pyo3(signature = (metric, t, resolution = None, n = 2, margin = 0.0))]
fn build(
    metric: &str,
    t: f64,
    resolution: Option<Vec<usize>>,
    n: usize,
    margin: f64,
) -> PyResult<Hypersurface> {
    let entry = catalog::lookup_at(metric, n).map_err(to_py_err)?;
    let resolution = resolution.unwrap_or_else(|| vec![64; n]);
    let grid = build_grid(entry.metric.domain(), &resolution, margin).map_err(to_py_err)?;
    let mesh = metric_to_hypersurface(&entry.metric, t, &grid).map_err(to_py_err)?;
    let mesh = with_principal_curvatures(&mesh).map_err(to_py_err)?;
    Ok(Hypersurface { inner: mesh })
}

/// Smallest admissible flow time for a catalog metric on a grid: below it,
/// some rescaled eigenvalue reaches the immersion threshold 1/2.
#[pyfunction]
#[pyo3(signature = (metric, resolution = None, n = 2, margin = None))]
fn min_flow_time(
    metric: &str,
    resolution: Option<Vec<usize>>,
    n: usize,
    margin: Option<f64>,
) -> PyResult<f64> {
    let entry = catalog::lookup_at(metric, n).map_err(to_py_err)?;
    let resolution = resolution.unwrap_or_else(|| vec![64; n]);
    let grid = build_grid(entry.metric.domain(), &resolution, 0.0).map_err(to_py_err)?;
    correspondence::min_flow_time(&entry.metric, &grid, margin.unwrap_or(FLOW_SEARCH_MARGIN))
        .map_err(to_py_err)
}

/// Evolve a principal curvature through flow time `t` by the Möbius law
/// `κ ↦ (κ + tanh t) / (1 + κ·tanh t)`.
#[pyfunction]
fn riccati(kappa: f64, t: f64) -> PyResult<f64> {
    horocorr_core::flow::riccati_curvature(kappa, t).map_err(to_py_err)
}

/// Dictionary direction λ = (the eigenvalue whose hypersurface curvature is κ).
#[pyfunction]
fn lambda_from_kappa(kappa: f64) -> PyResult<f64> {
    correspondence::lambda_from_kappa(kappa).map_err(to_py_err)
}

/// Dictionary direction κ = (the curvature whose conformal eigenvalue is λ).
#[pyfunction]
fn kappa_from_lambda(lambda: f64) -> PyResult<f64> {
    correspondence::kappa_from_lambda(lambda).map_err(to_py_err)
}

/// Cards for the built-in metrics: id, domain description, and the
/// machine-checkable expectations each one ships with.
#[pyfunction]
fn catalog_cards<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    let cards: Vec<_> = catalog::registry().iter().map(|e| e.card()).collect();
    serialize_to_py(py, &cards)
}

/// Run the numbered verification suite; `filter` selects criteria by index
/// or name substring (None runs all eleven). Returns one dict per criterion
/// with `index`, `name`, `passed`, `details`.
#[pyfunction]
#[pyo3(signature = (filter = None))]
fn verify<'py>(py: Python<'py>, filter: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let results = match filter {
        Some(f) => acceptance::run_filtered(f),
        None => acceptance::run_all(),
    };
    serialize_to_py(py, &results)
}

#[pymodule]
fn _native(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Hypersurface>()?;
    m.add_function(wrap_pyfunction!(build, m)?)?;
    m.add_function(wrap_pyfunction!(min_flow_time, m)?)?;
    m.add_function(wrap_pyfunction!(riccati, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_from_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(kappa_from_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_cards, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
