//! Python bindings. Point sets travel as lists of rows.

use fsasc::filtration::{filtration_row as row_impl, FiltrationConfig, FsascParams, DEFAULT_GAMMAS, DEFAULT_MU};
use fsasc::pipeline::{cluster, Method};
use fsasc::{FsascError, HomoPoly, PointCloud};
use nalgebra::DMatrix;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: FsascError) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn cloud(points: Vec<Vec<f64>>) -> PyResult<PointCloud> {
    PointCloud::from_rows(&points).map_err(py_err)
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("matrix rows differ in length"));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

/// Homogeneous polynomial in the lexicographic monomial basis.
#[pyclass(name = "Polynomial", module = "pyfsasc", frozen)]
struct PyPolynomial {
    inner: HomoPoly,
}

#[pymethods]
impl PyPolynomial {
    #[new]
    fn new(dim: usize, degree: usize, coeffs: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: HomoPoly::from_coeffs(dim, degree, coeffs).map_err(py_err)?,
        })
    }

    /// Fits the degree-`degree` polynomial that best vanishes on `points`.
    #[staticmethod]
    fn fit(points: Vec<Vec<f64>>, degree: usize) -> PyResult<Self> {
        let x = cloud(points)?;
        let e = fsasc::embed_data(&x, degree).map_err(py_err)?;
        Ok(Self {
            inner: fsasc::fit_vanishing(&e).map_err(py_err)?,
        })
    }

    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.inner.coeffs().to_vec()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    fn eval(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.eval(&x).map_err(py_err)
    }

    fn grad(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.grad(&x).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Polynomial(dim={}, degree={}, terms={})",
            self.inner.ambient_dim(),
            self.inner.degree(),
            self.inner.coeffs().len()
        )
    }
}

#[pyclass(name = "ClusterResult", module = "pyfsasc", frozen, get_all)]
struct PyClusterResult {
    labels: Vec<usize>,
    chosen_gamma: Option<f64>,
    eigengap: Option<f64>,
    depths: Option<Vec<usize>>,
    affinity: Option<Vec<Vec<f64>>>,
}

#[pymethods]
impl PyClusterResult {
    fn __repr__(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("None".to_string(), |x| x.to_string());
        format!(
            "ClusterResult(points={}, chosen_gamma={}, eigengap={})",
            self.labels.len(),
            opt(self.chosen_gamma),
            opt(self.eigengap)
        )
    }
}

/// Clusters `points` into `n` groups with one of fsasc, sasc_d, sasc_a, fasc.
#[pyfunction]
#[pyo3(signature = (points, n, method = "fsasc", mu = DEFAULT_MU, gammas = None, seed = 0))]
fn cluster_points(
    points: Vec<Vec<f64>>,
    n: usize,
    method: &str,
    mu: usize,
    gammas: Option<Vec<f64>>,
    seed: u64,
) -> PyResult<PyClusterResult> {
    let x = cloud(points)?;
    let method: Method = method.parse().map_err(py_err)?;
    let params = FsascParams {
        n,
        mu,
        gammas: gammas.unwrap_or_else(|| DEFAULT_GAMMAS.to_vec()),
        seed,
    };
    let out = cluster(&x, method, &params).map_err(py_err)?;
    Ok(PyClusterResult {
        labels: out.labels,
        chosen_gamma: out.chosen_gamma,
        eigengap: out.eigengap,
        depths: out.depths,
        affinity: out.affinity.as_ref().map(to_rows),
    })
}

/// Exact clustering of noiseless data: list of (indices, dimension).
#[pyfunction]
fn fasc(points: Vec<Vec<f64>>, n: usize) -> PyResult<Vec<(Vec<usize>, usize)>> {
    let out = fsasc::fasc(&cloud(points)?, n).map_err(py_err)?;
    Ok(out.clusters.into_iter().map(|c| (c.indices, c.dim)).collect())
}

/// One filtration anchored at point `j`: (row, depth, termination).
#[pyfunction]
#[pyo3(signature = (points, j, n, delta, mu = DEFAULT_MU))]
fn filtration_row(
    points: Vec<Vec<f64>>,
    j: usize,
    n: usize,
    delta: f64,
    mu: usize,
) -> PyResult<(Vec<f64>, usize, String)> {
    let x = cloud(points)?.normalized().map_err(py_err)?;
    let p = fsasc::fit_vanishing(&fsasc::embed_data(&x, n).map_err(py_err)?).map_err(py_err)?;
    let r = row_impl(&x, j, &p, &FiltrationConfig { n, mu, delta }).map_err(py_err)?;
    let tag = serde_json::to_value(r.terminated_by)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((r.values, r.depth, tag.as_str().unwrap_or_default().to_string()))
}

/// Labelled union of random subspaces: (points, labels).
#[pyfunction]
#[pyo3(signature = (dims, ambient_dim = 5, points_per_subspace = 100, sigma = 0.0, seed = 0))]
fn sample_cloud(
    dims: Vec<usize>,
    ambient_dim: usize,
    points_per_subspace: usize,
    sigma: f64,
    seed: u64,
) -> PyResult<(Vec<Vec<f64>>, Vec<usize>)> {
    let c = fsasc::sample_cloud(&fsasc::SynthConfig {
        ambient_dim,
        dims,
        points_per_subspace,
        noise_sigma: sigma,
        seed,
    })
    .map_err(py_err)?;
    Ok((c.points.to_rows(), c.labels))
}

#[pyfunction]
fn monomial_count(dim: usize, degree: usize) -> PyResult<usize> {
    fsasc::monomial_count(dim, degree).map_err(py_err)
}

#[pyfunction]
fn veronese(x: Vec<f64>, degree: usize) -> PyResult<Vec<f64>> {
    let basis = fsasc::MonomialBasis::new(x.len(), degree).map_err(py_err)?;
    basis.embed(&x).map_err(py_err)
}

#[pyfunction]
fn clustering_error(pred: Vec<usize>, truth: Vec<usize>, n: usize) -> PyResult<f64> {
    fsasc::clustering_error(&pred, &truth, n).map_err(py_err)
}

#[pyfunction]
fn intra_connectivity(affinity: Vec<Vec<f64>>, truth: Vec<usize>) -> PyResult<f64> {
    fsasc::intra_connectivity(&from_rows(&affinity)?, &truth).map_err(py_err)
}

#[pyfunction]
fn inter_connectivity(affinity: Vec<Vec<f64>>, truth: Vec<usize>) -> PyResult<f64> {
    fsasc::inter_connectivity(&from_rows(&affinity)?, &truth).map_err(py_err)
}

/// Sorted normalized-Laplacian spectrum of an affinity matrix.
#[pyfunction]
fn laplacian_spectrum(affinity: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    fsasc::spectral::laplacian_eigenvalues(&from_rows(&affinity)?).map_err(py_err)
}

#[pymodule]
fn pyfsasc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPolynomial>()?;
    m.add_class::<PyClusterResult>()?;
    m.add_function(wrap_pyfunction!(cluster_points, m)?)?;
    m.add_function(wrap_pyfunction!(fasc, m)?)?;
    m.add_function(wrap_pyfunction!(filtration_row, m)?)?;
    m.add_function(wrap_pyfunction!(sample_cloud, m)?)?;
    m.add_function(wrap_pyfunction!(monomial_count, m)?)?;
    m.add_function(wrap_pyfunction!(veronese, m)?)?;
    m.add_function(wrap_pyfunction!(clustering_error, m)?)?;
    m.add_function(wrap_pyfunction!(intra_connectivity, m)?)?;
    m.add_function(wrap_pyfunction!(inter_connectivity, m)?)?;
    m.add_function(wrap_pyfunction!(laplacian_spectrum, m)?)?;
    Ok(())
}
