use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use paf_core::{
    autocorr, factorize, gcd, roots, BoundedPoly, CorrMatrixPoly, Error, ExtRoot, FactorizeOptions,
    SignalTuple,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidPolynomial(_)
        | Error::EmptyInput(_)
        | Error::DimensionMismatch(_)
        | Error::IncompatibleSpaces { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

type PyRoots = (Complex64, Vec<(Option<Complex64>, usize)>);
type PySolutions = Vec<(Vec<usize>, Vec<Vec<Complex64>>)>;

fn root_to_py(r: &ExtRoot) -> Option<Complex64> {
    r.finite()
}

/// Polynomial of bounded degree; coefficients in ascending powers.
#[pyclass(name = "Poly", module = "paf", from_py_object)]
#[derive(Clone)]
struct PyPoly {
    inner: BoundedPoly,
}

#[pymethods]
impl PyPoly {
    #[new]
    fn new(coeffs: Vec<Complex64>) -> PyResult<Self> {
        Ok(Self {
            inner: BoundedPoly::new(coeffs).map_err(to_py)?,
        })
    }

    #[getter]
    fn coeffs(&self) -> Vec<Complex64> {
        self.inner.coeffs().to_vec()
    }

    #[getter]
    fn degree_bound(&self) -> usize {
        self.inner.degree_bound()
    }

    fn mul(&self, other: &PyPoly) -> PyPoly {
        PyPoly {
            inner: self.inner.mul(&other.inner),
        }
    }

    fn conj_reverse(&self) -> PyPoly {
        PyPoly {
            inner: self.inner.conj_reverse(),
        }
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        self.inner.eval(z)
    }

    fn inner_product(&self, other: &PyPoly) -> PyResult<Complex64> {
        self.inner.inner_product(&other.inner).map_err(to_py)
    }

    /// `(leading, [(root or None for infinity, multiplicity), ...])`.
    #[pyo3(signature = (tol_cluster = 1e-6))]
    fn roots(&self, tol_cluster: f64) -> PyResult<PyRoots> {
        let opts = roots::RootOptions {
            tol_cluster,
            ..roots::RootOptions::default()
        };
        let f = roots::find_roots(&self.inner, &opts).map_err(to_py)?;
        Ok((
            f.leading,
            f.roots.iter().map(|(r, m)| (root_to_py(r), *m)).collect(),
        ))
    }

    fn __len__(&self) -> usize {
        self.inner.coeffs().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Poly(degree_bound={}, coeffs={:?})",
            self.inner.degree_bound(),
            self.inner.coeffs()
        )
    }
}

/// K x K auto-correlation matrix polynomial.
#[pyclass(name = "CorrMatrix", module = "paf", from_py_object)]
#[derive(Clone)]
struct PyCorrMatrix {
    inner: CorrMatrixPoly,
}

fn signals_from(signals: Vec<Vec<Complex64>>) -> PyResult<SignalTuple> {
    SignalTuple::new(signals).map_err(to_py)
}

#[pymethods]
impl PyCorrMatrix {
    /// Builds the matrix from K x K nested lists of 2N-1 coefficients.
    #[new]
    fn new(entries: Vec<Vec<Vec<Complex64>>>) -> PyResult<Self> {
        let k = entries.len();
        if k == 0 || entries.iter().any(|row| row.len() != k) {
            return Err(PyValueError::new_err(
                "entries must be a non-empty K x K grid",
            ));
        }
        let len = entries[0][0].len();
        if len.is_multiple_of(2) {
            return Err(PyValueError::new_err("entries must have 2N-1 coefficients"));
        }
        let polys = entries
            .into_iter()
            .flatten()
            .map(BoundedPoly::new)
            .collect::<Result<Vec<_>, _>>()
            .map_err(to_py)?;
        Ok(Self {
            inner: CorrMatrixPoly::new(k, len.div_ceil(2), polys).map_err(to_py)?,
        })
    }

    /// Correlation matrix of K signals of common length N.
    #[staticmethod]
    fn from_signals(signals: Vec<Vec<Complex64>>) -> PyResult<Self> {
        Ok(Self {
            inner: autocorr::correlate(&signals_from(signals)?),
        })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn entries(&self) -> Vec<Vec<Vec<Complex64>>> {
        (0..self.inner.k())
            .map(|i| {
                (0..self.inner.k())
                    .map(|j| self.inner.entry(i, j).coeffs().to_vec())
                    .collect()
            })
            .collect()
    }

    #[pyo3(signature = (tol = 1e-8))]
    fn is_palindromic(&self, tol: f64) -> bool {
        autocorr::palindromic_check(&self.inner, tol)
    }

    fn residual(&self, signals: Vec<Vec<Complex64>>) -> PyResult<f64> {
        autocorr::residual(&self.inner, &signals_from(signals)?).map_err(to_py)
    }

    fn common_gcd(&self) -> PyResult<PyPoly> {
        Ok(PyPoly {
            inner: factorize::common_gcd(&self.inner, &FactorizeOptions::default())
                .map_err(to_py)?,
        })
    }

    fn is_unique(&self) -> PyResult<bool> {
        factorize::is_unique(&self.inner, &FactorizeOptions::default()).map_err(to_py)
    }

    fn count_solutions(&self) -> PyResult<u128> {
        factorize::count_solutions(&self.inner, &FactorizeOptions::default()).map_err(to_py)
    }

    /// Coprime-case recovery from row `j`.
    #[pyo3(signature = (j = 0))]
    fn coprime_recover(&self, j: usize) -> PyResult<Vec<Vec<Complex64>>> {
        let y = factorize::coprime_recover(&self.inner, j, &FactorizeOptions::default())
            .map_err(to_py)?;
        Ok(y.canonicalize().channels().to_vec())
    }

    /// Every factorization as `(index, signals)`, phase-canonical.
    fn enumerate(&self) -> PyResult<PySolutions> {
        let set =
            factorize::enumerate_all(&self.inner, &FactorizeOptions::default()).map_err(to_py)?;
        let sols = set.materialize().map_err(to_py)?;
        Ok(sols
            .into_iter()
            .map(|s| (s.index, s.signals.channels().to_vec()))
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("CorrMatrix(K={}, N={})", self.inner.k(), self.inner.n())
    }
}

#[pyfunction]
#[pyo3(signature = (polys, tol = 1e-6))]
fn gcd_many(polys: Vec<Vec<Complex64>>, tol: f64) -> PyResult<PyPoly> {
    let polys = polys
        .into_iter()
        .map(BoundedPoly::new)
        .collect::<Result<Vec<_>, _>>()
        .map_err(to_py)?;
    let opts = gcd::GcdOptions {
        tol_match: tol,
        ..gcd::GcdOptions::default()
    };
    Ok(PyPoly {
        inner: gcd::gcd_many(&polys, &opts).map_err(to_py)?.gcd,
    })
}

#[pyfunction]
#[pyo3(signature = (x1, x2, tol_rank = 1e-8))]
fn sylvester_coprime(x1: Vec<Complex64>, x2: Vec<Complex64>, tol_rank: f64) -> PyResult<bool> {
    let a = BoundedPoly::new(x1).map_err(to_py)?;
    let b = BoundedPoly::new(x2).map_err(to_py)?;
    gcd::sylvester_coprime(&a, &b, tol_rank).map_err(to_py)
}

#[pymodule]
fn paf(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPoly>()?;
    m.add_class::<PyCorrMatrix>()?;
    m.add_function(wrap_pyfunction!(gcd_many, m)?)?;
    m.add_function(wrap_pyfunction!(sylvester_coprime, m)?)?;
    Ok(())
}
