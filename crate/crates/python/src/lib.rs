//! Python module `pycqm`: barrier transmission, constrained and
//! wave-packet scattering, the free top and algebra fixtures.

use cqm_core::algebra::{orbit_analysis, poisson_matrix as core_poisson, Density};
use cqm_core::barrier::{self, CurveMode, TransmissionFormula};
use cqm_core::constrained::{self, GaussianPacketFamily};
use cqm_core::fixtures;
use cqm_core::rotor::{self, IntrinsicMoments, Orientation, RotorState};
use cqm_core::schrodinger::{self, PacketRunOptions};
use nalgebra::{Matrix3, Vector3};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: cqm_core::Error) -> PyErr {
    use cqm_core::Error as E;
    match e {
        E::InvalidArgument(_) | E::Validation(_) | E::DimensionMismatch { .. } | E::Fixture(_) | E::Geometry(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

fn formula(name: &str) -> PyResult<TransmissionFormula> {
    match name {
        "square_root" => Ok(TransmissionFormula::SquareRoot),
        "linear" => Ok(TransmissionFormula::Linear),
        _ => Err(PyValueError::new_err(format!("unknown formula {name:?}; use 'square_root' or 'linear'"))),
    }
}

/// Square barrier of height `v0` on `[0, length]`.
#[pyclass(name = "Barrier", frozen)]
struct PyBarrier(barrier::BarrierPotential);

#[pymethods]
impl PyBarrier {
    #[new]
    #[pyo3(signature = (v0 = 1.0, length = 8.0))]
    fn new(v0: f64, length: f64) -> PyResult<Self> {
        barrier::BarrierPotential::new(v0, length).map(Self).map_err(to_py)
    }

    #[getter]
    fn v0(&self) -> f64 {
        self.0.v0
    }

    #[getter]
    fn length(&self) -> f64 {
        self.0.length
    }

    fn potential(&self, x: f64) -> f64 {
        self.0.potential(x)
    }

    fn smeared_potential(&self, alpha: f64, xbar: f64) -> PyResult<f64> {
        self.0.smeared_potential(alpha, xbar).map_err(to_py)
    }

    fn t_ideal(&self, k: f64) -> f64 {
        self.0.t_ideal(k)
    }

    fn t_classical_avg(&self, alpha: f64, kbar: f64) -> PyResult<f64> {
        self.0.t_classical_avg(alpha, kbar).map_err(to_py)
    }

    #[pyo3(signature = (k, formula = "square_root"))]
    fn t_quantum(&self, k: f64, formula: &str) -> PyResult<f64> {
        Ok(self.0.t_quantum_with(k, self::formula(formula)?))
    }

    #[pyo3(signature = (alpha, kbar, formula = "square_root"))]
    fn t_quantum_avg(&self, alpha: f64, kbar: f64, formula: &str) -> PyResult<f64> {
        self.0.t_quantum_avg_with(alpha, kbar, self::formula(formula)?).map_err(to_py)
    }

    /// `mode` is one of icm, cm, qm, qm_avg, cqm; returns `[(k, T), ...]`.
    fn transmission_curve(&self, py: Python<'_>, mode: &str, alpha: f64, ks: Vec<f64>) -> PyResult<Vec<(f64, f64)>> {
        let b = self.0;
        let table = py.detach(move || match mode {
            "icm" => barrier::transmission_curve(CurveMode::Icm, alpha, &ks, &b),
            "cm" => barrier::transmission_curve(CurveMode::Cm, alpha, &ks, &b),
            "qm" => barrier::transmission_curve(CurveMode::Qm, alpha, &ks, &b),
            "qm_avg" => barrier::transmission_curve(CurveMode::QmAvg, alpha, &ks, &b),
            "cqm" => constrained::constrained_curve(alpha, &ks, &b),
            _ => Err(cqm_core::Error::InvalidArgument(format!("unknown mode {mode:?}"))),
        });
        Ok(table.map_err(to_py)?.points)
    }

    fn __repr__(&self) -> String {
        format!("Barrier(v0={}, length={})", self.0.v0, self.0.length)
    }
}

/// Constrained (Gaussian-family) transmission, 0 or 1.
#[pyfunction]
fn constrained_transmission(py: Python<'_>, barrier: &PyBarrier, alpha: f64, kbar: f64) -> PyResult<f64> {
    let b = barrier.0;
    py.detach(move || {
        let fam = GaussianPacketFamily::new(alpha, b)?;
        constrained::constrained_transmission(&fam, kbar)
    })
    .map_err(to_py)
}

/// Crank–Nicolson scattering of a minimal packet; returns a dict with
/// transmission, reflection, fidelity (to the Gaussian family after the
/// interaction), t_final and steps.
#[pyfunction]
#[pyo3(signature = (barrier, alpha, kbar, points_per_wavelength = 40.0, fidelity = false))]
fn scatter_packet<'py>(
    py: Python<'py>,
    barrier: &PyBarrier,
    alpha: f64,
    kbar: f64,
    points_per_wavelength: f64,
    fidelity: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let b = barrier.0;
    let opts = PacketRunOptions { points_per_wavelength, ..PacketRunOptions::default() };
    let (run, fid) = py
        .detach(move || {
            let run = schrodinger::scatter_packet(alpha, kbar, &b, &opts)?;
            let fid = fidelity.then(|| schrodinger::fidelity_to_family(&run.grid, &run.final_state, alpha).fidelity);
            Ok::<_, cqm_core::Error>((run, fid))
        })
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("transmission", run.transmission)?;
    d.set_item("reflection", run.reflection)?;
    d.set_item("t_final", run.t_final)?;
    d.set_item("steps", run.steps)?;
    d.set_item("fidelity", fid)?;
    Ok(d)
}

fn moments_of(m: [f64; 3]) -> PyResult<IntrinsicMoments> {
    IntrinsicMoments::new(m[0], m[1], m[2]).map_err(to_py)
}

/// Free top from orientation `r0` (3x3 rows, identity by default) and body
/// angular momentum `lbar0`; samples `n_samples` equally spaced times.
#[pyfunction]
#[pyo3(signature = (moments, lbar0, t_end, n_samples = 101, tol = 1e-12, r0 = None))]
fn evolve_rotor<'py>(
    py: Python<'py>,
    moments: [f64; 3],
    lbar0: [f64; 3],
    t_end: f64,
    n_samples: usize,
    tol: f64,
    r0: Option<[[f64; 3]; 3]>,
) -> PyResult<Bound<'py, PyDict>> {
    let m = moments_of(moments)?;
    let omega = match r0 {
        Some(rows) => Orientation::new(Matrix3::from_fn(|i, j| rows[i][j])).map_err(to_py)?,
        None => Orientation::identity(),
    };
    if n_samples < 2 {
        return Err(PyValueError::new_err("n_samples must be at least 2"));
    }
    let times: Vec<f64> = (0..n_samples).map(|i| t_end * i as f64 / (n_samples - 1) as f64).collect();
    let s0 = RotorState::new(omega, Vector3::from(lbar0));
    let traj = py.detach(move || rotor::evolve_rotor(&m, &s0, t_end, tol, &times)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("t", &traj.times)?;
    let lbar: Vec<[f64; 3]> = traj.states.iter().map(|s| [s.lbar[0], s.lbar[1], s.lbar[2]]).collect();
    d.set_item("lbar", lbar)?;
    d.set_item("energy", &traj.energies)?;
    d.set_item("lsq", &traj.lsq)?;
    d.set_item("max_orthogonality_defect", traj.max_orthogonality_defect())?;
    Ok(d)
}

#[pyfunction]
fn characteristic_period(moments: [f64; 3], lbar: [f64; 3]) -> PyResult<f64> {
    rotor::characteristic_period(&moments_of(moments)?, &Vector3::from(lbar)).map_err(to_py)
}

/// Orbit geometry of the rotor algebra at `(diag(moments), L = 0)`.
#[pyfunction]
fn orbit_geometry<'py>(py: Python<'py>, moments: [f64; 3]) -> PyResult<Bound<'py, PyDict>> {
    let r = rotor::orbit_geometry_report(&moments_of(moments)?).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("manifold_dim", r.manifold_dim)?;
    d.set_item("orbit_dim", r.orbit_dim)?;
    d.set_item("kernel", r.kernel)?;
    d.set_item("kernel_is_diagonal_inertia", r.kernel_is_diagonal_inertia)?;
    d.set_item("singular_values", r.singular_values)?;
    Ok(d)
}

/// Names of the algebra fixtures bundled with the library.
#[pyfunction]
fn fixture_names() -> Vec<&'static str> {
    fixtures::SHIPPED.iter().map(|(n, _)| *n).collect()
}

fn structure_constants(fixture: &str) -> PyResult<cqm_core::algebra::StructureConstants> {
    fixtures::shipped(fixture).and_then(|f| f.structure_constants()).map_err(to_py)
}

/// Lie–Poisson tensor `σ_ab(ρ)` of a bundled fixture, as nested lists.
#[pyfunction]
fn poisson_matrix(fixture: &str, density: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    let sc = structure_constants(fixture)?;
    let s = core_poisson(&sc, &Density::new(density)).map_err(to_py)?;
    Ok((0..s.nrows()).map(|i| s.row(i).iter().copied().collect()).collect())
}

/// Dimension of the coadjoint orbit through `density`.
#[pyfunction]
fn orbit_dim(fixture: &str, density: Vec<f64>) -> PyResult<usize> {
    let sc = structure_constants(fixture)?;
    Ok(orbit_analysis(&sc, &Density::new(density)).map_err(to_py)?.rank)
}

#[pymodule]
fn pycqm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBarrier>()?;
    m.add_function(wrap_pyfunction!(constrained_transmission, m)?)?;
    m.add_function(wrap_pyfunction!(scatter_packet, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_rotor, m)?)?;
    m.add_function(wrap_pyfunction!(characteristic_period, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_geometry, m)?)?;
    m.add_function(wrap_pyfunction!(fixture_names, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_dim, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_names() {
        assert_eq!(formula("square_root").unwrap(), TransmissionFormula::SquareRoot);
        assert_eq!(formula("linear").unwrap(), TransmissionFormula::Linear);
        assert!(formula("cubic").is_err());
    }
}
