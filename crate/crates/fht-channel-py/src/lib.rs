//! Python bindings for the first-hitting-time channel toolkit.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ::fht_channel as core;

fn err(e: core::FhtError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_mode(mode: &str) -> PyResult<core::PrefactorMode> {
    match mode {
        "instantaneous" => Ok(core::PrefactorMode::Instantaneous),
        "running_average" => Ok(core::PrefactorMode::RunningAverage),
        other => Err(PyValueError::new_err(format!(
            "mode must be 'instantaneous' or 'running_average', got '{other}'"
        ))),
    }
}

fn parse_distance(d: &str) -> PyResult<core::FluxDistance> {
    match d {
        "boundary" => Ok(core::FluxDistance::Boundary),
        "gap" => Ok(core::FluxDistance::Gap),
        other => Err(PyValueError::new_err(format!(
            "flux_distance must be 'boundary' or 'gap', got '{other}'"
        ))),
    }
}

#[pyclass(name = "ChannelParams", skip_from_py_object)]
#[derive(Clone)]
struct PyChannelParams {
    inner: core::ChannelParams,
}

#[pymethods]
impl PyChannelParams {
    #[new]
    fn new(x0: f64, ell: f64, sigma2: f64) -> PyResult<Self> {
        Ok(Self { inner: core::ChannelParams::new(x0, ell, sigma2).map_err(err)? })
    }

    #[getter]
    fn x0(&self) -> f64 {
        self.inner.x0
    }

    #[getter]
    fn ell(&self) -> f64 {
        self.inner.ell
    }

    #[getter]
    fn sigma2(&self) -> f64 {
        self.inner.sigma2
    }

    /// Propagation distance ell - x0.
    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda()
    }

    fn __repr__(&self) -> String {
        format!(
            "ChannelParams(x0={}, ell={}, sigma2={})",
            self.inner.x0, self.inner.ell, self.inner.sigma2
        )
    }
}

#[pyclass(name = "DriftProfile", skip_from_py_object)]
#[derive(Clone)]
struct PyDriftProfile {
    inner: core::DriftProfile,
}

#[pymethods]
impl PyDriftProfile {
    #[staticmethod]
    fn constant(v0: f64) -> PyResult<Self> {
        Ok(Self { inner: core::DriftProfile::constant(v0).map_err(err)? })
    }

    #[staticmethod]
    fn sinusoidal(v0: f64, amplitude: f64, omega: f64) -> PyResult<Self> {
        Ok(Self { inner: core::DriftProfile::sinusoidal(v0, amplitude, omega).map_err(err)? })
    }

    #[staticmethod]
    fn step(v0: f64, amplitude: f64, t_switch: f64) -> PyResult<Self> {
        Ok(Self { inner: core::DriftProfile::step(v0, amplitude, t_switch).map_err(err)? })
    }

    #[staticmethod]
    fn tabulated(v0: f64, table: Vec<(f64, f64)>) -> PyResult<Self> {
        Ok(Self { inner: core::DriftProfile::tabulated(v0, table).map_err(err)? })
    }

    #[getter]
    fn v0(&self) -> f64 {
        self.inner.v0()
    }

    fn mu(&self, t: f64) -> PyResult<f64> {
        self.inner.mu(t).map_err(err)
    }

    fn cumulative_displacement(&self, t: f64) -> PyResult<f64> {
        self.inner.cumulative_displacement(t).map_err(err)
    }

    fn running_average_drift(&self, t: f64) -> PyResult<f64> {
        self.inner.running_average_drift(t).map_err(err)
    }

    fn intrinsic_energy_integral(&self, t: f64) -> PyResult<f64> {
        self.inner.intrinsic_energy_integral(t).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("DriftProfile({:?})", self.inner)
    }
}

#[pyfunction]
fn std_normal_pdf(z: f64) -> f64 {
    core::std_normal_pdf(z)
}

#[pyfunction]
fn std_normal_cdf(z: f64) -> f64 {
    core::std_normal_cdf(z)
}

#[pyfunction]
fn expected_positive_flux(f_mean: f64, s: f64) -> PyResult<f64> {
    core::expected_positive_flux(f_mean, s).map_err(err)
}

#[pyfunction]
fn ig_density(params: &PyChannelParams, v0: f64, t: f64) -> PyResult<f64> {
    core::ig_density(&params.inner, v0, t).map_err(err)
}

#[pyfunction]
fn ig_cdf(params: &PyChannelParams, v0: f64, t: f64) -> PyResult<f64> {
    core::ig_cdf(&params.inner, v0, t).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (params, profile, t, mode = "instantaneous", flux_distance = "boundary"))]
fn mean_flux(
    params: &PyChannelParams,
    profile: &PyDriftProfile,
    t: f64,
    mode: &str,
    flux_distance: &str,
) -> PyResult<f64> {
    core::mean_flux(
        &params.inner,
        &profile.inner,
        t,
        parse_mode(mode)?,
        parse_distance(flux_distance)?,
    )
    .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (params, profile, t, mode = "instantaneous", flux_distance = "boundary"))]
fn cig_density(
    params: &PyChannelParams,
    profile: &PyDriftProfile,
    t: f64,
    mode: &str,
    flux_distance: &str,
) -> PyResult<f64> {
    core::cig_density(
        &params.inner,
        &profile.inner,
        t,
        parse_mode(mode)?,
        parse_distance(flux_distance)?,
    )
    .map_err(err)
}

/// Returns (grid, pdf, cdf) for the selected model ("cig" or "ig").
#[pyfunction]
#[pyo3(signature = (params, profile, t_max, n_points, model = "cig", mode = "instantaneous", flux_distance = "boundary"))]
#[allow(clippy::too_many_arguments)]
fn density_curve(
    params: &PyChannelParams,
    profile: &PyDriftProfile,
    t_max: f64,
    n_points: usize,
    model: &str,
    mode: &str,
    flux_distance: &str,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let model = match model {
        "cig" => core::DensityModel::CorrectedIg,
        "ig" => core::DensityModel::ClassicalIg,
        other => {
            return Err(PyValueError::new_err(format!(
                "model must be 'cig' or 'ig', got '{other}'"
            )))
        }
    };
    let curve = core::density_curve(
        &params.inner,
        &profile.inner,
        parse_mode(mode)?,
        parse_distance(flux_distance)?,
        model,
        t_max,
        n_points,
    )
    .map_err(err)?;
    Ok((curve.grid, curve.pdf, curve.cdf))
}

/// Runs the first-passage Monte Carlo; returns (hit_times, n_censored).
/// Hit times come back in trajectory-index order and the result is
/// bit-reproducible for a fixed seed.
#[pyfunction]
#[pyo3(signature = (params, profile, n_trajectories, dt, t_max, seed = 42))]
fn simulate(
    params: &PyChannelParams,
    profile: &PyDriftProfile,
    n_trajectories: usize,
    dt: f64,
    t_max: f64,
    seed: u64,
) -> PyResult<(Vec<f64>, usize)> {
    let config = core::SimConfig {
        n_trajectories,
        dt,
        t_max,
        seed,
        params: params.inner,
        profile: profile.inner.clone(),
    };
    let arrivals = core::simulate(&config).map_err(err)?;
    Ok((arrivals.hit_times().collect(), arrivals.n_censored()))
}

#[pymodule]
fn fht_channel(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChannelParams>()?;
    m.add_class::<PyDriftProfile>()?;
    m.add_function(wrap_pyfunction!(std_normal_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(std_normal_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(expected_positive_flux, m)?)?;
    m.add_function(wrap_pyfunction!(ig_density, m)?)?;
    m.add_function(wrap_pyfunction!(ig_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(mean_flux, m)?)?;
    m.add_function(wrap_pyfunction!(cig_density, m)?)?;
    m.add_function(wrap_pyfunction!(density_curve, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
