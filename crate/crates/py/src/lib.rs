//! Python module `qlink`: link budgets, teleportation and repeater rates,
//! QKD feasibility, orbit geometry, scenario sweeps and the Monte Carlo
//! oracle. Structured reports come back as plain dicts and lists.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use qlink_core::atmosphere::{self, AbsorptionTable, HvProfile, DEFAULT_TURBULENCE_TOP_M};
use qlink_core::constants::{defaults as table_defaults, Wavelength};
use qlink_core::geometry::{self as geo, CircularOrbit, EllipticalOrbit, LinkGeometry};
use qlink_core::link_budget::{self as lb, LinkKind, OpticalChain};
use qlink_core::oracle::{self, TrialConfig};
use qlink_core::rates::{self, ClassicalComms, OrbitClass, QkdProtocol, SchemeKind};
use qlink_core::scenario as sc;

fn value_err(e: qlink_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn wavelength(nm: u32) -> PyResult<Wavelength> {
    Wavelength::from_nm(nm).ok_or_else(|| PyValueError::new_err(format!("wavelength must be 785 or 1550 nm, got {nm}")))
}

fn link_kind(s: &str) -> PyResult<LinkKind> {
    LinkKind::parse(s).ok_or_else(|| PyValueError::new_err(format!("unknown link kind `{s}`")))
}

fn scheme(s: &str) -> PyResult<SchemeKind> {
    SchemeKind::parse(s).ok_or_else(|| PyValueError::new_err(format!("unknown scheme `{s}`")))
}

fn protocol(s: &str) -> PyResult<QkdProtocol> {
    QkdProtocol::parse(s).ok_or_else(|| PyValueError::new_err(format!("unknown protocol `{s}`")))
}

fn orbit_class(s: &str) -> PyResult<OrbitClass> {
    OrbitClass::parse(s).ok_or_else(|| PyValueError::new_err(format!("unknown orbit class `{s}`")))
}

/// Serializes through JSON into Python builtins.
fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(module = "qlink", name = "HardwareParams", get_all, set_all, skip_from_py_object)]
#[derive(Clone, Copy)]
pub struct PyHardware {
    rep_rate_hz: f64,
    eta_eps: f64,
    eta_sps: f64,
    eta_det: f64,
    eta_store: f64,
    eta_retrieve: f64,
    eta_qnd: f64,
    t1_s: f64,
    multiplex_factor: u32,
}

impl From<rates::HardwareParams> for PyHardware {
    fn from(h: rates::HardwareParams) -> Self {
        Self {
            rep_rate_hz: h.rep_rate_hz,
            eta_eps: h.eta_eps,
            eta_sps: h.eta_sps,
            eta_det: h.eta_det,
            eta_store: h.eta_store,
            eta_retrieve: h.eta_retrieve,
            eta_qnd: h.eta_qnd,
            t1_s: h.t1_s,
            multiplex_factor: h.multiplex_factor,
        }
    }
}

impl PyHardware {
    fn core(&self) -> PyResult<rates::HardwareParams> {
        let h = rates::HardwareParams {
            rep_rate_hz: self.rep_rate_hz,
            eta_eps: self.eta_eps,
            eta_sps: self.eta_sps,
            eta_det: self.eta_det,
            eta_store: self.eta_store,
            eta_retrieve: self.eta_retrieve,
            eta_qnd: self.eta_qnd,
            t1_s: self.t1_s,
            multiplex_factor: self.multiplex_factor,
        };
        h.validate().map_err(value_err)?;
        Ok(h)
    }
}

#[pymethods]
impl PyHardware {
    /// Table hardware for the given pair-source efficiency.
    #[new]
    #[pyo3(signature = (eta_eps, wavelength_nm = 785))]
    fn new(eta_eps: f64, wavelength_nm: u32) -> PyResult<Self> {
        let params = table_defaults(wavelength(wavelength_nm)?);
        Ok(rates::HardwareParams::from_defaults(&params, eta_eps).map_err(value_err)?.into())
    }

    fn __repr__(&self) -> String {
        format!(
            "HardwareParams(rep_rate_hz={}, eta_eps={}, eta_sps={}, eta_det={}, eta_store={}, eta_retrieve={}, \
             eta_qnd={}, t1_s={}, multiplex_factor={})",
            self.rep_rate_hz,
            self.eta_eps,
            self.eta_sps,
            self.eta_det,
            self.eta_store,
            self.eta_retrieve,
            self.eta_qnd,
            self.t1_s,
            self.multiplex_factor
        )
    }
}

#[pyclass(module = "qlink", name = "LinkBudget", frozen, get_all)]
pub struct PyLinkBudget {
    geometric_db: f64,
    optics_db: f64,
    atmosphere_db: f64,
    additional_db: f64,
    total_db: f64,
    far_field_ok: bool,
    clamped: bool,
}

#[pymethods]
impl PyLinkBudget {
    /// Transmission probability of the link.
    #[getter]
    fn probability(&self) -> f64 {
        lb::db_to_probability(self.total_db)
    }

    fn __repr__(&self) -> String {
        format!(
            "LinkBudget(total_db={}, geometric_db={}, optics_db={}, atmosphere_db={}, additional_db={})",
            self.total_db, self.geometric_db, self.optics_db, self.atmosphere_db, self.additional_db
        )
    }
}

#[pyclass(module = "qlink", name = "RepeaterRate", frozen, get_all)]
pub struct PyRepeaterRate {
    n_min: f64,
    n_max: f64,
    swap_probability: f64,
    time_lower_s: f64,
    time_upper_s: f64,
    rate_lower: f64,
    rate_upper: f64,
    rate_mid: f64,
    teleportation_rate: f64,
}

impl From<rates::RepeaterRate> for PyRepeaterRate {
    fn from(r: rates::RepeaterRate) -> Self {
        Self {
            n_min: r.n_min,
            n_max: r.n_max,
            swap_probability: r.swap_probability,
            time_lower_s: r.time_lower_s,
            time_upper_s: r.time_upper_s,
            rate_lower: r.rate_lower,
            rate_upper: r.rate_upper,
            rate_mid: r.rate_mid,
            teleportation_rate: r.teleportation_rate,
        }
    }
}

#[pymethods]
impl PyRepeaterRate {
    fn __repr__(&self) -> String {
        format!(
            "RepeaterRate(time_lower_s={}, time_upper_s={}, teleportation_rate={})",
            self.time_lower_s, self.time_upper_s, self.teleportation_rate
        )
    }
}

/// Default parameter table as a dict.
#[pyfunction]
#[pyo3(signature = (wavelength_nm = 785))]
fn defaults(py: Python<'_>, wavelength_nm: u32) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &table_defaults(wavelength(wavelength_nm)?))
}

/// Attenuation of one link. Give either `range_m` (straight path) or
/// `altitude_m` with `elevation_deg`. Optics and losses come from the
/// table for `wavelength_nm`; `a_atm_vertical_db` and `r0_m` override it.
#[pyfunction]
#[pyo3(signature = (kind, tx_aperture_m, rx_aperture_m, *, range_m = None, altitude_m = None, elevation_deg = 90.0,
    wavelength_nm = 785, a_atm_vertical_db = None, r0_m = None))]
#[allow(clippy::too_many_arguments)]
fn attenuation_db(
    kind: &str,
    tx_aperture_m: f64,
    rx_aperture_m: f64,
    range_m: Option<f64>,
    altitude_m: Option<f64>,
    elevation_deg: f64,
    wavelength_nm: u32,
    a_atm_vertical_db: Option<f64>,
    r0_m: Option<f64>,
) -> PyResult<PyLinkBudget> {
    let kind = link_kind(kind)?;
    let params = table_defaults(wavelength(wavelength_nm)?);
    let geometry = match (range_m, altitude_m) {
        (Some(r), None) => LinkGeometry::zenith(r),
        (None, Some(h)) => LinkGeometry::ground_link(h, elevation_deg.to_radians()),
        _ => return Err(PyValueError::new_err("give exactly one of range_m and altitude_m")),
    };
    let chain = OpticalChain::from_defaults(kind, &params, tx_aperture_m, rx_aperture_m).map_err(value_err)?;
    let table = AbsorptionTable::default()
        .with_entry(params.wavelength_m, a_atm_vertical_db.unwrap_or(params.a_atm_vertical_db))
        .map_err(value_err)?;
    let b = lb::attenuation_db(kind, &chain, params.wavelength_m, &geometry, r0_m.unwrap_or(params.fried_r0_m), &table)
        .map_err(value_err)?;
    Ok(PyLinkBudget {
        geometric_db: b.geometric_db,
        optics_db: b.optics_db,
        atmosphere_db: b.atmosphere_db,
        additional_db: b.additional_db,
        total_db: b.total_db,
        far_field_ok: b.far_field_ok,
        clamped: b.clamped.any(),
    })
}

#[pyfunction]
fn db_to_probability(db: f64) -> f64 {
    lb::db_to_probability(db)
}

/// Teleportation rate per second for a memoryless or memory scheme.
#[pyfunction]
#[pyo3(signature = (scheme_name, hw, p_ave, ground_distance_m = 0.0))]
fn teleportation_rate(scheme_name: &str, hw: &PyHardware, p_ave: f64, ground_distance_m: f64) -> PyResult<f64> {
    let comms = ClassicalComms::new(ground_distance_m).map_err(value_err)?;
    rates::teleportation_rate(scheme(scheme_name)?, &hw.core()?, p_ave, &comms).map_err(value_err)
}

/// Two-link repeater timing band for elementary-link probability `p`.
#[pyfunction]
#[pyo3(signature = (hw, p, ground_distance_m = 0.0))]
fn repeater_rate_bounds(hw: &PyHardware, p: f64, ground_distance_m: f64) -> PyResult<PyRepeaterRate> {
    let comms = ClassicalComms::new(ground_distance_m).map_err(value_err)?;
    Ok(rates::repeater_rate_bounds(&hw.core()?, p, &comms).map_err(value_err)?.into())
}

#[pyfunction]
fn time_for_events(rate_per_s: f64, n_events: u64) -> PyResult<f64> {
    rates::time_for_events(rate_per_s, n_events).map_err(value_err)
}

#[pyfunction]
fn ndif_pmf(p: f64, n: u64) -> f64 {
    rates::ndif_pmf(p, n)
}

#[pyfunction]
fn decay_expectation(p: f64, t0_s: f64, t1_s: f64) -> PyResult<f64> {
    rates::decay_expectation(p, t0_s, t1_s).map_err(value_err)
}

#[pyfunction]
fn expected_n_min(p: f64) -> f64 {
    rates::expected_n_min(p)
}

#[pyfunction]
fn expected_n_max(p: f64) -> f64 {
    rates::expected_n_max(p)
}

/// Seconds needed to collect the protocol's detections through `total_db`.
#[pyfunction]
#[pyo3(signature = (total_db, protocol_name, rep_rate_hz = 1e9, multiplex_factor = 1))]
fn qkd_time_required(total_db: f64, protocol_name: &str, rep_rate_hz: f64, multiplex_factor: u32) -> PyResult<f64> {
    let mut hw = rates::HardwareParams::from_defaults(&table_defaults(Wavelength::Nm785), 1.0).map_err(value_err)?;
    hw.rep_rate_hz = rep_rate_hz;
    hw.multiplex_factor = multiplex_factor;
    hw.validate().map_err(value_err)?;
    Ok(rates::qkd_time_required(total_db, protocol(protocol_name)?, &hw))
}

#[pyfunction]
fn qkd_feasible(required_s: f64, orbit: &str) -> PyResult<bool> {
    Ok(rates::qkd_feasible(required_s, orbit_class(orbit)?))
}

#[pyfunction]
fn slant_range(altitude_m: f64, elevation_rad: f64) -> f64 {
    geo::slant_range(altitude_m, elevation_rad)
}

#[pyfunction]
fn double_link_horizon_distance(altitude_m: f64) -> f64 {
    geo::double_link_horizon_distance(altitude_m)
}

#[pyfunction]
fn min_altitude_for_double_link(ground_distance_m: f64, min_elevation_rad: f64) -> PyResult<f64> {
    geo::min_altitude_for_double_link(ground_distance_m, min_elevation_rad).map_err(value_err)
}

#[pyfunction]
fn circular_period_s(altitude_m: f64) -> PyResult<f64> {
    Ok(CircularOrbit::new(altitude_m).map_err(value_err)?.period_s())
}

/// Pass time of a circular orbit over a sea-level station within `max_zenith_rad`.
#[pyfunction]
fn pass_duration(altitude_m: f64, max_zenith_rad: f64) -> PyResult<f64> {
    let orbit = CircularOrbit::new(altitude_m).map_err(value_err)?;
    geo::pass_duration_circular(&orbit, max_zenith_rad).map_err(value_err)
}

#[pyfunction]
fn elliptical_period_s(perigee_alt_m: f64, apogee_alt_m: f64) -> PyResult<f64> {
    Ok(EllipticalOrbit::new(perigee_alt_m, apogee_alt_m).map_err(value_err)?.period_s())
}

#[pyfunction]
fn time_from_perigee(perigee_alt_m: f64, apogee_alt_m: f64, true_anomaly_rad: f64) -> PyResult<f64> {
    let orbit = EllipticalOrbit::new(perigee_alt_m, apogee_alt_m).map_err(value_err)?;
    geo::time_from_perigee(&orbit, true_anomaly_rad).map_err(value_err)
}

/// Time per orbit the apogee region stays within `max_zenith_rad` of a
/// station under the apogee.
#[pyfunction]
fn heo_dwell(perigee_alt_m: f64, apogee_alt_m: f64, max_zenith_rad: f64) -> PyResult<f64> {
    let orbit = EllipticalOrbit::new(perigee_alt_m, apogee_alt_m).map_err(value_err)?;
    geo::heo_dwell_above_station(&orbit, max_zenith_rad).map_err(value_err)
}

/// Fried parameter over the Hufnagel-Valley profile, station at sea level.
#[pyfunction]
#[pyo3(signature = (wavelength_m, zenith_rad, wind_rms_ms = 21.0, ground_cn2 = 1.7e-14))]
fn fried_r0(wavelength_m: f64, zenith_rad: f64, wind_rms_ms: f64, ground_cn2: f64) -> PyResult<f64> {
    let profile = HvProfile::new(wind_rms_ms, ground_cn2).map_err(value_err)?;
    atmosphere::fried_r0(&profile, wavelength_m, zenith_rad, 0.0, DEFAULT_TURBULENCE_TOP_M).map_err(value_err)
}

#[pyfunction]
fn headline(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &sc::geo_teleport_headline().map_err(value_err)?)
}

/// Minimum-aperture table with default caps and targets.
#[pyfunction]
#[pyo3(signature = (wavelengths_nm = vec![785, 1550]))]
fn static_table(py: Python<'_>, wavelengths_nm: Vec<u32>) -> PyResult<Bound<'_, PyAny>> {
    let ws = wavelengths_nm.into_iter().map(wavelength).collect::<PyResult<Vec<_>>>()?;
    let cells = sc::static_aperture_table(
        &sc::Platform::ALL,
        &LinkKind::ALL,
        &ws,
        &sc::ApertureCaps::default(),
        &sc::StaticTargets::default(),
    )
    .map_err(value_err)?;
    to_py(py, &cells)
}

#[pyfunction]
#[pyo3(signature = (wavelength_nm = 785, ground_aperture_m = 1.0, max_zenith_rad = sc::DYNAMIC_MAX_ZENITH_RAD))]
fn dynamic_table(
    py: Python<'_>,
    wavelength_nm: u32,
    ground_aperture_m: f64,
    max_zenith_rad: f64,
) -> PyResult<Bound<'_, PyAny>> {
    let rows = sc::dynamic_table(wavelength(wavelength_nm)?, ground_aperture_m, max_zenith_rad).map_err(value_err)?;
    to_py(py, &rows)
}

/// Parses a scenario file's text and runs its sweep; `format` is "csv" or "json".
#[pyfunction]
#[pyo3(signature = (text, format = "csv"))]
fn run_scenario(py: Python<'_>, text: &str, format: &str) -> PyResult<String> {
    let scenario = sc::parse_scenario(text).map_err(value_err)?;
    let result = py.detach(|| sc::run_sweep(&scenario)).map_err(value_err)?;
    match format {
        "csv" => sc::sweep_to_csv(&result).map_err(value_err),
        "json" => sc::sweep_to_json(&result).map_err(value_err),
        other => Err(PyValueError::new_err(format!("format must be csv or json, got `{other}`"))),
    }
}

/// Simulated n_dif distribution and decay expectation.
#[pyfunction]
#[pyo3(signature = (p, t0_s, t1_s, trials = 1_000_000, seed = 42))]
fn simulate_ndif(py: Python<'_>, p: f64, t0_s: f64, t1_s: f64, trials: u64, seed: u64) -> PyResult<Bound<'_, PyAny>> {
    let cfg = TrialConfig::new(trials, seed, p, t0_s, t1_s).map_err(value_err)?;
    let sample = py.detach(|| oracle::simulate_ndif(&cfg)).map_err(value_err)?;
    to_py(py, &sample)
}

/// Simulated mean repeater distribution time; T₀ is `1/hw.rep_rate_hz`.
#[pyfunction]
#[pyo3(signature = (hw, p, trials = 1_000_000, seed = 42))]
fn simulate_repeater<'py>(
    py: Python<'py>,
    hw: &PyHardware,
    p: f64,
    trials: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let hw = hw.core()?;
    let cfg = TrialConfig::new(trials, seed, p, hw.attempt_period_s(), hw.t1_s).map_err(value_err)?;
    let sample = py.detach(|| oracle::simulate_two_link_repeater(&cfg, &hw)).map_err(value_err)?;
    to_py(py, &sample)
}

/// Every closed form against Monte Carlo, as a list of check dicts.
#[pyfunction]
#[pyo3(signature = (seed = 42, trials = 1_000_000, k_sigma = 3.0))]
fn validate(py: Python<'_>, seed: u64, trials: u64, k_sigma: f64) -> PyResult<Bound<'_, PyAny>> {
    let checks = py.detach(|| oracle::oracle_suite(seed, trials, k_sigma)).map_err(value_err)?;
    to_py(py, &checks)
}

#[pymodule]
pub fn qlink(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", sc::TOOL_VERSION)?;
    m.add_class::<PyHardware>()?;
    m.add_class::<PyLinkBudget>()?;
    m.add_class::<PyRepeaterRate>()?;
    m.add_function(wrap_pyfunction!(defaults, m)?)?;
    m.add_function(wrap_pyfunction!(attenuation_db, m)?)?;
    m.add_function(wrap_pyfunction!(db_to_probability, m)?)?;
    m.add_function(wrap_pyfunction!(teleportation_rate, m)?)?;
    m.add_function(wrap_pyfunction!(repeater_rate_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(time_for_events, m)?)?;
    m.add_function(wrap_pyfunction!(ndif_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(decay_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(expected_n_min, m)?)?;
    m.add_function(wrap_pyfunction!(expected_n_max, m)?)?;
    m.add_function(wrap_pyfunction!(qkd_time_required, m)?)?;
    m.add_function(wrap_pyfunction!(qkd_feasible, m)?)?;
    m.add_function(wrap_pyfunction!(slant_range, m)?)?;
    m.add_function(wrap_pyfunction!(double_link_horizon_distance, m)?)?;
    m.add_function(wrap_pyfunction!(min_altitude_for_double_link, m)?)?;
    m.add_function(wrap_pyfunction!(circular_period_s, m)?)?;
    m.add_function(wrap_pyfunction!(pass_duration, m)?)?;
    m.add_function(wrap_pyfunction!(elliptical_period_s, m)?)?;
    m.add_function(wrap_pyfunction!(time_from_perigee, m)?)?;
    m.add_function(wrap_pyfunction!(heo_dwell, m)?)?;
    m.add_function(wrap_pyfunction!(fried_r0, m)?)?;
    m.add_function(wrap_pyfunction!(headline, m)?)?;
    m.add_function(wrap_pyfunction!(static_table, m)?)?;
    m.add_function(wrap_pyfunction!(dynamic_table, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_ndif, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_repeater, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
