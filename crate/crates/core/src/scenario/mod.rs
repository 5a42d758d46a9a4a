//! Named link configurations and the sweeps that tabulate them.

mod file;
mod output;
mod tables;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atmosphere::AbsorptionTable;
use crate::constants::EARTH_RADIUS_M;
use crate::error::{argument, Result};
use crate::geometry::{symmetric_double_link, LinkGeometry, Orbit};
use crate::link_budget::{attenuation_db, db_to_probability, LinkKind, OpticalChain};
use crate::rates::{
    qkd_feasible, qkd_time_required, repeater_rate_bounds, teleportation_rate, time_for_events, ClassicalComms,
    HardwareParams, OrbitClass, QkdProtocol, SchemeKind,
};

pub use file::{parse_scenario, render_scenario};
pub use output::{sweep_to_csv, sweep_to_json, CSV_COLUMNS};
pub use tables::{
    dynamic_table, geo_teleport_headline, qkd_feasibility_grid, static_aperture_table, ApertureCaps, DynamicRow,
    HeadlineReport, Platform, QkdGridRow, SpsVariant, StaticCell, StaticTargets, DYNAMIC_MAX_ZENITH_RAD,
    HEADLINE_ALTITUDE_M, HEADLINE_SPS_VARIANTS, HEADLINE_WAVELENGTH_M,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Rows below this elevation are marked as impractical.
pub const SHADED_ELEVATION_RAD: f64 = 20.0 * std::f64::consts::PI / 180.0;

/// Events that make up one conclusive teleportation demonstration.
pub const DEMO_EVENTS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioMode {
    /// Satellite pair source feeding two symmetric links.
    Teleportation,
    /// One link carrying a QKD signal.
    Qkd,
}

impl ScenarioMode {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioMode::Teleportation => "teleportation",
            ScenarioMode::Qkd => "qkd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Elevation at the ground station(s), degrees in files and rows.
    Elevation,
    /// Surface distance, meters: between the two stations in teleportation
    /// mode, station to sub-satellite point in QKD mode.
    GroundDistance,
    /// End-to-end attenuation, dB.
    TotalDb,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Elevation => "elevation",
            SweepVariable::GroundDistance => "ground_distance",
            SweepVariable::TotalDb => "total_db",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "elevation" => Some(SweepVariable::Elevation),
            "ground_distance" => Some(SweepVariable::GroundDistance),
            "total_db" => Some(SweepVariable::TotalDb),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepSpec {
    /// Evenly spaced sweep values, ascending.
    pub fn values(&self) -> Vec<f64> {
        let (lo, hi) = if self.start <= self.stop { (self.start, self.stop) } else { (self.stop, self.start) };
        let n = self.steps;
        (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub mode: ScenarioMode,
    pub link_kind: LinkKind,
    pub orbit: Orbit,
    pub wavelength_m: f64,
    pub a_atm_vertical_db: f64,
    pub fried_r0_m: f64,
    /// Station separation used when the sweep carries no geometry.
    pub ground_distance_m: f64,
    pub optics: OpticalChain,
    pub hardware: HardwareParams,
    pub sweep: SweepSpec,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(argument("scenario name must not be empty"));
        }
        if self.sweep.steps < 2 {
            return Err(argument("sweep needs at least 2 steps"));
        }
        if !(self.sweep.start.is_finite() && self.sweep.stop.is_finite()) || self.sweep.start == self.sweep.stop {
            return Err(argument("sweep range must be a non-empty finite interval"));
        }
        if self.sweep.variable == SweepVariable::Elevation
            && !(self.sweep.start.abs() <= 90.0 && self.sweep.stop.abs() <= 90.0)
        {
            return Err(argument("elevation sweep must stay within [-90, 90] degrees"));
        }
        if !(self.wavelength_m > 0.0 && self.a_atm_vertical_db >= 0.0 && self.fried_r0_m > 0.0) {
            return Err(argument("wavelength and r0 must be positive, absorption >= 0 dB"));
        }
        if !(self.ground_distance_m >= 0.0) {
            return Err(argument("ground_distance_m must be >= 0"));
        }
        self.optics.validate()?;
        self.hardware.validate()
    }

    pub fn altitude_m(&self) -> f64 {
        self.orbit.peak_altitude_m()
    }

    pub fn absorption(&self) -> Result<AbsorptionTable> {
        AbsorptionTable::new(vec![(self.wavelength_m, self.a_atm_vertical_db)])
    }

    /// Window class used for QKD verdicts.
    pub fn orbit_class(&self) -> OrbitClass {
        match self.altitude_m() {
            h if h < 2.0e6 => OrbitClass::Leo,
            h if h < 3.5e7 => OrbitClass::Meo,
            _ => OrbitClass::Geo,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowFlags {
    pub infeasible_horizon: bool,
    pub low_elevation_shaded: bool,
    pub clamped: bool,
}

/// Rates per scheme, /s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeRates {
    pub memoryless: f64,
    pub one_memory_alice: f64,
    pub one_memory_bob: f64,
    pub two_memory: f64,
    pub two_link_repeater: f64,
}

impl SchemeRates {
    pub fn get(&self, scheme: SchemeKind) -> f64 {
        match scheme {
            SchemeKind::Memoryless => self.memoryless,
            SchemeKind::OneMemoryAlice => self.one_memory_alice,
            SchemeKind::OneMemoryBob => self.one_memory_bob,
            SchemeKind::TwoMemory => self.two_memory,
            SchemeKind::TwoLinkRepeater => self.two_link_repeater,
        }
    }

    fn map(&self, f: impl Fn(f64) -> Option<f64>) -> SchemeTimes {
        SchemeTimes {
            memoryless: f(self.memoryless),
            one_memory_alice: f(self.one_memory_alice),
            one_memory_bob: f(self.one_memory_bob),
            two_memory: f(self.two_memory),
            two_link_repeater: f(self.two_link_repeater),
        }
    }
}

/// Time to [`DEMO_EVENTS`] events per scheme, seconds; `None` when the rate is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeTimes {
    pub memoryless: Option<f64>,
    pub one_memory_alice: Option<f64>,
    pub one_memory_bob: Option<f64>,
    pub two_memory: Option<f64>,
    pub two_link_repeater: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QkdColumns {
    pub time_wcp_s: f64,
    pub time_eps_s: f64,
    pub window_s: f64,
    pub feasible_wcp: bool,
    pub feasible_eps: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// In the sweep variable's own unit.
    pub sweep_value: f64,
    pub elevation_rad: Option<f64>,
    pub ground_distance_m: f64,
    pub slant_range_m: Option<f64>,
    pub link_db: Option<f64>,
    pub total_db: Option<f64>,
    pub p_ave: Option<f64>,
    pub rates: Option<SchemeRates>,
    pub time_for_1000_events: Option<SchemeTimes>,
    pub qkd: Option<QkdColumns>,
    pub flags: RowFlags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub scenario_name: String,
    pub tool_version: String,
    pub parameters: Scenario,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    pub rows: Vec<SweepRow>,
}

/// Geometry of one sweep point, if the sweep variable carries any.
struct PointGeometry {
    link: Option<LinkGeometry>,
    ground_distance_m: f64,
}

fn point_geometry(scenario: &Scenario, value: f64) -> PointGeometry {
    let h = scenario.altitude_m();
    let double = scenario.mode == ScenarioMode::Teleportation;
    match scenario.sweep.variable {
        SweepVariable::Elevation => {
            let link = LinkGeometry::ground_link(h, value.to_radians());
            let alpha = link.ground_central_angle_rad.max(0.0);
            let spans = if double { 2.0 } else { 1.0 };
            PointGeometry { link: Some(link), ground_distance_m: spans * EARTH_RADIUS_M * alpha }
        }
        SweepVariable::GroundDistance => {
            let link = if double {
                symmetric_double_link(h, value).link
            } else {
                LinkGeometry::from_central_angle(h, value / EARTH_RADIUS_M)
            };
            PointGeometry { link: Some(link), ground_distance_m: value }
        }
        SweepVariable::TotalDb => PointGeometry { link: None, ground_distance_m: scenario.ground_distance_m },
    }
}

fn link_db(scenario: &Scenario, table: &AbsorptionTable, link: &LinkGeometry) -> Result<(f64, bool)> {
    let b =
        attenuation_db(scenario.link_kind, &scenario.optics, scenario.wavelength_m, link, scenario.fried_r0_m, table)?;
    Ok((b.total_db, b.clamped.any()))
}

fn evaluate_row(scenario: &Scenario, table: &AbsorptionTable, value: f64) -> Result<SweepRow> {
    let geom = point_geometry(scenario, value);
    let mut flags = RowFlags::default();
    if let Some(link) = &geom.link {
        flags.infeasible_horizon = link.elevation_rad < 0.0;
        flags.low_elevation_shaded = !flags.infeasible_horizon && link.elevation_rad < SHADED_ELEVATION_RAD;
    }
    let mut row = SweepRow {
        sweep_value: value,
        elevation_rad: geom.link.map(|l| l.elevation_rad),
        ground_distance_m: geom.ground_distance_m,
        slant_range_m: geom.link.map(|l| l.slant_range_m),
        link_db: None,
        total_db: None,
        p_ave: None,
        rates: None,
        time_for_1000_events: None,
        qkd: None,
        flags,
    };
    if flags.infeasible_horizon {
        return Ok(row);
    }

    let double = scenario.mode == ScenarioMode::Teleportation;
    let (per_link, total) = match &geom.link {
        Some(link) => {
            let (db, clamped) = link_db(scenario, table, link)?;
            row.flags.clamped = clamped;
            (db, if double { 2.0 * db } else { db })
        }
        None => (if double { value / 2.0 } else { value }, value),
    };
    row.link_db = Some(per_link);
    row.total_db = Some(total);
    let p_ave = db_to_probability(total);
    row.p_ave = Some(p_ave);

    let hw = &scenario.hardware;
    match scenario.mode {
        ScenarioMode::Teleportation => {
            let comms = ClassicalComms::new(geom.ground_distance_m)?;
            let rate = |s| teleportation_rate(s, hw, p_ave, &comms);
            // elementary links span half the separation
            let elementary_db = match scenario.sweep.variable {
                SweepVariable::TotalDb => total,
                _ => {
                    let half = symmetric_double_link(scenario.altitude_m(), geom.ground_distance_m / 2.0);
                    2.0 * link_db(scenario, table, &half.link)?.0
                }
            };
            let p_elementary = db_to_probability(elementary_db) * hw.eta_eps;
            let repeater = if p_elementary > 0.0 {
                repeater_rate_bounds(hw, p_elementary, &comms)?.teleportation_rate
            } else {
                0.0
            };
            let rates = SchemeRates {
                memoryless: rate(SchemeKind::Memoryless)?,
                one_memory_alice: rate(SchemeKind::OneMemoryAlice)?,
                one_memory_bob: rate(SchemeKind::OneMemoryBob)?,
                two_memory: rate(SchemeKind::TwoMemory)?,
                two_link_repeater: repeater,
            };
            row.time_for_1000_events = Some(rates.map(|r| time_for_events(r, DEMO_EVENTS).ok()));
            row.rates = Some(rates);
        }
        ScenarioMode::Qkd => {
            let class = scenario.orbit_class();
            let time_wcp_s = qkd_time_required(total, QkdProtocol::DecoyWcp, hw);
            let time_eps_s = qkd_time_required(total, QkdProtocol::EpsOrSps, hw);
            row.qkd = Some(QkdColumns {
                time_wcp_s,
                time_eps_s,
                window_s: class.window_s(),
                feasible_wcp: qkd_feasible(time_wcp_s, class),
                feasible_eps: qkd_feasible(time_eps_s, class),
            });
        }
    }
    Ok(row)
}

/// Evaluates every sweep point. Geometry below the horizon yields a
/// flagged row, never an error.
pub fn run_sweep(scenario: &Scenario) -> Result<SweepResult> {
    scenario.validate()?;
    let table = scenario.absorption()?;
    let rows = scenario
        .sweep
        .values()
        .into_par_iter()
        .map(|v| evaluate_row(scenario, &table, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        metadata: SweepMetadata {
            scenario_name: scenario.name.clone(),
            tool_version: TOOL_VERSION.to_string(),
            parameters: scenario.clone(),
        },
        rows,
    })
}

/// Zenith angle at an observer of radius `observer_m` looking at a target of
/// radius `target_m` separated by central angle `gamma`.
pub(crate) fn zenith_between(observer_m: f64, target_m: f64, gamma: f64) -> f64 {
    (target_m * gamma.sin()).atan2(target_m * gamma.cos() - observer_m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{defaults, Wavelength};
    use crate::geometry::CircularOrbit;
    use approx::assert_relative_eq;

    pub(crate) fn leo_teleport(variable: SweepVariable, start: f64, stop: f64, steps: usize) -> Scenario {
        let d = defaults(Wavelength::Nm785);
        Scenario {
            name: "leo-teleport".into(),
            mode: ScenarioMode::Teleportation,
            link_kind: LinkKind::Downlink,
            orbit: Orbit::Circular(CircularOrbit::new(6e5).unwrap()),
            wavelength_m: d.wavelength_m,
            a_atm_vertical_db: d.a_atm_vertical_db,
            fried_r0_m: d.fried_r0_m,
            ground_distance_m: 0.0,
            optics: OpticalChain::from_defaults(LinkKind::Downlink, &d, 0.4, 2.0).unwrap(),
            hardware: HardwareParams::from_defaults(&d, 0.01).unwrap(),
            sweep: SweepSpec { variable, start, stop, steps },
        }
    }

    #[test]
    fn sweep_values_sorted_and_inclusive() {
        let s = SweepSpec { variable: SweepVariable::Elevation, start: 90.0, stop: 0.0, steps: 91 };
        let v = s.values();
        assert_eq!(v.len(), 91);
        assert_eq!((v[0], v[90]), (0.0, 90.0));
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn leo_goes_infeasible_past_the_horizon() {
        let s = leo_teleport(SweepVariable::GroundDistance, 0.0, 6.0e6, 61);
        let r = run_sweep(&s).unwrap();
        let first_bad = r.rows.iter().find(|row| row.flags.infeasible_horizon).unwrap();
        assert!(first_bad.ground_distance_m > 5.3e6 && first_bad.ground_distance_m <= 5.4e6);
        assert!(first_bad.rates.is_none());
        assert!(r.rows.iter().any(|row| row.flags.low_elevation_shaded));
    }

    #[test]
    fn factor_identity_holds_every_row() {
        let s = leo_teleport(SweepVariable::Elevation, 20.0, 90.0, 15);
        let r = run_sweep(&s).unwrap();
        let hw = s.hardware;
        for row in &r.rows {
            let rates = row.rates.unwrap();
            let comms = ClassicalComms::new(row.ground_distance_m).unwrap();
            let ratio = rates.two_memory / rates.one_memory_bob;
            let expected = hw.eta_store * hw.eta_retrieve * hw.eta_qnd * hw.memory_decay(comms.dt0_s());
            assert_relative_eq!(ratio, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn eta_eps_presets_scale_linearly() {
        let low = leo_teleport(SweepVariable::Elevation, 30.0, 90.0, 7);
        let mut high = low.clone();
        high.hardware.eta_eps = 0.5;
        let (a, b) = (run_sweep(&low).unwrap(), run_sweep(&high).unwrap());
        for (x, y) in a.rows.iter().zip(&b.rows) {
            let (x, y) = (x.rates.unwrap(), y.rates.unwrap());
            for s in
                [SchemeKind::Memoryless, SchemeKind::OneMemoryAlice, SchemeKind::OneMemoryBob, SchemeKind::TwoMemory]
            {
                assert_relative_eq!(y.get(s) / x.get(s), 50.0, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn qkd_mode_single_link() {
        let mut s = leo_teleport(SweepVariable::TotalDb, 0.0, 60.0, 7);
        s.mode = ScenarioMode::Qkd;
        let r = run_sweep(&s).unwrap();
        assert_eq!(r.rows[0].qkd.unwrap().time_wcp_s, 1e-4);
        assert_eq!(r.rows[0].qkd.unwrap().window_s, 120.0);
        let verdicts: Vec<bool> = r.rows.iter().map(|row| row.qkd.unwrap().feasible_wcp).collect();
        assert!(verdicts.windows(2).all(|w| w[0] || !w[1]));
    }

    #[test]
    fn deterministic_output() {
        let s = leo_teleport(SweepVariable::Elevation, 0.0, 90.0, 91);
        assert_eq!(run_sweep(&s).unwrap(), run_sweep(&s).unwrap());
    }

    #[test]
    fn rejects_bad_sweeps() {
        let mut s = leo_teleport(SweepVariable::Elevation, 0.0, 90.0, 1);
        assert!(run_sweep(&s).is_err());
        s.sweep.steps = 3;
        s.sweep.stop = 0.0;
        assert!(run_sweep(&s).is_err());
    }
}
