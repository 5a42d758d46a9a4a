//! Fixed tables: QKD feasibility grid, the GEO teleportation headline,
//! static aperture sizing and the dynamic pass table.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::atmosphere::AbsorptionTable;
use crate::constants::{defaults, Wavelength, EARTH_RADIUS_M};
use crate::error::{Error, Result};
use crate::geometry::{
    apogee_station_zenith, chord, heo_dwell_above_station, intersatellite_pass_duration, max_zenith_between_orbits,
    pass_duration_over_station, CircularOrbit, EllipticalOrbit, LinkGeometry, Orbit,
};
use crate::link_budget::{
    attenuation_db, double_link_probability, solve_min_aperture, ApertureProblem, FixedSide, LinkBudget, LinkKind,
    OpticalChain,
};
use crate::rates::{
    qkd_feasible, qkd_time_required, teleportation_rate, time_for_events, ClassicalComms, HardwareParams, OrbitClass,
    QkdProtocol, SchemeKind,
};

use super::{zenith_between, DEMO_EVENTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Platform {
    Ground,
    Hap,
    Leo,
    Meo,
    Geo,
    Heo,
}

impl Platform {
    pub const ALL: [Platform; 6] =
        [Platform::Ground, Platform::Hap, Platform::Leo, Platform::Meo, Platform::Geo, Platform::Heo];

    pub fn name(self) -> &'static str {
        match self {
            Platform::Ground => "ground",
            Platform::Hap => "hap",
            Platform::Leo => "leo",
            Platform::Meo => "meo",
            Platform::Geo => "geo",
            Platform::Heo => "heo",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s.to_ascii_lowercase())
    }

    /// Preset altitude; HEO reports its apogee.
    pub fn altitude_m(self) -> f64 {
        let d = defaults(Wavelength::Nm785);
        match self {
            Platform::Ground => 0.0,
            Platform::Hap => d.hap_altitude_m.0,
            Platform::Leo => d.leo_altitude_m,
            Platform::Meo => d.meo_altitude_m,
            Platform::Geo => d.geo_altitude_m,
            Platform::Heo => d.heo_altitude_m.1,
        }
    }

    /// Preset telescope diameter for the dynamic table; `None` for ground,
    /// whose aperture is a table argument.
    pub fn aperture_m(self) -> Option<f64> {
        match self {
            Platform::Ground => None,
            Platform::Hap => Some(0.15),
            Platform::Leo => Some(0.25),
            Platform::Meo | Platform::Geo | Platform::Heo => Some(0.5),
        }
    }

    pub fn orbit(self) -> Option<Orbit> {
        let d = defaults(Wavelength::Nm785);
        match self {
            Platform::Ground | Platform::Hap => None,
            Platform::Heo => Some(Orbit::Elliptical(EllipticalOrbit {
                perigee_alt_m: d.heo_altitude_m.0,
                apogee_alt_m: d.heo_altitude_m.1,
            })),
            p => Some(Orbit::Circular(CircularOrbit { altitude_m: p.altitude_m() })),
        }
    }

    fn radius_m(self) -> f64 {
        EARTH_RADIUS_M + self.altitude_m()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QkdGridRow {
    pub orbit: OrbitClass,
    pub protocol: QkdProtocol,
    pub total_db: f64,
    pub time_required_s: f64,
    pub window_s: f64,
    pub feasible: bool,
}

/// Every (orbit, protocol, dB) combination, in argument order.
pub fn qkd_feasibility_grid(
    orbits: &[OrbitClass],
    protocols: &[QkdProtocol],
    db_values: &[f64],
    hw: &HardwareParams,
) -> Vec<QkdGridRow> {
    let mut rows = Vec::with_capacity(orbits.len() * protocols.len() * db_values.len());
    for &orbit in orbits {
        for &protocol in protocols {
            for &total_db in db_values {
                let time_required_s = qkd_time_required(total_db, protocol, hw);
                rows.push(QkdGridRow {
                    orbit,
                    protocol,
                    total_db,
                    time_required_s,
                    window_s: orbit.window_s(),
                    feasible: qkd_feasible(time_required_s, orbit),
                });
            }
        }
    }
    rows
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpsVariant {
    pub eta_sps: f64,
    pub rate_per_s: f64,
    pub time_for_1000_events_s: f64,
    /// Rate over the SPDC-heralded baseline.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadlineReport {
    pub altitude_m: f64,
    pub wavelength_m: f64,
    pub optics: OpticalChain,
    pub hardware: HardwareParams,
    pub budget: LinkBudget,
    pub per_link_db: f64,
    pub total_db: f64,
    pub p_ave: f64,
    pub rate_per_s: f64,
    pub time_for_1000_events_s: f64,
    pub deterministic_sps: Vec<SpsVariant>,
}

pub const HEADLINE_ALTITUDE_M: f64 = 3.6e7;
pub const HEADLINE_WAVELENGTH_M: f64 = 810e-9;
/// Deterministic single-photon source efficiencies reported next to the
/// SPDC baseline: the table value and a conservative one.
pub const HEADLINE_SPS_VARIANTS: [f64; 2] = [0.75, 0.5];

/// GEO double downlink with an SPDC pair source and an SPDC-heralded
/// single-photon source, both at 5 %.
pub fn geo_teleport_headline() -> Result<HeadlineReport> {
    let d = defaults(Wavelength::Nm785);
    let optics = OpticalChain::new(0.5, 2.0, d.trans_tx, d.trans_rx, d.pointing_loss, d.optical_loss_db)?;
    let table = AbsorptionTable::new(vec![(HEADLINE_WAVELENGTH_M, 1.0)])?;
    let geometry = LinkGeometry::zenith(HEADLINE_ALTITUDE_M);
    let budget = attenuation_db(LinkKind::Downlink, &optics, HEADLINE_WAVELENGTH_M, &geometry, d.fried_r0_m, &table)?;
    let mut hardware = HardwareParams::from_defaults(&d, 0.05)?;
    hardware.eta_sps = 0.05;
    let p_ave = double_link_probability(budget.total_db);
    let comms = ClassicalComms::new(0.0)?;
    let rate_per_s = teleportation_rate(SchemeKind::Memoryless, &hardware, p_ave, &comms)?;
    let deterministic_sps = HEADLINE_SPS_VARIANTS
        .iter()
        .map(|&eta_sps| {
            let hw = HardwareParams { eta_sps, ..hardware };
            let rate = teleportation_rate(SchemeKind::Memoryless, &hw, p_ave, &comms)?;
            Ok(SpsVariant {
                eta_sps,
                rate_per_s: rate,
                time_for_1000_events_s: time_for_events(rate, DEMO_EVENTS)?,
                ratio: rate / rate_per_s,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HeadlineReport {
        altitude_m: HEADLINE_ALTITUDE_M,
        wavelength_m: HEADLINE_WAVELENGTH_M,
        optics,
        hardware,
        per_link_db: budget.total_db,
        total_db: 2.0 * budget.total_db,
        budget,
        p_ave,
        rate_per_s,
        time_for_1000_events_s: time_for_events(rate_per_s, DEMO_EVENTS)?,
        deterministic_sps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApertureCaps {
    pub space_m: f64,
    pub ground_m: f64,
    /// Smallest aperture the solver will report.
    pub min_m: f64,
}

impl Default for ApertureCaps {
    fn default() -> Self {
        Self { space_m: 0.25, ground_m: 2.0, min_m: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticTargets {
    pub uplink_db: f64,
    pub downlink_db: f64,
    pub intersatellite_db: f64,
}

impl Default for StaticTargets {
    fn default() -> Self {
        Self { uplink_db: 50.0, downlink_db: 40.0, intersatellite_db: 40.0 }
    }
}

impl StaticTargets {
    pub fn for_kind(&self, kind: LinkKind) -> f64 {
        match kind {
            LinkKind::Uplink => self.uplink_db,
            LinkKind::Downlink => self.downlink_db,
            LinkKind::Intersatellite => self.intersatellite_db,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticCell {
    pub kind: LinkKind,
    pub tx: Platform,
    pub rx: Platform,
    pub wavelength_nm: u32,
    pub range_m: f64,
    pub target_db: f64,
    pub fixed_side: FixedSide,
    pub fixed_aperture_m: f64,
    /// Solved free aperture; `None` when the cap cannot reach the target.
    pub min_aperture_m: Option<f64>,
    /// Loss with the free aperture at its cap.
    pub best_db: f64,
}

impl StaticCell {
    pub fn feasible(&self) -> bool {
        self.min_aperture_m.is_some()
    }
}

/// Minimum apertures with the far end straight overhead.
///
/// Ground links keep the ground telescope at its cap and size the space
/// side. Intersatellite cells pair every two distinct airborne platforms,
/// lower one transmitting at the space cap.
pub fn static_aperture_table(
    platforms: &[Platform],
    kinds: &[LinkKind],
    wavelengths: &[Wavelength],
    caps: &ApertureCaps,
    targets: &StaticTargets,
) -> Result<Vec<StaticCell>> {
    let airborne: Vec<Platform> = platforms.iter().copied().filter(|p| *p != Platform::Ground).collect();
    let mut cells = Vec::new();
    for &wl in wavelengths {
        let params = defaults(wl);
        let table = AbsorptionTable::default();
        for &kind in kinds {
            let pairs: Vec<(Platform, Platform)> = match kind {
                LinkKind::Uplink => airborne.iter().map(|&p| (Platform::Ground, p)).collect(),
                LinkKind::Downlink => airborne.iter().map(|&p| (p, Platform::Ground)).collect(),
                LinkKind::Intersatellite => {
                    let mut v = Vec::new();
                    for (i, &a) in airborne.iter().enumerate() {
                        for &b in &airborne[i + 1..] {
                            let (lo, hi) = if a.altitude_m() <= b.altitude_m() { (a, b) } else { (b, a) };
                            if lo.altitude_m() < hi.altitude_m() {
                                v.push((lo, hi));
                            }
                        }
                    }
                    v
                }
            };
            for (tx, rx) in pairs {
                let range_m = (tx.altitude_m() - rx.altitude_m()).abs();
                let (fixed_side, fixed_aperture_m) = match kind {
                    LinkKind::Uplink => (FixedSide::TxFixed, caps.ground_m),
                    LinkKind::Downlink => (FixedSide::RxFixed, caps.ground_m),
                    LinkKind::Intersatellite => (FixedSide::TxFixed, caps.space_m),
                };
                let target_db = targets.for_kind(kind);
                let problem = ApertureProblem {
                    kind,
                    chain: OpticalChain::from_defaults(kind, &params, caps.space_m, caps.space_m)?,
                    fixed_side,
                    fixed_aperture_m,
                    target_db,
                    wavelength_m: wl.meters(),
                    geometry: LinkGeometry::zenith(range_m),
                    r0_m: params.fried_r0_m,
                    absorption: &table,
                    bounds_m: (caps.min_m, caps.space_m),
                };
                let (min_aperture_m, best_db) = match solve_min_aperture(&problem) {
                    Ok(d) => {
                        let mut chain = problem.chain;
                        match fixed_side {
                            FixedSide::TxFixed => {
                                (chain.tx_aperture_m, chain.rx_aperture_m) = (fixed_aperture_m, caps.space_m)
                            }
                            FixedSide::RxFixed => {
                                (chain.rx_aperture_m, chain.tx_aperture_m) = (fixed_aperture_m, caps.space_m)
                            }
                        }
                        let best = attenuation_db(kind, &chain, wl.meters(), &problem.geometry, problem.r0_m, &table)?;
                        (Some(d), best.total_db)
                    }
                    Err(Error::Unachievable { best_db, .. }) => (None, best_db),
                    Err(e) => return Err(e),
                };
                cells.push(StaticCell {
                    kind,
                    tx,
                    rx,
                    wavelength_nm: wl.nm(),
                    range_m,
                    target_db,
                    fixed_side,
                    fixed_aperture_m,
                    min_aperture_m,
                    best_db,
                });
            }
        }
    }
    Ok(cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicRow {
    pub kind: LinkKind,
    pub tx: Platform,
    pub rx: Platform,
    pub wavelength_nm: u32,
    pub tx_aperture_m: f64,
    pub rx_aperture_m: f64,
    /// Zenith limit for station links, separation limit for intersatellite
    /// ones (the tangent bound when it is tighter).
    pub coverage_rad: f64,
    /// `None` for a stationary platform pair.
    pub duration_s: Option<f64>,
    pub zenith_db: f64,
    /// Loss at the edge of coverage.
    pub endpoint_db: f64,
    /// Mean of the loss in dB over the pass.
    pub mean_db: f64,
}

/// Samples per pass for the time average.
const PASS_SAMPLES: usize = 400;

/// Pass-averaged losses for every preset pairing at `max_zenith_rad`
/// (station links) or separation (intersatellite links).
///
/// Links touching a HAP other than to the ground carry no atmosphere and
/// are tabulated as intersatellite. An elliptical upper platform is held
/// at apogee.
pub fn dynamic_table(wavelength: Wavelength, ground_aperture_m: f64, max_zenith_rad: f64) -> Result<Vec<DynamicRow>> {
    if !(max_zenith_rad > 0.0 && max_zenith_rad < PI / 2.0) {
        return Err(crate::error::argument("max zenith must lie in (0, π/2)"));
    }
    let params = defaults(wavelength);
    let table = AbsorptionTable::default();
    let aperture = |p: Platform| p.aperture_m().unwrap_or(ground_aperture_m);
    let airborne = [Platform::Hap, Platform::Leo, Platform::Meo, Platform::Geo, Platform::Heo];

    let mut links: Vec<(LinkKind, Platform, Platform)> = Vec::new();
    for &p in &airborne {
        links.push((LinkKind::Uplink, Platform::Ground, p));
        links.push((LinkKind::Downlink, p, Platform::Ground));
    }
    for (i, &lo) in airborne.iter().enumerate() {
        for &hi in &airborne[i + 1..] {
            links.push((LinkKind::Intersatellite, hi, lo));
            links.push((LinkKind::Intersatellite, lo, hi));
        }
    }

    links
        .into_iter()
        .map(|(kind, tx, rx)| {
            let chain = OpticalChain::from_defaults(kind, &params, aperture(tx), aperture(rx))?;
            let budget = |g: &LinkGeometry| -> Result<f64> {
                Ok(attenuation_db(kind, &chain, wavelength.meters(), g, params.fried_r0_m, &table)?.total_db)
            };
            let (lower, upper) = if tx.altitude_m() < rx.altitude_m() { (tx, rx) } else { (rx, tx) };
            let pass = pass_profile(lower, upper, max_zenith_rad)?;
            let zenith_db = budget(&LinkGeometry::zenith(upper.altitude_m() - lower.altitude_m()))?;
            let (endpoint_db, mean_db) = match &pass {
                None => (zenith_db, zenith_db),
                Some(p) => {
                    let samples = p.points.iter().map(budget).collect::<Result<Vec<_>>>()?;
                    let total_w: f64 = p.weights.iter().sum();
                    let mean = samples.iter().zip(&p.weights).map(|(db, w)| db * w).sum::<f64>() / total_w;
                    (*samples.last().unwrap_or(&zenith_db), mean)
                }
            };
            Ok(DynamicRow {
                kind,
                tx,
                rx,
                wavelength_nm: wavelength.nm(),
                tx_aperture_m: chain.tx_aperture_m,
                rx_aperture_m: chain.rx_aperture_m,
                coverage_rad: pass.as_ref().map(|p| p.coverage_rad).unwrap_or(0.0),
                duration_s: pass.as_ref().map(|p| p.duration_s),
                zenith_db,
                endpoint_db,
                mean_db,
            })
        })
        .collect()
}

/// Half a pass, from closest approach to the edge of coverage, as geometry
/// samples with time weights.
struct PassProfile {
    coverage_rad: f64,
    duration_s: f64,
    points: Vec<LinkGeometry>,
    weights: Vec<f64>,
}

/// Trapezoid weights on `n + 1` uniform nodes.
fn trapezoid(n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == 0 || i == n { 0.5 } else { 1.0 }).collect()
}

fn geometry_at(observer_m: f64, target_m: f64, gamma: f64) -> LinkGeometry {
    let zenith = zenith_between(observer_m, target_m, gamma);
    let range = if gamma == 0.0 { target_m - observer_m } else { chord(observer_m, target_m, gamma) };
    LinkGeometry {
        slant_range_m: range,
        zenith_angle_rad: zenith,
        elevation_rad: PI / 2.0 - zenith,
        ground_central_angle_rad: gamma,
    }
}

fn pass_profile(lower: Platform, upper: Platform, max_zenith_rad: f64) -> Result<Option<PassProfile>> {
    let n = PASS_SAMPLES;
    let (r_lo, r_hi) = (lower.radius_m(), upper.radius_m());
    let uniform = |gamma_max: f64| -> Vec<LinkGeometry> {
        (0..=n).map(|i| geometry_at(r_lo, r_hi, gamma_max * i as f64 / n as f64)).collect()
    };
    let profile = match (lower.orbit(), upper.orbit()) {
        // both stationary
        (_, None) => None,
        // station under a circular orbit: central angle grows linearly in time
        (None, Some(Orbit::Circular(orbit))) => {
            let gamma_max = max_zenith_rad - (r_lo * max_zenith_rad.sin() / r_hi).asin();
            Some(PassProfile {
                coverage_rad: max_zenith_rad,
                duration_s: pass_duration_over_station(&orbit, lower.altitude_m(), max_zenith_rad)?,
                points: uniform(gamma_max),
                weights: trapezoid(n),
            })
        }
        // station under apogee: uniform in true anomaly, weighted by dt/dφ ∝ r²
        (None, Some(Orbit::Elliptical(orbit))) => {
            let (mut lo, mut hi) = (PI, 2.0 * PI);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if apogee_station_zenith(&orbit, mid) > max_zenith_rad {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let phis: Vec<f64> = (0..=n).map(|i| PI + (lo - PI) * i as f64 / n as f64).collect();
            let trap = trapezoid(n);
            Some(PassProfile {
                coverage_rad: max_zenith_rad,
                duration_s: heo_dwell_above_station(&orbit, max_zenith_rad)?,
                points: phis.iter().map(|&phi| geometry_at(r_lo, orbit.radius_at(phi), phi - PI)).collect(),
                weights: phis.iter().zip(trap).map(|(&phi, w)| w * orbit.radius_at(phi).powi(2)).collect(),
            })
        }
        (Some(Orbit::Circular(low)), Some(high)) => {
            let high_circ = CircularOrbit { altitude_m: upper.altitude_m() };
            let bound = max_zenith_rad.min(max_zenith_between_orbits(&low, &high_circ)?);
            let gamma_max = bound * (1.0 - 1e-12);
            let points = uniform(gamma_max);
            Some(PassProfile {
                coverage_rad: bound,
                duration_s: intersatellite_pass_duration(&low, &high, max_zenith_rad)?,
                points,
                weights: trapezoid(n),
            })
        }
        (Some(Orbit::Elliptical(_)), Some(_)) => {
            return Err(crate::error::argument("elliptical lower platform is not tabulated"))
        }
    };
    Ok(profile)
}

/// Default zenith / separation limit for the dynamic table.
pub const DYNAMIC_MAX_ZENITH_RAD: f64 = FRAC_PI_4;
