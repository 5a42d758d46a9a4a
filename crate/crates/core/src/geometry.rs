//! Spherical-Earth link geometry and orbital timing.
//!
//! Earth is a sphere of radius [`EARTH_RADIUS_M`], it does not rotate, and
//! every orbit lies in the plane that contains the ground station. Angles are
//! radians; lengths are meters; times are seconds.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::constants::{EARTH_MU_M3S2, EARTH_RADIUS_M};
use crate::error::{argument, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularOrbit {
    pub altitude_m: f64,
}

impl CircularOrbit {
    pub fn new(altitude_m: f64) -> Result<Self> {
        if !(altitude_m > 0.0 && altitude_m.is_finite()) {
            return Err(argument(format!("orbit altitude must be positive, got {altitude_m}")));
        }
        Ok(Self { altitude_m })
    }

    pub fn radius_m(&self) -> f64 {
        EARTH_RADIUS_M + self.altitude_m
    }

    pub fn velocity_ms(&self) -> f64 {
        orbital_velocity(self)
    }

    /// Angular rate about Earth's center, rad/s.
    pub fn angular_rate(&self) -> f64 {
        self.velocity_ms() / self.radius_m()
    }

    pub fn period_s(&self) -> f64 {
        TAU / self.angular_rate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticalOrbit {
    pub perigee_alt_m: f64,
    pub apogee_alt_m: f64,
}

impl EllipticalOrbit {
    pub fn new(perigee_alt_m: f64, apogee_alt_m: f64) -> Result<Self> {
        if !(perigee_alt_m > 0.0 && apogee_alt_m >= perigee_alt_m && apogee_alt_m.is_finite()) {
            return Err(argument(format!(
                "need apogee >= perigee > 0, got perigee {perigee_alt_m} m, apogee {apogee_alt_m} m"
            )));
        }
        Ok(Self { perigee_alt_m, apogee_alt_m })
    }

    /// Perigee 600 km, apogee 40,000 km.
    pub fn molniya() -> Self {
        Self { perigee_alt_m: 6.0e5, apogee_alt_m: 4.0e7 }
    }

    pub fn perigee_radius_m(&self) -> f64 {
        EARTH_RADIUS_M + self.perigee_alt_m
    }

    pub fn apogee_radius_m(&self) -> f64 {
        EARTH_RADIUS_M + self.apogee_alt_m
    }

    pub fn semi_major_m(&self) -> f64 {
        0.5 * (self.perigee_radius_m() + self.apogee_radius_m())
    }

    pub fn eccentricity(&self) -> f64 {
        let (rp, ra) = (self.perigee_radius_m(), self.apogee_radius_m());
        (ra - rp) / (ra + rp)
    }

    /// √(a³/μ), the inverse mean motion.
    pub fn time_scale_s(&self) -> f64 {
        (self.semi_major_m().powi(3) / EARTH_MU_M3S2).sqrt()
    }

    pub fn period_s(&self) -> f64 {
        TAU * self.time_scale_s()
    }

    /// Orbital radius at true anomaly `phi`.
    pub fn radius_at(&self, phi: f64) -> f64 {
        let e = self.eccentricity();
        self.semi_major_m() * (1.0 - e * e) / (1.0 + e * phi.cos())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Orbit {
    Circular(CircularOrbit),
    Elliptical(EllipticalOrbit),
}

impl Orbit {
    /// Highest altitude reached; the static link models place the
    /// satellite there.
    pub fn peak_altitude_m(&self) -> f64 {
        match self {
            Orbit::Circular(o) => o.altitude_m,
            Orbit::Elliptical(o) => o.apogee_alt_m,
        }
    }
}

/// Line-of-sight geometry between a station and a satellite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub slant_range_m: f64,
    pub zenith_angle_rad: f64,
    pub elevation_rad: f64,
    pub ground_central_angle_rad: f64,
}

impl LinkGeometry {
    /// Ground station at sea level, satellite at `altitude_m` seen at `elevation_rad`.
    pub fn ground_link(altitude_m: f64, elevation_rad: f64) -> Self {
        Self {
            slant_range_m: slant_range(altitude_m, elevation_rad),
            zenith_angle_rad: FRAC_PI_2 - elevation_rad,
            elevation_rad,
            ground_central_angle_rad: central_angle_from_elevation(altitude_m, elevation_rad),
        }
    }

    /// Straight overhead path of length `range_m`.
    pub fn zenith(range_m: f64) -> Self {
        Self { slant_range_m: range_m, zenith_angle_rad: 0.0, elevation_rad: FRAC_PI_2, ground_central_angle_rad: 0.0 }
    }

    pub fn from_central_angle(altitude_m: f64, alpha_rad: f64) -> Self {
        let r = EARTH_RADIUS_M + altitude_m;
        let elevation = elevation_from_central_angle(altitude_m, alpha_rad);
        let range = if alpha_rad == 0.0 { altitude_m } else { chord(EARTH_RADIUS_M, r, alpha_rad) };
        Self {
            slant_range_m: range,
            zenith_angle_rad: FRAC_PI_2 - elevation,
            elevation_rad: elevation,
            ground_central_angle_rad: alpha_rad,
        }
    }
}

/// Distance between two points at radii `r1`, `r2` separated by central angle `gamma`.
pub fn chord(r1: f64, r2: f64, gamma: f64) -> f64 {
    (r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * gamma.cos()).max(0.0).sqrt()
}

pub fn orbital_velocity(orbit: &CircularOrbit) -> f64 {
    (EARTH_MU_M3S2 / orbit.radius_m()).sqrt()
}

/// Station-to-satellite distance for a station at sea level.
pub fn slant_range(altitude_m: f64, elevation_rad: f64) -> f64 {
    if elevation_rad >= FRAC_PI_2 {
        return altitude_m;
    }
    let r = EARTH_RADIUS_M + altitude_m;
    let (s, c) = elevation_rad.sin_cos();
    let root = (r * r - EARTH_RADIUS_M * EARTH_RADIUS_M * c * c).sqrt();
    // rationalized to avoid cancellation at high elevation
    altitude_m * (2.0 * EARTH_RADIUS_M + altitude_m) / (root + EARTH_RADIUS_M * s)
}

/// Earth-central angle between station and sub-satellite point.
pub fn central_angle_from_elevation(altitude_m: f64, elevation_rad: f64) -> f64 {
    let r = EARTH_RADIUS_M + altitude_m;
    FRAC_PI_2 - elevation_rad - (EARTH_RADIUS_M * elevation_rad.cos() / r).asin()
}

/// Elevation of a satellite whose sub-point is `alpha_rad` away. Negative
/// results mean the satellite is below the local horizon.
pub fn elevation_from_central_angle(altitude_m: f64, alpha_rad: f64) -> f64 {
    let r = EARTH_RADIUS_M + altitude_m;
    (r * alpha_rad.cos() - EARTH_RADIUS_M).atan2(r * alpha_rad.sin())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleLink {
    /// Geometry of each of the two identical links.
    pub link: LinkGeometry,
    pub feasible: bool,
}

/// Satellite midway between two ground stations `ground_distance_m` apart
/// along the surface.
pub fn symmetric_double_link(altitude_m: f64, ground_distance_m: f64) -> DoubleLink {
    let alpha = ground_distance_m / (2.0 * EARTH_RADIUS_M);
    let link = LinkGeometry::from_central_angle(altitude_m, alpha);
    DoubleLink { feasible: link.elevation_rad >= 0.0, link }
}

/// Ground distance at which a symmetric double link from `altitude_m` grazes
/// the horizon at both stations.
pub fn double_link_horizon_distance(altitude_m: f64) -> f64 {
    2.0 * EARTH_RADIUS_M * central_angle_from_elevation(altitude_m, 0.0)
}

/// Lowest altitude at which both links of a symmetric double link reach at
/// least `min_elevation_rad`.
pub fn min_altitude_for_double_link(ground_distance_m: f64, min_elevation_rad: f64) -> Result<f64> {
    if !(0.0..FRAC_PI_2).contains(&min_elevation_rad) {
        return Err(argument("minimum elevation must lie in [0, π/2)"));
    }
    if ground_distance_m < 0.0 {
        return Err(argument("ground distance must be non-negative"));
    }
    let alpha = ground_distance_m / (2.0 * EARTH_RADIUS_M);
    let denom = (min_elevation_rad + alpha).cos();
    if denom <= 0.0 {
        return Err(argument(format!(
            "{:.0} km cannot be bridged at {:.2}° elevation from any altitude",
            ground_distance_m / 1e3,
            min_elevation_rad.to_degrees()
        )));
    }
    Ok(EARTH_RADIUS_M * (min_elevation_rad.cos() / denom - 1.0))
}

/// Central angle between an observer at radius `station_radius_m` and a
/// target at `target_radius_m` seen at `zenith_rad` from the observer.
fn central_angle_from_zenith(station_radius_m: f64, target_radius_m: f64, zenith_rad: f64) -> f64 {
    zenith_rad - (station_radius_m * zenith_rad.sin() / target_radius_m).asin()
}

/// Time a circular-orbit satellite spends within `max_zenith_rad` of a sea-level station.
pub fn pass_duration_circular(orbit: &CircularOrbit, max_zenith_rad: f64) -> Result<f64> {
    pass_duration_over_station(orbit, 0.0, max_zenith_rad)
}

/// As [`pass_duration_circular`] for a stationary observer at `station_alt_m`
/// (ground station or high-altitude platform).
pub fn pass_duration_over_station(orbit: &CircularOrbit, station_alt_m: f64, max_zenith_rad: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_2).contains(&max_zenith_rad) {
        return Err(argument("max zenith must lie in [0, π/2]"));
    }
    if station_alt_m >= orbit.altitude_m {
        return Err(argument("station must sit below the orbit"));
    }
    let alpha = central_angle_from_zenith(EARTH_RADIUS_M + station_alt_m, orbit.radius_m(), max_zenith_rad);
    Ok(2.0 * alpha * orbit.radius_m() / orbit.velocity_ms())
}

/// Eccentric anomaly for true anomaly `phi` ∈ [0, 2π), continuous and increasing.
pub fn eccentric_anomaly(e: f64, phi: f64) -> f64 {
    let half = 0.5 * phi;
    // tan(E/2) = √((1−e)/(1+e))·tan(φ/2), taken on the branch E ∈ [0, 2π)
    2.0 * ((1.0 - e).sqrt() * half.sin()).atan2((1.0 + e).sqrt() * half.cos())
}

/// Flight time from perigee to true anomaly `true_anomaly_rad`. Angles past
/// one revolution add whole periods.
pub fn time_from_perigee(orbit: &EllipticalOrbit, true_anomaly_rad: f64) -> Result<f64> {
    if !(true_anomaly_rad >= 0.0 && true_anomaly_rad.is_finite()) {
        return Err(argument("true anomaly must be a non-negative finite angle"));
    }
    let revs = (true_anomaly_rad / TAU).floor();
    let phi = true_anomaly_rad - revs * TAU;
    let e = orbit.eccentricity();
    let big_e = eccentric_anomaly(e, phi);
    let mean = big_e - e * big_e.sin();
    Ok(orbit.time_scale_s() * mean + revs * orbit.period_s())
}

/// Zenith angle at a sea-level station under apogee when the satellite sits
/// at true anomaly `phi`.
pub fn apogee_station_zenith(orbit: &EllipticalOrbit, phi: f64) -> f64 {
    let r = orbit.radius_at(phi);
    let gamma = (phi - PI).abs();
    (r * gamma.sin()).atan2(r * gamma.cos() - EARTH_RADIUS_M)
}

/// Time an elliptical-orbit satellite stays within `max_zenith_rad` of a
/// station placed directly under apogee.
pub fn heo_dwell_above_station(orbit: &EllipticalOrbit, max_zenith_rad: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_2).contains(&max_zenith_rad) {
        return Err(argument("max zenith must lie in [0, π/2]"));
    }
    if max_zenith_rad == 0.0 {
        return Ok(0.0);
    }
    // coarse scan for the first violation past apogee, then bisection
    const STEPS: usize = 4096;
    let step = PI / STEPS as f64;
    let mut lo = PI;
    let mut hi = TAU;
    for i in 1..=STEPS {
        let phi = PI + i as f64 * step;
        if apogee_station_zenith(orbit, phi) > max_zenith_rad {
            hi = phi;
            break;
        }
        lo = phi;
    }
    let t_lo = |phi: f64| time_from_perigee(orbit, phi.min(TAU - 1e-15));
    while t_lo(hi)? - t_lo(lo)? > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if apogee_station_zenith(orbit, mid) > max_zenith_rad {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let boundary = 0.5 * (lo + hi);
    Ok(2.0 * (t_lo(boundary)? - time_from_perigee(orbit, PI)?))
}

/// Largest angular separation at which the line of sight between two
/// coplanar circular orbits clears the lower orbit (tangent to it).
pub fn max_zenith_between_orbits(lower: &CircularOrbit, higher: &CircularOrbit) -> Result<f64> {
    if !(higher.altitude_m > lower.altitude_m) {
        return Err(argument("higher orbit must be strictly above the lower one"));
    }
    Ok((lower.radius_m() / higher.radius_m()).acos())
}

/// Link window between a lower circular orbit and a higher platform.
///
/// Circular pairs: time for the angular separation to grow from 0 to the
/// smaller of `max_zenith_rad` and the tangent bound at the relative rate
/// |ω_L − ω_H|. Elliptical higher orbit: the high satellite is taken as
/// fixed during half a lower-orbit period.
pub fn intersatellite_pass_duration(lower: &CircularOrbit, higher: &Orbit, max_zenith_rad: f64) -> Result<f64> {
    match higher {
        Orbit::Circular(high) => {
            let bound = max_zenith_rad.min(max_zenith_between_orbits(lower, high)?);
            let rate = (lower.angular_rate() - high.angular_rate()).abs();
            if rate == 0.0 {
                return Err(argument("orbits co-rotate, the window never closes"));
            }
            Ok(bound / rate)
        }
        Orbit::Elliptical(_) => Ok(0.5 * lower.period_s()),
    }
}

/// Separation between satellites on two coplanar circular orbits.
pub fn intersatellite_range(lower: &CircularOrbit, higher_radius_m: f64, separation_rad: f64) -> f64 {
    if separation_rad == 0.0 {
        return higher_radius_m - lower.radius_m();
    }
    chord(lower.radius_m(), higher_radius_m, separation_rad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const LEO: f64 = 6.0e5;

    #[test]
    fn velocity_examples() {
        let leo = CircularOrbit::new(LEO).unwrap();
        assert_relative_eq!(orbital_velocity(&leo), 7.558e3, max_relative = 1e-3);
        let geo = CircularOrbit::new(35_786e3).unwrap();
        assert_relative_eq!(orbital_velocity(&geo), 3.075e3, max_relative = 1e-3);
        let mut last = f64::INFINITY;
        for h in [1e5, 1e6, 1e7, 1e8, 1e9, 1e16] {
            let v = orbital_velocity(&CircularOrbit::new(h).unwrap());
            assert!(v < last);
            last = v;
        }
        assert!(last < 1.0);
    }

    #[test]
    fn orbit_validation() {
        assert!(CircularOrbit::new(0.0).is_err());
        assert!(EllipticalOrbit::new(1e6, 5e5).is_err());
        assert!(EllipticalOrbit::new(-1.0, 5e5).is_err());
    }

    #[test]
    fn slant_range_examples() {
        assert_eq!(slant_range(LEO, FRAC_PI_2), LEO);
        // frozen from √((R+H)² − R²)
        assert_relative_eq!(slant_range(LEO, 0.0), 2_829_346.2142339526, max_relative = 1e-12);
        let mut last = f64::INFINITY;
        for i in 0..=90 {
            let l = slant_range(LEO, (i as f64).to_radians());
            assert!(l < last);
            last = l;
        }
    }

    #[test]
    fn elevation_from_central_angle_examples() {
        assert_eq!(elevation_from_central_angle(LEO, 0.0), FRAC_PI_2);
        let a = 0.2;
        assert!(elevation_from_central_angle(2e7, a) > elevation_from_central_angle(LEO, a));
        // grazing reach one-sided: ~2,663 km
        let reach = double_link_horizon_distance(LEO) / 2.0;
        assert_relative_eq!(reach, 2_662_662.05, max_relative = 1e-6);
    }

    #[test]
    fn round_trip_central_angle() {
        for h in [LEO, 2e7, 3.6e7] {
            for deg in 0..=90 {
                let eps = (deg as f64).to_radians();
                let alpha = central_angle_from_elevation(h, eps);
                assert!((elevation_from_central_angle(h, alpha) - eps).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn double_link_examples() {
        let z = symmetric_double_link(LEO, 0.0);
        assert!(z.feasible);
        assert_eq!(z.link.slant_range_m, LEO);
        let meo = symmetric_double_link(2e7, 4e6);
        assert!(meo.feasible);
        // frozen by direct evaluation: 66.48°
        assert_relative_eq!(meo.link.elevation_rad.to_degrees(), 66.48128353874942, max_relative = 1e-9);
        assert!(!symmetric_double_link(LEO, 6e6).feasible);
    }

    #[test]
    fn feasibility_boundary_matches_zero_crossing() {
        let d = double_link_horizon_distance(LEO);
        assert!(symmetric_double_link(LEO, d - 1.0).feasible);
        assert!(!symmetric_double_link(LEO, d + 1.0).feasible);
    }

    #[test]
    fn min_altitude_examples() {
        let h = min_altitude_for_double_link(4.5e6, 45f64.to_radians()).unwrap();
        assert_relative_eq!(h, 4_383_259.9438269995, max_relative = 1e-9);
        let tiny = min_altitude_for_double_link(1.0, 45f64.to_radians()).unwrap();
        assert!(tiny > 0.0 && tiny < 1.0);
        // grazing case inverts the horizon reach
        let h0 = min_altitude_for_double_link(double_link_horizon_distance(LEO), 0.0).unwrap();
        assert_relative_eq!(h0, LEO, max_relative = 1e-9);
        assert!(min_altitude_for_double_link(1.5e7, 45f64.to_radians()).is_err());
    }

    #[test]
    fn circular_pass_duration() {
        let leo = CircularOrbit::new(LEO).unwrap();
        assert_eq!(pass_duration_circular(&leo, 0.0).unwrap(), 0.0);
        let t = pass_duration_circular(&leo, 45f64.to_radians()).unwrap();
        assert_relative_eq!(t, 152.55970895968295, max_relative = 1e-9);
        let mut last = 0.0;
        for h in [3e5, 6e5, 2e6, 2e7, 3.6e7] {
            let t = pass_duration_circular(&CircularOrbit::new(h).unwrap(), 45f64.to_radians()).unwrap();
            assert!(t > last);
            last = t;
        }
        assert!(pass_duration_circular(&leo, 2.0).is_err());
    }

    #[test]
    fn perigee_timing() {
        let m = EllipticalOrbit::molniya();
        assert_eq!(time_from_perigee(&m, 0.0).unwrap(), 0.0);
        assert_relative_eq!(2.0 * time_from_perigee(&m, PI).unwrap(), m.period_s(), max_relative = 1e-12);
        assert_relative_eq!(time_from_perigee(&m, TAU - 1e-12).unwrap(), m.period_s(), max_relative = 1e-9);
        let circ = EllipticalOrbit::new(1e6, 1e6).unwrap();
        for phi in [0.3, 1.0, 3.0, 5.5] {
            assert_relative_eq!(
                time_from_perigee(&circ, phi).unwrap(),
                phi * circ.time_scale_s(),
                max_relative = 1e-12
            );
        }
        let mut last = -1.0;
        for i in 0..1000 {
            let t = time_from_perigee(&m, i as f64 * TAU / 1000.0).unwrap();
            assert!(t > last);
            last = t;
        }
    }

    #[test]
    fn heo_dwell() {
        let m = EllipticalOrbit::molniya();
        assert_eq!(heo_dwell_above_station(&m, 0.0).unwrap(), 0.0);
        let small = heo_dwell_above_station(&m, 1e-3).unwrap();
        assert!(small < 60.0);
        let d = heo_dwell_above_station(&m, 45f64.to_radians()).unwrap();
        assert!(d > 8.0 * 3600.0, "dwell {d}");
        let mut last = 0.0;
        for apogee in [2e7, 3e7, 4e7, 5e7] {
            let o = EllipticalOrbit::new(6e5, apogee).unwrap();
            let d = heo_dwell_above_station(&o, 45f64.to_radians()).unwrap();
            assert!(d > last);
            last = d;
        }
    }

    /// Largest separation whose line of sight stays outside the lower orbit,
    /// by scanning the segment's closest approach to Earth's center.
    fn brute_force_tangent(r_low: f64, r_high: f64) -> f64 {
        let n = 200_000;
        let mut best = 0.0;
        for i in 0..=n {
            let g = FRAC_PI_2 * i as f64 / n as f64;
            let (ax, ay) = (r_low, 0.0);
            let (bx, by) = (r_high * g.cos(), r_high * g.sin());
            let (dx, dy) = (bx - ax, by - ay);
            let t = (-(ax * dx + ay * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
            let (px, py) = (ax + t * dx, ay + t * dy);
            if (px * px + py * py).sqrt() >= r_low * (1.0 - 1e-12) {
                best = g;
            }
        }
        best
    }

    #[test]
    fn tangent_bound_matches_brute_force() {
        let leo = CircularOrbit::new(LEO).unwrap();
        let geo = CircularOrbit::new(3.6e7).unwrap();
        let theta = max_zenith_between_orbits(&leo, &geo).unwrap();
        let brute = brute_force_tangent(leo.radius_m(), geo.radius_m());
        assert!((theta - brute).abs() < 1e-4, "{theta} vs {brute}");
        let far = CircularOrbit::new(1e12).unwrap();
        assert!(FRAC_PI_2 - max_zenith_between_orbits(&leo, &far).unwrap() < 1e-5);
        let meo = CircularOrbit::new(2e7).unwrap();
        assert!(max_zenith_between_orbits(&meo, &geo).unwrap() < theta);
        assert!(max_zenith_between_orbits(&leo, &leo).is_err());
    }

    #[test]
    fn intersatellite_windows() {
        let leo = CircularOrbit::new(LEO).unwrap();
        let heo = Orbit::Elliptical(EllipticalOrbit::molniya());
        let w = intersatellite_pass_duration(&leo, &heo, 45f64.to_radians()).unwrap();
        assert_relative_eq!(w / 60.0, 48.3, max_relative = 2e-3);
        assert!(intersatellite_pass_duration(&leo, &Orbit::Circular(leo), 0.5).is_err());

        let geo = CircularOrbit::new(3.6e7).unwrap();
        let a = intersatellite_pass_duration(&leo, &Orbit::Circular(geo), 0.2).unwrap();
        let b = intersatellite_pass_duration(&leo, &Orbit::Circular(geo), 0.4).unwrap();
        assert_relative_eq!(b, 2.0 * a, max_relative = 1e-12);
        assert_relative_eq!(a * (leo.angular_rate() - geo.angular_rate()), 0.2, max_relative = 1e-12);
    }
}
