//! Physical constants and the default parameter table of the link model.

use serde::{Deserialize, Serialize};

/// Spherical-Earth constants used throughout. Values are CODATA/IERS
/// conventional numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub earth_radius_m: f64,
    pub earth_mu_m3s2: f64,
    pub light_speed_ms: f64,
}

pub const EARTH_RADIUS_M: f64 = 6.371e6;
pub const EARTH_MU_M3S2: f64 = 3.986004418e14;
pub const LIGHT_SPEED_MS: f64 = 2.99792458e8;

pub const CONSTANTS: PhysicalConstants =
    PhysicalConstants { earth_radius_m: EARTH_RADIUS_M, earth_mu_m3s2: EARTH_MU_M3S2, light_speed_ms: LIGHT_SPEED_MS };

impl Default for PhysicalConstants {
    fn default() -> Self {
        CONSTANTS
    }
}

/// The two operating wavelengths carried by the parameter table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Wavelength {
    Nm785,
    Nm1550,
}

impl Wavelength {
    pub fn meters(self) -> f64 {
        match self {
            Wavelength::Nm785 => 785e-9,
            Wavelength::Nm1550 => 1550e-9,
        }
    }

    /// Vertical-path atmospheric absorption in dB.
    pub fn vertical_absorption_db(self) -> f64 {
        match self {
            Wavelength::Nm785 => 1.0,
            Wavelength::Nm1550 => 0.5,
        }
    }

    pub fn from_nm(nm: u32) -> Option<Self> {
        match nm {
            785 => Some(Wavelength::Nm785),
            1550 => Some(Wavelength::Nm1550),
            _ => None,
        }
    }

    pub fn nm(self) -> u32 {
        match self {
            Wavelength::Nm785 => 785,
            Wavelength::Nm1550 => 1550,
        }
    }
}

/// Altitude presets, meters above the mean surface.
pub mod altitude {
    pub const HAP_LOW_M: f64 = 2.0e4;
    pub const HAP_HIGH_M: f64 = 3.0e4;
    pub const LEO_M: f64 = 6.0e5;
    pub const MEO_M: f64 = 2.0e7;
    pub const GEO_M: f64 = 3.6e7;
    pub const HEO_PERIGEE_M: f64 = 6.0e5;
    pub const HEO_APOGEE_M: f64 = 4.0e7;
}

/// Default parameter table for free-space links and protocol hardware.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefaultParams {
    pub wavelength_m: f64,
    pub rep_rate_hz: f64,
    pub eta_sps: f64,
    pub eta_det: f64,
    /// Combined memory efficiency, storage times retrieval.
    pub eta_mem: f64,
    pub eta_qnd: f64,
    pub t1_s: f64,
    pub trans_tx: f64,
    pub trans_rx: f64,
    pub pointing_loss: f64,
    pub pointing_loss_intersatellite: f64,
    pub optical_loss_db: f64,
    pub a_atm_vertical_db: f64,
    pub fried_r0_m: f64,
    pub hap_altitude_m: (f64, f64),
    pub leo_altitude_m: f64,
    pub meo_altitude_m: f64,
    pub geo_altitude_m: f64,
    pub heo_altitude_m: (f64, f64),
}

impl DefaultParams {
    /// Storage efficiency from the symmetric split of `eta_mem`.
    pub fn eta_store(&self) -> f64 {
        self.eta_mem.sqrt()
    }

    /// Retrieval efficiency from the symmetric split of `eta_mem`.
    pub fn eta_retrieve(&self) -> f64 {
        self.eta_mem.sqrt()
    }
}

pub fn defaults(wavelength: Wavelength) -> DefaultParams {
    DefaultParams {
        wavelength_m: wavelength.meters(),
        rep_rate_hz: 1e9,
        eta_sps: 0.75,
        eta_det: 0.90,
        eta_mem: 0.50,
        eta_qnd: 0.90,
        t1_s: 0.100,
        trans_tx: 0.80,
        trans_rx: 0.80,
        pointing_loss: 0.20,
        pointing_loss_intersatellite: 0.30,
        optical_loss_db: 6.0,
        a_atm_vertical_db: wavelength.vertical_absorption_db(),
        fried_r0_m: 0.075,
        hap_altitude_m: (altitude::HAP_LOW_M, altitude::HAP_HIGH_M),
        leo_altitude_m: altitude::LEO_M,
        meo_altitude_m: altitude::MEO_M,
        geo_altitude_m: altitude::GEO_M,
        heo_altitude_m: (altitude::HEO_PERIGEE_M, altitude::HEO_APOGEE_M),
    }
}
