//! Hufnagel-Valley turbulence profile, Fried parameter, and slant-path
//! absorption.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::Wavelength;
use crate::error::{argument, Error, Result};

/// Zenith angle beyond which the secant air-mass scaling and the
/// weak-fluctuation turbulence model are not used.
pub const MAX_SLANT_ZENITH_RAD: f64 = 70.0 * PI / 180.0;

/// Default upper integration bound for the turbulence integral.
pub const DEFAULT_TURBULENCE_TOP_M: f64 = 1.0e5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HvProfile {
    /// RMS wind speed V, m/s.
    pub wind_rms_ms: f64,
    /// Ground-level structure constant A′, m^(-2/3).
    pub ground_cn2: f64,
}

impl Default for HvProfile {
    fn default() -> Self {
        Self { wind_rms_ms: 21.0, ground_cn2: 1.7e-14 }
    }
}

impl HvProfile {
    pub fn new(wind_rms_ms: f64, ground_cn2: f64) -> Result<Self> {
        if !(wind_rms_ms > 0.0 && ground_cn2 > 0.0) {
            return Err(argument("H-V wind speed and ground C_n² must be positive"));
        }
        Ok(Self { wind_rms_ms, ground_cn2 })
    }
}

/// Refractive-index structure constant C_n²(h), m^(-2/3).
pub fn cn2(profile: &HvProfile, altitude_m: f64) -> f64 {
    let h = altitude_m;
    let wind = profile.wind_rms_ms / 27.0;
    0.00594 * wind * wind * (1e-5 * h).powi(10) * (-h / 1000.0).exp()
        + 2.7e-16 * (-h / 1500.0).exp()
        + profile.ground_cn2 * (-h / 100.0).exp()
}

/// Integrated turbulence ∫ C_n²(h) dh from `h0_m` to `h_top_m`, m^(1/3).
pub fn mu0(profile: &HvProfile, h0_m: f64, h_top_m: f64) -> Result<f64> {
    if !(h0_m >= 0.0 && h_top_m >= h0_m) {
        return Err(argument("need 0 <= h0 <= h_top"));
    }
    if h_top_m == h0_m {
        return Ok(0.0);
    }
    // split at the profile's length scales so each piece is smooth on its own scale
    const BREAKS: [f64; 9] = [100.0, 300.0, 1e3, 3e3, 1e4, 2e4, 5e4, 1e5, 1e6];
    let mut knots = vec![h0_m];
    knots.extend(BREAKS.iter().copied().filter(|&b| b > h0_m && b < h_top_m));
    knots.push(h_top_m);
    let f = |h: f64| cn2(profile, h);
    Ok(knots.windows(2).map(|w| adaptive_simpson(&f, w[0], w[1], 1e-12)).sum())
}

/// Fried parameter (atmospheric coherence diameter) for a path at `zenith_rad`.
pub fn fried_r0(profile: &HvProfile, wavelength_m: f64, zenith_rad: f64, h0_m: f64, h_top_m: f64) -> Result<f64> {
    if !(0.0..=MAX_SLANT_ZENITH_RAD).contains(&zenith_rad) {
        return Err(argument(format!(
            "zenith {:.2}° outside the weak-fluctuation range (<= 70°)",
            zenith_rad.to_degrees()
        )));
    }
    if !(wavelength_m > 0.0) {
        return Err(argument("wavelength must be positive"));
    }
    let k = 2.0 * PI / wavelength_m;
    let integral = mu0(profile, h0_m, h_top_m)?;
    Ok((0.423 * integral * k * k / zenith_rad.cos()).powf(-0.6))
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = rel_tol * whole.abs().max(f64::MIN_POSITIVE);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Vertical-path absorption per wavelength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionTable {
    entries: Vec<(f64, f64)>,
    pub max_slant_zenith_rad: f64,
}

impl Default for AbsorptionTable {
    fn default() -> Self {
        Self {
            entries: [Wavelength::Nm785, Wavelength::Nm1550]
                .iter()
                .map(|w| (w.meters(), w.vertical_absorption_db()))
                .collect(),
            max_slant_zenith_rad: MAX_SLANT_ZENITH_RAD,
        }
    }
}

fn same_wavelength(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

impl AbsorptionTable {
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        for (i, &(w, db)) in entries.iter().enumerate() {
            if !(w > 0.0 && db >= 0.0) {
                return Err(argument("absorption entries need positive wavelength and dB >= 0"));
            }
            if entries[..i].iter().any(|&(o, _)| same_wavelength(o, w)) {
                return Err(argument(format!("duplicate absorption entry for {w:e} m")));
            }
        }
        Ok(Self { entries, max_slant_zenith_rad: MAX_SLANT_ZENITH_RAD })
    }

    /// Adds or replaces one wavelength's vertical loss.
    pub fn with_entry(mut self, wavelength_m: f64, vertical_db: f64) -> Result<Self> {
        if !(wavelength_m > 0.0 && vertical_db >= 0.0) {
            return Err(argument("absorption entries need positive wavelength and dB >= 0"));
        }
        self.entries.retain(|&(w, _)| !same_wavelength(w, wavelength_m));
        self.entries.push((wavelength_m, vertical_db));
        Ok(self)
    }

    pub fn vertical_db(&self, wavelength_m: f64) -> Result<f64> {
        self.entries
            .iter()
            .find(|&&(w, _)| same_wavelength(w, wavelength_m))
            .map(|&(_, db)| db)
            .ok_or(Error::UnknownWavelength { wavelength_m })
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }
}

/// Secant-scaled absorption along a slant path.
pub fn slant_absorption_db(table: &AbsorptionTable, wavelength_m: f64, zenith_rad: f64) -> Result<f64> {
    let vertical = table.vertical_db(wavelength_m)?;
    if !(0.0..=table.max_slant_zenith_rad).contains(&zenith_rad) {
        return Err(argument(format!("zenith {:.2}° outside the secant air-mass range", zenith_rad.to_degrees())));
    }
    Ok(vertical / zenith_rad.cos())
}

/// Like [`slant_absorption_db`] but holds the air mass at its value at the
/// validity bound for steeper paths. The flag reports whether that happened.
pub fn slant_absorption_db_clamped(table: &AbsorptionTable, wavelength_m: f64, zenith_rad: f64) -> Result<(f64, bool)> {
    let clamped = zenith_rad > table.max_slant_zenith_rad;
    let z = zenith_rad.clamp(0.0, table.max_slant_zenith_rad);
    Ok((slant_absorption_db(table, wavelength_m, z)?, clamped))
}
