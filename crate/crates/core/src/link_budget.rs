//! Per-link optical attenuation for uplinks, downlinks, and intersatellite
//! links, and the aperture-sizing solver built on it.

use serde::{Deserialize, Serialize};

use crate::atmosphere::{slant_absorption_db_clamped, AbsorptionTable};
use crate::constants::DefaultParams;
use crate::error::{argument, Error, Result};
use crate::geometry::LinkGeometry;

/// Transmitter/receiver optics and the lumped losses of one link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalChain {
    pub tx_aperture_m: f64,
    pub rx_aperture_m: f64,
    pub trans_tx: f64,
    pub trans_rx: f64,
    pub pointing_loss: f64,
    pub additional_loss_db: f64,
}

impl OpticalChain {
    pub fn new(
        tx_aperture_m: f64,
        rx_aperture_m: f64,
        trans_tx: f64,
        trans_rx: f64,
        pointing_loss: f64,
        additional_loss_db: f64,
    ) -> Result<Self> {
        let chain = Self { tx_aperture_m, rx_aperture_m, trans_tx, trans_rx, pointing_loss, additional_loss_db };
        chain.validate()?;
        Ok(chain)
    }

    /// Table defaults for `kind` with the given apertures.
    pub fn from_defaults(
        kind: LinkKind,
        params: &DefaultParams,
        tx_aperture_m: f64,
        rx_aperture_m: f64,
    ) -> Result<Self> {
        Self::new(
            tx_aperture_m,
            rx_aperture_m,
            params.trans_tx,
            params.trans_rx,
            kind.default_pointing_loss(params),
            params.optical_loss_db,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tx_aperture_m > 0.0 && self.rx_aperture_m > 0.0) {
            return Err(argument("apertures must be positive"));
        }
        if !(self.trans_tx > 0.0 && self.trans_tx <= 1.0 && self.trans_rx > 0.0 && self.trans_rx <= 1.0) {
            return Err(argument("optics transmittances must lie in (0, 1]"));
        }
        if !(0.0..1.0).contains(&self.pointing_loss) {
            return Err(argument("pointing loss must lie in [0, 1)"));
        }
        if !(self.additional_loss_db >= 0.0) {
            return Err(argument("additional loss must be >= 0 dB"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Uplink,
    Downlink,
    Intersatellite,
}

impl LinkKind {
    pub const ALL: [LinkKind; 3] = [LinkKind::Uplink, LinkKind::Downlink, LinkKind::Intersatellite];

    /// Uplinks see turbulence-induced divergence λ/r0; downlinks and
    /// vacuum paths do not.
    pub fn has_turbulence_divergence(self) -> bool {
        matches!(self, LinkKind::Uplink)
    }

    pub fn has_atmosphere(self) -> bool {
        !matches!(self, LinkKind::Intersatellite)
    }

    pub fn default_pointing_loss(self, params: &DefaultParams) -> f64 {
        match self {
            LinkKind::Intersatellite => params.pointing_loss_intersatellite,
            _ => params.pointing_loss,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LinkKind::Uplink => "uplink",
            LinkKind::Downlink => "downlink",
            LinkKind::Intersatellite => "intersatellite",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "uplink" => Some(LinkKind::Uplink),
            "downlink" => Some(LinkKind::Downlink),
            "intersatellite" => Some(LinkKind::Intersatellite),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClampFlags {
    /// The beam footprint was smaller than the receiver; diffraction loss held at 0 dB.
    pub geometric: bool,
    /// The path was steeper than the secant validity bound; air mass held there.
    pub absorption: bool,
}

impl ClampFlags {
    pub fn any(&self) -> bool {
        self.geometric || self.absorption
    }
}

/// Attenuation of one link, in dB, broken down by cause.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub geometric_db: f64,
    pub optics_db: f64,
    pub atmosphere_db: f64,
    pub additional_db: f64,
    pub total_db: f64,
    pub far_field_ok: bool,
    pub clamped: ClampFlags,
}

pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

pub fn db_to_probability(db: f64) -> f64 {
    10f64.powf(-db / 10.0)
}

/// Attenuation of a diffraction-limited link at slant range
/// `geometry.slant_range_m`. The geometric spreading term is
/// `H²(θ_T² + θ_atm²)/D_R²` with `θ_T = λ/D_T`, `θ_atm = λ/r0` on uplinks
/// only; everything is summed in dB.
pub fn attenuation_db(
    kind: LinkKind,
    chain: &OpticalChain,
    wavelength_m: f64,
    geometry: &LinkGeometry,
    r0_m: f64,
    absorption: &AbsorptionTable,
) -> Result<LinkBudget> {
    chain.validate()?;
    let range = geometry.slant_range_m;
    if !(range > 0.0 && wavelength_m > 0.0) {
        return Err(argument("slant range and wavelength must be positive"));
    }
    if kind.has_atmosphere() && geometry.zenith_angle_rad > std::f64::consts::FRAC_PI_2 {
        return Err(argument("satellite is below the station horizon"));
    }

    let theta_t = wavelength_m / chain.tx_aperture_m;
    let theta_atm = if kind.has_turbulence_divergence() {
        if !(r0_m > 0.0) {
            return Err(argument("Fried parameter must be positive"));
        }
        wavelength_m / r0_m
    } else {
        0.0
    };
    let spread =
        range * range * (theta_t * theta_t + theta_atm * theta_atm) / (chain.rx_aperture_m * chain.rx_aperture_m);
    let mut clamped = ClampFlags::default();
    let geometric_db = if spread < 1.0 {
        clamped.geometric = true;
        0.0
    } else {
        to_db(spread)
    };
    let optics_db = -to_db(chain.trans_tx * (1.0 - chain.pointing_loss) * chain.trans_rx);

    let atmosphere_db = if kind.has_atmosphere() {
        let (db, hit) = slant_absorption_db_clamped(absorption, wavelength_m, geometry.zenith_angle_rad.max(0.0))?;
        clamped.absorption = hit;
        db
    } else {
        0.0
    };
    let additional_db = chain.additional_loss_db;

    let far_field_limit = 10.0 * chain.tx_aperture_m * chain.tx_aperture_m / wavelength_m;
    Ok(LinkBudget {
        geometric_db,
        optics_db,
        atmosphere_db,
        additional_db,
        total_db: geometric_db + optics_db + atmosphere_db + additional_db,
        far_field_ok: range >= far_field_limit,
        clamped,
    })
}

/// Single-link photon survival probability.
pub fn transmission_probability(budget: &LinkBudget) -> f64 {
    db_to_probability(budget.total_db)
}

/// Probability that both photons of a pair survive two independent links
/// of the same attenuation.
pub fn double_link_probability(per_link_db: f64) -> f64 {
    db_to_probability(2.0 * per_link_db)
}

/// Which aperture stays fixed while the other is sized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedSide {
    TxFixed,
    RxFixed,
}

/// Inputs to [`solve_min_aperture`] that do not depend on the free aperture.
#[derive(Debug, Clone, Copy)]
pub struct ApertureProblem<'a> {
    pub kind: LinkKind,
    /// Supplies transmittances and losses; its apertures are overwritten.
    pub chain: OpticalChain,
    pub fixed_side: FixedSide,
    pub fixed_aperture_m: f64,
    pub target_db: f64,
    pub wavelength_m: f64,
    pub geometry: LinkGeometry,
    pub r0_m: f64,
    pub absorption: &'a AbsorptionTable,
    /// Search interval for the free aperture.
    pub bounds_m: (f64, f64),
}

impl ApertureProblem<'_> {
    fn budget_with(&self, free_aperture_m: f64) -> Result<LinkBudget> {
        let mut chain = self.chain;
        match self.fixed_side {
            FixedSide::TxFixed => {
                chain.tx_aperture_m = self.fixed_aperture_m;
                chain.rx_aperture_m = free_aperture_m;
            }
            FixedSide::RxFixed => {
                chain.rx_aperture_m = self.fixed_aperture_m;
                chain.tx_aperture_m = free_aperture_m;
            }
        }
        attenuation_db(self.kind, &chain, self.wavelength_m, &self.geometry, self.r0_m, self.absorption)
    }
}

/// Smallest free aperture within `bounds_m` whose link meets `target_db`,
/// to 1 mm.
pub fn solve_min_aperture(problem: &ApertureProblem<'_>) -> Result<f64> {
    let (lo_bound, hi_bound) = problem.bounds_m;
    if !(lo_bound > 0.0 && hi_bound >= lo_bound) {
        return Err(argument("aperture bounds must satisfy 0 < min <= max"));
    }
    let best = problem.budget_with(hi_bound)?.total_db;
    if best > problem.target_db {
        return Err(Error::Unachievable { target_db: problem.target_db, best_db: best });
    }
    if problem.budget_with(lo_bound)?.total_db <= problem.target_db {
        return Ok(lo_bound);
    }
    let (mut lo, mut hi) = (lo_bound, hi_bound);
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if problem.budget_with(mid)?.total_db <= problem.target_db {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
