//! Teleportation, two-link repeater, and QKD timing models.
//!
//! Probabilities entering here are end-to-end: `p_ave` is the chance that
//! both photons of a pair survive their links, and the repeater's `p` is the
//! per-attempt success probability of one elementary link.

use serde::{Deserialize, Serialize};

use crate::constants::{DefaultParams, LIGHT_SPEED_MS};
use crate::error::{argument, Error, Result};
use crate::link_budget::db_to_probability;

/// Source, detector, and memory figures of merit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardwareParams {
    pub rep_rate_hz: f64,
    pub eta_eps: f64,
    pub eta_sps: f64,
    pub eta_det: f64,
    pub eta_store: f64,
    pub eta_retrieve: f64,
    pub eta_qnd: f64,
    pub t1_s: f64,
    pub multiplex_factor: u32,
}

fn is_efficiency(x: f64) -> bool {
    x > 0.0 && x <= 1.0
}

impl HardwareParams {
    /// Table hardware with the symmetric memory split and the given pair
    /// source efficiency.
    pub fn from_defaults(params: &DefaultParams, eta_eps: f64) -> Result<Self> {
        let hw = Self {
            rep_rate_hz: params.rep_rate_hz,
            eta_eps,
            eta_sps: params.eta_sps,
            eta_det: params.eta_det,
            eta_store: params.eta_store(),
            eta_retrieve: params.eta_retrieve(),
            eta_qnd: params.eta_qnd,
            t1_s: params.t1_s,
            multiplex_factor: 1,
        };
        hw.validate()?;
        Ok(hw)
    }

    pub fn validate(&self) -> Result<()> {
        let effs = [
            ("eta_eps", self.eta_eps),
            ("eta_sps", self.eta_sps),
            ("eta_det", self.eta_det),
            ("eta_store", self.eta_store),
            ("eta_retrieve", self.eta_retrieve),
            ("eta_qnd", self.eta_qnd),
        ];
        if let Some((name, v)) = effs.iter().find(|(_, v)| !is_efficiency(*v)) {
            return Err(argument(format!("{name} must lie in (0, 1], got {v}")));
        }
        if !(self.rep_rate_hz > 0.0) {
            return Err(argument("rep_rate_hz must be positive"));
        }
        if !(self.t1_s > 0.0) {
            return Err(argument("t1_s must be positive"));
        }
        if self.multiplex_factor == 0 {
            return Err(argument("multiplex_factor must be at least 1"));
        }
        Ok(())
    }

    /// Attempt period T₀ = 1/R_s.
    pub fn attempt_period_s(&self) -> f64 {
        1.0 / self.rep_rate_hz
    }

    pub fn memory_decay(&self, dt_s: f64) -> f64 {
        (-dt_s / self.t1_s).exp()
    }

    fn multiplex(&self) -> f64 {
        f64::from(self.multiplex_factor)
    }
}

/// Classical signalling between the two ground stations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalComms {
    pub ground_distance_m: f64,
}

impl ClassicalComms {
    pub fn new(ground_distance_m: f64) -> Result<Self> {
        if !(ground_distance_m >= 0.0) {
            return Err(argument("ground distance must be non-negative"));
        }
        Ok(Self { ground_distance_m })
    }

    /// Memory-loading handshake time Δt₀.
    pub fn dt0_s(&self) -> f64 {
        self.ground_distance_m / LIGHT_SPEED_MS
    }

    /// BSM-result transmission time Δt₁.
    pub fn dt1_s(&self) -> f64 {
        self.ground_distance_m / LIGHT_SPEED_MS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Memoryless,
    OneMemoryAlice,
    OneMemoryBob,
    TwoMemory,
    TwoLinkRepeater,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [
        SchemeKind::Memoryless,
        SchemeKind::OneMemoryAlice,
        SchemeKind::OneMemoryBob,
        SchemeKind::TwoMemory,
        SchemeKind::TwoLinkRepeater,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Memoryless => "memoryless",
            SchemeKind::OneMemoryAlice => "one_memory_alice",
            SchemeKind::OneMemoryBob => "one_memory_bob",
            SchemeKind::TwoMemory => "two_memory",
            SchemeKind::TwoLinkRepeater => "two_link_repeater",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Linear-optics Bell-state measurement success, halved when Alice's
/// memory path admits only one of the two distinguishable Bell states.
pub fn bsm_probability(hw: &HardwareParams, halved: bool) -> f64 {
    let pb = hw.eta_sps * hw.eta_det * hw.eta_det / 2.0;
    if halved {
        pb / 2.0
    } else {
        pb
    }
}

fn check_probability(p: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(argument(format!("{name} must be a probability, got {p}")));
    }
    Ok(())
}

/// Teleportation rate (events/s) for the memoryless and on-demand schemes.
pub fn teleportation_rate(scheme: SchemeKind, hw: &HardwareParams, p_ave: f64, comms: &ClassicalComms) -> Result<f64> {
    check_probability(p_ave, "p_ave")?;
    let base = p_ave * hw.rep_rate_hz * hw.eta_eps * hw.multiplex();
    let memory = hw.eta_store * hw.eta_retrieve * hw.eta_qnd;
    let d0 = hw.memory_decay(comms.dt0_s());
    let d1 = hw.memory_decay(comms.dt1_s());
    let rate = match scheme {
        SchemeKind::Memoryless => base * bsm_probability(hw, false),
        SchemeKind::OneMemoryAlice => base * bsm_probability(hw, true) * memory * d0,
        SchemeKind::OneMemoryBob => base * bsm_probability(hw, false) * memory * d0 * d1,
        SchemeKind::TwoMemory => base * bsm_probability(hw, false) * memory * memory * d0 * d0 * d1,
        SchemeKind::TwoLinkRepeater => return Err(Error::SchemeMismatch("two_link_repeater")),
    };
    Ok(rate)
}

/// Distribution of |n_a − n_b| for two independent geometric(p) attempt counts.
pub fn ndif_pmf(p: f64, n: u64) -> f64 {
    if n == 0 {
        p / (2.0 - p)
    } else {
        2.0 * p * (1.0 - p).powf(n as f64) / (2.0 - p)
    }
}

fn decay_factor(t0_s: f64, t1_s: f64) -> f64 {
    (-2.0 * t0_s / t1_s).exp()
}

/// ⟨exp(−2·n_dif·T₀/T₁)⟩ in closed form.
pub fn decay_expectation(p: f64, t0_s: f64, t1_s: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(argument(format!("p must lie in (0, 1], got {p}")));
    }
    let q = decay_factor(t0_s, t1_s);
    if q == 1.0 {
        return Ok(1.0);
    }
    let w = 1.0 - p;
    Ok(p / (2.0 - p) + 2.0 * p * w * q / ((2.0 - p) * (1.0 - w * q)))
}

/// Same expectation by summing the pmf until the remaining tail is below
/// 1e-12 of the running total.
pub fn decay_expectation_by_summation(p: f64, t0_s: f64, t1_s: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(argument(format!("p must lie in (0, 1], got {p}")));
    }
    let q = decay_factor(t0_s, t1_s);
    let ratio = (1.0 - p) * q;
    let mut total = ndif_pmf(p, 0);
    let mut compensation = 0.0;
    let mut n = 1u64;
    loop {
        let term = ndif_pmf(p, n) * q.powf(n as f64);
        // Kahan summation; the remaining tail is term·ratio/(1−ratio)
        let y = term - compensation;
        let t = total + y;
        compensation = (t - total) - y;
        total = t;
        if ratio == 0.0 || term * ratio / (1.0 - ratio) <= 1e-12 * total {
            break;
        }
        n += 1;
    }
    Ok(total)
}

/// Mean swap success ⟨p_s⟩ of the two-link repeater.
pub fn swap_probability(hw: &HardwareParams, p: f64, t0_s: f64) -> Result<f64> {
    Ok(swap_prefactor(hw) * decay_expectation(p, t0_s, hw.t1_s)?)
}

/// ½η_d²η_st⁴η_r²η_QND⁴, the swap probability without memory decay.
pub fn swap_prefactor(hw: &HardwareParams) -> f64 {
    0.5 * hw.eta_det.powi(2) * hw.eta_store.powi(4) * hw.eta_retrieve.powi(2) * hw.eta_qnd.powi(4)
}

/// E[min(n_a, n_b)] for independent geometric(p) counts starting at 1.
pub fn expected_n_min(p: f64) -> f64 {
    let w = 1.0 - p;
    1.0 / (1.0 - w * w)
}

/// E[max(n_a, n_b)], from E[min] + E[max] = 2/p.
pub fn expected_n_max(p: f64) -> f64 {
    2.0 / p - expected_n_min(p)
}

/// Two-link repeater timing band and the resulting teleportation rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepeaterRate {
    pub n_min: f64,
    pub n_max: f64,
    pub swap_probability: f64,
    /// Lower and upper bound on the mean entanglement distribution time.
    pub time_lower_s: f64,
    pub time_upper_s: f64,
    /// Repeater rate bounds, /s: `1/time_upper_s`, `1/time_lower_s`, and the
    /// reciprocal of the mean of the two time bounds.
    pub rate_lower: f64,
    pub rate_upper: f64,
    pub rate_mid: f64,
    /// End-to-end teleportation rate built on `rate_mid`, /s.
    pub teleportation_rate: f64,
}

pub fn repeater_rate_bounds(hw: &HardwareParams, p: f64, comms: &ClassicalComms) -> Result<RepeaterRate> {
    if p == 0.0 {
        return Err(Error::DegenerateRate);
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(argument(format!("p must lie in (0, 1], got {p}")));
    }
    let t0 = hw.attempt_period_s();
    let ps = swap_probability(hw, p, t0)?;
    let (n_min, n_max) = (expected_n_min(p), expected_n_max(p));
    let time_lower_s = t0 * n_min / ps;
    let time_upper_s = t0 * n_max / ps;
    let rate_mid = 2.0 / (time_lower_s + time_upper_s);
    let teleportation_rate = rate_mid
        * hw.eta_retrieve.powi(2)
        * bsm_probability(hw, false)
        * hw.memory_decay(comms.dt0_s()).powi(2)
        * hw.memory_decay(comms.dt1_s())
        * hw.multiplex();
    Ok(RepeaterRate {
        n_min,
        n_max,
        swap_probability: ps,
        time_lower_s,
        time_upper_s,
        rate_lower: 1.0 / time_upper_s,
        rate_upper: 1.0 / time_lower_s,
        rate_mid,
        teleportation_rate,
    })
}

/// Accumulation time for `n_events` at `rate_per_s`.
pub fn time_for_events(rate_per_s: f64, n_events: u64) -> Result<f64> {
    if n_events == 0 {
        return Ok(0.0);
    }
    if !(rate_per_s > 0.0) {
        return Err(Error::InfeasibleRate);
    }
    Ok(n_events as f64 / rate_per_s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QkdProtocol {
    /// Decoy-state weak coherent pulses.
    DecoyWcp,
    /// Entangled-pair or single-photon source.
    EpsOrSps,
}

impl QkdProtocol {
    pub fn required_detections(self) -> f64 {
        match self {
            QkdProtocol::DecoyWcp => 1e5,
            QkdProtocol::EpsOrSps => 1e4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QkdProtocol::DecoyWcp => "wcp",
            QkdProtocol::EpsOrSps => "eps",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "wcp" | "decoy" | "decoy_wcp" => Some(QkdProtocol::DecoyWcp),
            "eps" | "sps" | "eps_or_sps" => Some(QkdProtocol::EpsOrSps),
            _ => None,
        }
    }
}

/// Noise-free time to collect the detections a QKD key needs over
/// `total_link_db` of end-to-end loss.
pub fn qkd_time_required(total_link_db: f64, protocol: QkdProtocol, hw: &HardwareParams) -> f64 {
    protocol.required_detections() / (hw.rep_rate_hz * hw.multiplex() * db_to_probability(total_link_db))
}

/// Orbit classes with their assumed contact window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitClass {
    Leo,
    Meo,
    Geo,
}

impl OrbitClass {
    pub const ALL: [OrbitClass; 3] = [OrbitClass::Leo, OrbitClass::Meo, OrbitClass::Geo];

    pub fn window_s(self) -> f64 {
        match self {
            OrbitClass::Leo => 120.0,
            OrbitClass::Meo => 20.0 * 60.0,
            OrbitClass::Geo => 3600.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OrbitClass::Leo => "leo",
            OrbitClass::Meo => "meo",
            OrbitClass::Geo => "geo",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == s)
    }
}

pub fn qkd_feasible(required_s: f64, orbit: OrbitClass) -> bool {
    required_s <= orbit.window_s()
}
