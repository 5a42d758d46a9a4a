//! Scenario file format.
//!
//! Line oriented: `[section]` headers, `key = value` pairs, `#` comments and
//! blank lines ignored. Sections are `[scenario]`, `[optics]`, `[hardware]`
//! and `[sweep]`. Unknown sections, unknown keys, and repeated keys are
//! errors. Keys left out fall back to the default parameter table where one
//! exists.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::constants::{defaults, Wavelength};
use crate::error::{Error, Result};
use crate::geometry::{CircularOrbit, EllipticalOrbit, Orbit};
use crate::link_budget::{LinkKind, OpticalChain};
use crate::rates::HardwareParams;

use super::{Scenario, ScenarioMode, SweepSpec, SweepVariable};

const SECTIONS: [(&str, &[&str]); 4] = [
    (
        "scenario",
        &[
            "name",
            "mode",
            "link_kind",
            "altitude_m",
            "perigee_alt_m",
            "apogee_alt_m",
            "wavelength_m",
            "a_atm_vertical_db",
            "fried_r0_m",
            "ground_distance_m",
        ],
    ),
    ("optics", &["tx_aperture_m", "rx_aperture_m", "trans_tx", "trans_rx", "pointing_loss", "additional_loss_db"]),
    (
        "hardware",
        &[
            "rep_rate_hz",
            "eta_eps",
            "eta_sps",
            "eta_det",
            "eta_store",
            "eta_retrieve",
            "eta_qnd",
            "t1_s",
            "multiplex_factor",
        ],
    ),
    ("sweep", &["variable", "start", "stop", "steps"]),
];

struct Entry {
    value: String,
    line: usize,
}

struct Parsed {
    entries: HashMap<(&'static str, &'static str), Entry>,
    /// Line of each section header, for error messages about missing keys.
    headers: HashMap<&'static str, usize>,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn tokenize(text: &str) -> Result<Parsed> {
    let mut entries = HashMap::new();
    let mut headers = HashMap::new();
    let mut section: Option<(&'static str, &'static [&'static str])> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            let found = SECTIONS
                .iter()
                .find(|(s, _)| *s == name)
                .ok_or_else(|| err(line, format!("unknown section [{name}]")))?;
            if headers.insert(found.0, line).is_some() {
                return Err(err(line, format!("section [{name}] repeated")));
            }
            section = Some(*found);
            continue;
        }
        let (key, value) =
            content.split_once('=').ok_or_else(|| err(line, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let (sec, keys) = section.ok_or_else(|| err(line, "key outside of any section"))?;
        let key =
            keys.iter().find(|k| **k == key).ok_or_else(|| err(line, format!("unknown key `{key}` in [{sec}]")))?;
        if value.is_empty() {
            return Err(err(line, format!("`{key}` has no value")));
        }
        if entries.insert((sec, *key), Entry { value: value.to_string(), line }).is_some() {
            return Err(err(line, format!("`{key}` repeated in [{sec}]")));
        }
    }
    Ok(Parsed { entries, headers })
}

impl Parsed {
    fn raw(&self, sec: &'static str, key: &'static str) -> Option<&Entry> {
        self.entries.get(&(sec, key))
    }

    fn header_line(&self, sec: &str) -> usize {
        self.headers.get(sec).copied().unwrap_or(0)
    }

    fn string(&self, sec: &'static str, key: &'static str) -> Result<&str> {
        self.raw(sec, key)
            .map(|e| e.value.as_str())
            .ok_or_else(|| err(self.header_line(sec), format!("missing required key `{key}` in [{sec}]")))
    }

    fn number_opt(&self, sec: &'static str, key: &'static str) -> Result<Option<f64>> {
        match self.raw(sec, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or_else(|| err(e.line, format!("`{key}` is not a finite number: `{}`", e.value))),
        }
    }

    fn number(&self, sec: &'static str, key: &'static str) -> Result<f64> {
        self.number_opt(sec, key)?
            .ok_or_else(|| err(self.header_line(sec), format!("missing required key `{key}` in [{sec}]")))
    }

    fn number_or(&self, sec: &'static str, key: &'static str, fallback: f64) -> Result<f64> {
        Ok(self.number_opt(sec, key)?.unwrap_or(fallback))
    }

    fn integer_opt(&self, sec: &'static str, key: &'static str) -> Result<Option<u64>> {
        match self.raw(sec, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<u64>()
                .map(Some)
                .map_err(|_| err(e.line, format!("`{key}` is not a non-negative integer: `{}`", e.value))),
        }
    }

    fn line_of(&self, sec: &'static str, key: &'static str) -> usize {
        self.raw(sec, key).map(|e| e.line).unwrap_or_else(|| self.header_line(sec))
    }
}

fn wavelength_table_entry(wavelength_m: f64) -> Option<Wavelength> {
    [Wavelength::Nm785, Wavelength::Nm1550]
        .into_iter()
        .find(|w| (w.meters() - wavelength_m).abs() <= 1e-9 * wavelength_m)
}

/// Parses and validates a scenario file.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let p = tokenize(text)?;
    let at = |sec, key, e: Error| match e {
        Error::Argument(m) => err(p.line_of(sec, key), m),
        other => other,
    };

    let name = p.string("scenario", "name")?.to_string();
    let mode = match p.string("scenario", "mode")? {
        "teleportation" => ScenarioMode::Teleportation,
        "qkd" => ScenarioMode::Qkd,
        other => return Err(err(p.line_of("scenario", "mode"), format!("unknown mode `{other}`"))),
    };
    let kind_text = p.string("scenario", "link_kind")?;
    let link_kind = LinkKind::parse(kind_text)
        .ok_or_else(|| err(p.line_of("scenario", "link_kind"), format!("unknown link kind `{kind_text}`")))?;

    let orbit = match (
        p.number_opt("scenario", "altitude_m")?,
        p.number_opt("scenario", "perigee_alt_m")?,
        p.number_opt("scenario", "apogee_alt_m")?,
    ) {
        (Some(h), None, None) => Orbit::Circular(CircularOrbit::new(h).map_err(|e| at("scenario", "altitude_m", e))?),
        (None, Some(lo), Some(hi)) => {
            Orbit::Elliptical(EllipticalOrbit::new(lo, hi).map_err(|e| at("scenario", "perigee_alt_m", e))?)
        }
        _ => {
            return Err(err(
                p.header_line("scenario"),
                "give either `altitude_m` or both `perigee_alt_m` and `apogee_alt_m`",
            ))
        }
    };

    let wavelength_m = p.number_or("scenario", "wavelength_m", Wavelength::Nm785.meters())?;
    let table_entry = wavelength_table_entry(wavelength_m);
    let params = defaults(table_entry.unwrap_or(Wavelength::Nm785));
    let a_atm_vertical_db = match (p.number_opt("scenario", "a_atm_vertical_db")?, table_entry) {
        (Some(v), _) => v,
        (None, Some(w)) => w.vertical_absorption_db(),
        (None, None) if link_kind == LinkKind::Intersatellite => 0.0,
        (None, None) => {
            return Err(err(
                p.line_of("scenario", "wavelength_m"),
                "`a_atm_vertical_db` is required for wavelengths outside the table",
            ))
        }
    };

    let optics = OpticalChain::new(
        p.number("optics", "tx_aperture_m")?,
        p.number("optics", "rx_aperture_m")?,
        p.number_or("optics", "trans_tx", params.trans_tx)?,
        p.number_or("optics", "trans_rx", params.trans_rx)?,
        p.number_or("optics", "pointing_loss", link_kind.default_pointing_loss(&params))?,
        p.number_or("optics", "additional_loss_db", params.optical_loss_db)?,
    )
    .map_err(|e| at("optics", "tx_aperture_m", e))?;

    let multiplex = p.integer_opt("hardware", "multiplex_factor")?.unwrap_or(1);
    let hardware = HardwareParams {
        rep_rate_hz: p.number_or("hardware", "rep_rate_hz", params.rep_rate_hz)?,
        eta_eps: p.number("hardware", "eta_eps")?,
        eta_sps: p.number_or("hardware", "eta_sps", params.eta_sps)?,
        eta_det: p.number_or("hardware", "eta_det", params.eta_det)?,
        eta_store: p.number_or("hardware", "eta_store", params.eta_store())?,
        eta_retrieve: p.number_or("hardware", "eta_retrieve", params.eta_retrieve())?,
        eta_qnd: p.number_or("hardware", "eta_qnd", params.eta_qnd)?,
        t1_s: p.number_or("hardware", "t1_s", params.t1_s)?,
        multiplex_factor: u32::try_from(multiplex)
            .map_err(|_| err(p.line_of("hardware", "multiplex_factor"), "multiplex_factor too large"))?,
    };
    hardware.validate().map_err(|e| at("hardware", "eta_eps", e))?;

    let var_text = p.string("sweep", "variable")?;
    let variable = SweepVariable::parse(var_text)
        .ok_or_else(|| err(p.line_of("sweep", "variable"), format!("unknown sweep variable `{var_text}`")))?;
    let steps = p
        .integer_opt("sweep", "steps")?
        .ok_or_else(|| err(p.header_line("sweep"), "missing required key `steps` in [sweep]"))?;
    let sweep = SweepSpec {
        variable,
        start: p.number("sweep", "start")?,
        stop: p.number("sweep", "stop")?,
        steps: steps as usize,
    };

    let scenario = Scenario {
        name,
        mode,
        link_kind,
        orbit,
        wavelength_m,
        a_atm_vertical_db,
        fried_r0_m: p.number_or("scenario", "fried_r0_m", params.fried_r0_m)?,
        ground_distance_m: p.number_or("scenario", "ground_distance_m", 0.0)?,
        optics,
        hardware,
        sweep,
    };
    scenario.validate().map_err(|e| at("sweep", "steps", e))?;
    Ok(scenario)
}

/// Writes a scenario with every key spelled out; parsing the result gives
/// back an equal scenario.
pub fn render_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("[scenario]\nname", s.name.clone());
    kv("mode", s.mode.name().into());
    kv("link_kind", s.link_kind.name().into());
    match s.orbit {
        Orbit::Circular(o) => kv("altitude_m", o.altitude_m.to_string()),
        Orbit::Elliptical(o) => {
            kv("perigee_alt_m", o.perigee_alt_m.to_string());
            kv("apogee_alt_m", o.apogee_alt_m.to_string());
        }
    }
    kv("wavelength_m", s.wavelength_m.to_string());
    kv("a_atm_vertical_db", s.a_atm_vertical_db.to_string());
    kv("fried_r0_m", s.fried_r0_m.to_string());
    kv("ground_distance_m", s.ground_distance_m.to_string());
    let o = &s.optics;
    kv("\n[optics]\ntx_aperture_m", o.tx_aperture_m.to_string());
    kv("rx_aperture_m", o.rx_aperture_m.to_string());
    kv("trans_tx", o.trans_tx.to_string());
    kv("trans_rx", o.trans_rx.to_string());
    kv("pointing_loss", o.pointing_loss.to_string());
    kv("additional_loss_db", o.additional_loss_db.to_string());
    let h = &s.hardware;
    kv("\n[hardware]\nrep_rate_hz", h.rep_rate_hz.to_string());
    kv("eta_eps", h.eta_eps.to_string());
    kv("eta_sps", h.eta_sps.to_string());
    kv("eta_det", h.eta_det.to_string());
    kv("eta_store", h.eta_store.to_string());
    kv("eta_retrieve", h.eta_retrieve.to_string());
    kv("eta_qnd", h.eta_qnd.to_string());
    kv("t1_s", h.t1_s.to_string());
    kv("multiplex_factor", h.multiplex_factor.to_string());
    kv("\n[sweep]\nvariable", s.sweep.variable.name().into());
    kv("start", s.sweep.start.to_string());
    kv("stop", s.sweep.stop.to_string());
    kv("steps", s.sweep.steps.to_string());
    out
}
