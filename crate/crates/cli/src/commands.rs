use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};

use serde::Serialize;
use serde_json::{json, Value};

use qlink_core::atmosphere::AbsorptionTable;
use qlink_core::constants::{defaults, DefaultParams, Wavelength, CONSTANTS};
use qlink_core::geometry::LinkGeometry;
use qlink_core::link_budget::{attenuation_db, db_to_probability, LinkKind, OpticalChain};
use qlink_core::oracle::{oracle_suite, MIN_ACCEPTANCE_TRIALS};
use qlink_core::rates::{
    qkd_feasible, qkd_time_required, repeater_rate_bounds, teleportation_rate, time_for_events, ClassicalComms,
    HardwareParams, OrbitClass, SchemeKind,
};
use qlink_core::scenario::{
    dynamic_table, geo_teleport_headline, parse_scenario, run_sweep, static_aperture_table, sweep_to_csv,
    sweep_to_json, ApertureCaps, Platform, StaticTargets,
};

use crate::args::{
    BudgetArgs, Cli, Command, DynamicTableArgs, Format, QkdArgs, RateArgs, StaticTableArgs, SweepArgs, ValidateArgs,
};

pub enum Outcome {
    Done,
    ValidationFailed,
}

type CmdResult = Result<Outcome, String>;

pub fn run(cli: &Cli) -> CmdResult {
    let wavelength = cli.wavelength.unwrap_or(Wavelength::Nm785);
    let params = cli.overrides.apply(defaults(wavelength));
    match &cli.command {
        Command::Budget(a) => budget(cli.format, &params, a),
        Command::Rate(a) => rate(cli.format, &params, a),
        Command::Sweep(a) => sweep(cli, a),
        Command::Qkd(a) => qkd(cli.format, &params, a),
        Command::StaticTable(a) => static_table(cli, a),
        Command::DynamicTable(a) => dynamic(cli.format, wavelength, a),
        Command::Headline => headline(cli.format),
        Command::Validate(a) => validate(cli.format, a),
        Command::Defaults => {
            print_defaults(cli.format, &params);
            Ok(Outcome::Done)
        }
    }
}

fn err(e: qlink_core::Error) -> String {
    e.to_string()
}

/// Compact human rendering: six significant digits, exponent outside
/// [1e-3, 1e6), trailing zeros dropped.
fn num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let a = x.abs();
    if (1e-3..1e6).contains(&a) {
        let decimals = (5 - a.log10().floor() as i32).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.5e}");
        let (mant, exp) = s.split_once('e').unwrap_or((&s, "0"));
        let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
        format!("{mant}e{exp}")
    }
}

/// Writes to stdout; a closed pipe (`qlink ... | head`) is not an error.
fn emit(text: &str) {
    let _ = io::stdout().lock().write_all(text.as_bytes());
}

fn print_json<T: Serialize>(v: &T) -> Result<(), String> {
    let s = serde_json::to_string_pretty(v).map_err(|e| e.to_string())?;
    emit(&(s + "\n"));
    Ok(())
}

fn print_pairs(rows: &[(&str, String)]) {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
    emit(&out);
}

fn print_table(header: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(header.to_vec());
    for row in rows {
        line(row.iter().map(String::as_str).collect());
    }
    emit(&out);
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.into()
}

fn absorption(params: &DefaultParams) -> Result<AbsorptionTable, String> {
    AbsorptionTable::default().with_entry(params.wavelength_m, params.a_atm_vertical_db).map_err(err)
}

fn budget(format: Format, params: &DefaultParams, a: &BudgetArgs) -> CmdResult {
    let geometry = match (a.range_m, a.altitude_m) {
        (Some(range), _) => LinkGeometry::zenith(range),
        (None, Some(_)) if a.kind == LinkKind::Intersatellite => {
            return Err("intersatellite links take --range-m".into());
        }
        (None, Some(alt)) => {
            if !(0.0..=90.0).contains(&a.elevation_deg) {
                return Err(format!("elevation must lie in [0, 90] degrees, got {}", a.elevation_deg));
            }
            if !(alt > 0.0) {
                return Err("altitude must be positive".into());
            }
            LinkGeometry::ground_link(alt, a.elevation_deg.to_radians())
        }
        (None, None) => return Err("give --altitude-m or --range-m".into()),
    };
    let chain = OpticalChain::from_defaults(a.kind, params, a.tx_aperture_m, a.rx_aperture_m).map_err(err)?;
    let table = absorption(params)?;
    let b = attenuation_db(a.kind, &chain, params.wavelength_m, &geometry, params.fried_r0_m, &table).map_err(err)?;
    match format {
        Format::Json => print_json(&json!({
            "kind": a.kind,
            "wavelength_m": params.wavelength_m,
            "geometry": geometry,
            "optics": chain,
            "fried_r0_m": params.fried_r0_m,
            "budget": b,
            "transmission_probability": db_to_probability(b.total_db),
        }))?,
        Format::Table => print_pairs(&[
            ("link", a.kind.name().into()),
            ("wavelength_nm", num(params.wavelength_m * 1e9)),
            ("slant_range_km", num(geometry.slant_range_m / 1e3)),
            ("elevation_deg", num(geometry.elevation_rad.to_degrees())),
            ("geometric_db", num(b.geometric_db)),
            ("optics_db", num(b.optics_db)),
            ("atmosphere_db", num(b.atmosphere_db)),
            ("additional_db", num(b.additional_db)),
            ("total_db", num(b.total_db)),
            ("far_field", yes_no(b.far_field_ok)),
            ("clamped", yes_no(b.clamped.any())),
        ]),
    }
    Ok(Outcome::Done)
}

fn rate(format: Format, params: &DefaultParams, a: &RateArgs) -> CmdResult {
    let mut hw = HardwareParams::from_defaults(params, a.eta_eps).map_err(err)?;
    hw.multiplex_factor = a.multiplex;
    hw.validate().map_err(err)?;
    let comms = ClassicalComms::new(a.ground_distance_m).map_err(err)?;
    let p_ave = db_to_probability(a.db);
    let (rate, band) = if a.scheme == SchemeKind::TwoLinkRepeater {
        let p = db_to_probability(a.elementary_db.unwrap_or(a.db)) * hw.eta_eps;
        let r = repeater_rate_bounds(&hw, p, &comms).map_err(err)?;
        (r.teleportation_rate, Some(r))
    } else {
        (teleportation_rate(a.scheme, &hw, p_ave, &comms).map_err(err)?, None)
    };
    let time = time_for_events(rate, a.events).ok();
    match format {
        Format::Json => print_json(&json!({
            "scheme": a.scheme,
            "total_db": a.db,
            "p_ave": p_ave,
            "ground_distance_m": a.ground_distance_m,
            "hardware": hw,
            "rate_per_s": rate,
            "events": a.events,
            "time_for_events_s": time,
            "repeater": band,
        }))?,
        Format::Table => {
            let mut rows =
                vec![("scheme", a.scheme.name().to_string()), ("total_db", num(a.db)), ("rate_per_s", num(rate))];
            let label = format!("time_for_{}_events", a.events);
            let t = time.map(|t| format!("{} s ({} h)", num(t), num(t / 3600.0))).unwrap_or_else(|| "never".into());
            if let Some(r) = band {
                rows.push(("distribution_time_s", format!("[{}, {}]", num(r.time_lower_s), num(r.time_upper_s))));
            }
            rows.push((&label, t));
            print_pairs(&rows);
        }
    }
    Ok(Outcome::Done)
}

fn sweep(cli: &Cli, a: &SweepArgs) -> CmdResult {
    let text = fs::read_to_string(&a.scenario).map_err(|e| format!("{}: {e}", a.scenario.display()))?;
    let mut scenario = parse_scenario(&text).map_err(err)?;
    if let Some(w) = cli.wavelength {
        scenario.wavelength_m = w.meters();
        scenario.a_atm_vertical_db = w.vertical_absorption_db();
    }
    cli.overrides.apply_to_scenario(&mut scenario);
    let result = run_sweep(&scenario).map_err(err)?;
    let body = match cli.format {
        Format::Json => sweep_to_json(&result).map_err(err)? + "\n",
        Format::Table => sweep_to_csv(&result).map_err(err)?,
    };
    match &a.output {
        Some(path) => fs::write(path, body).map_err(|e| format!("{}: {e}", path.display()))?,
        None => emit(&body),
    }
    Ok(Outcome::Done)
}

fn qkd(format: Format, params: &DefaultParams, a: &QkdArgs) -> CmdResult {
    let mut hw = HardwareParams::from_defaults(params, 1.0).map_err(err)?;
    if let Some(r) = a.rate_hz {
        hw.rep_rate_hz = r;
    }
    hw.multiplex_factor = a.multiplex;
    hw.validate().map_err(err)?;
    if !a.db.is_finite() {
        return Err("--db must be finite".into());
    }
    let required = qkd_time_required(a.db, a.protocol, &hw);
    let orbits: Vec<OrbitClass> = match a.orbit {
        Some(o) => vec![o],
        None => OrbitClass::ALL.to_vec(),
    };
    let verdicts: Vec<(OrbitClass, bool)> = orbits.iter().map(|&o| (o, qkd_feasible(required, o))).collect();
    match format {
        Format::Json => print_json(&json!({
            "protocol": a.protocol,
            "total_db": a.db,
            "rep_rate_hz": hw.rep_rate_hz,
            "multiplex_factor": hw.multiplex_factor,
            "required_detections": a.protocol.required_detections(),
            "time_required_s": required,
            "orbits": verdicts.iter().map(|(o, ok)| json!({
                "orbit": o, "window_s": o.window_s(), "feasible": ok,
            })).collect::<Vec<Value>>(),
        }))?,
        Format::Table => {
            let mut rows = vec![
                ("protocol", a.protocol.name().to_string()),
                ("total_db", num(a.db)),
                ("time_required_s", num(required)),
            ];
            let labels: Vec<String> = verdicts.iter().map(|(o, _)| format!("{}_window", o.name())).collect();
            for ((o, ok), label) in verdicts.iter().zip(&labels) {
                let v = format!("{} s, {}", num(o.window_s()), if *ok { "feasible" } else { "infeasible" });
                rows.push((label.as_str(), v));
            }
            print_pairs(&rows);
        }
    }
    Ok(Outcome::Done)
}

fn static_table(cli: &Cli, a: &StaticTableArgs) -> CmdResult {
    let wavelengths: Vec<Wavelength> = match cli.wavelength {
        Some(w) => vec![w],
        None => vec![Wavelength::Nm785, Wavelength::Nm1550],
    };
    let caps = ApertureCaps { space_m: a.space_cap_m, ground_m: a.ground_cap_m, ..ApertureCaps::default() };
    let targets =
        StaticTargets { uplink_db: a.uplink_db, downlink_db: a.downlink_db, intersatellite_db: a.intersatellite_db };
    let cells = static_aperture_table(&Platform::ALL, &LinkKind::ALL, &wavelengths, &caps, &targets).map_err(err)?;
    match cli.format {
        Format::Json => print_json(&cells)?,
        Format::Table => {
            let rows: Vec<Vec<String>> = cells
                .iter()
                .map(|c| {
                    vec![
                        c.kind.name().into(),
                        c.tx.name().into(),
                        c.rx.name().into(),
                        c.wavelength_nm.to_string(),
                        num(c.range_m / 1e3),
                        num(c.target_db),
                        num(c.fixed_aperture_m),
                        c.min_aperture_m.map(num).unwrap_or_else(|| "-".into()),
                        num(c.best_db),
                    ]
                })
                .collect();
            print_table(
                &["link", "tx", "rx", "nm", "range_km", "target_db", "fixed_m", "min_aperture_m", "best_db"],
                &rows,
            );
        }
    }
    Ok(Outcome::Done)
}

fn dynamic(format: Format, wavelength: Wavelength, a: &DynamicTableArgs) -> CmdResult {
    let rows = dynamic_table(wavelength, a.ground_aperture_m, a.max_zenith_deg.to_radians()).map_err(err)?;
    match format {
        Format::Json => print_json(&rows)?,
        Format::Table => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.kind.name().into(),
                        r.tx.name().into(),
                        r.rx.name().into(),
                        num(r.tx_aperture_m),
                        num(r.rx_aperture_m),
                        num(r.coverage_rad.to_degrees()),
                        r.duration_s.map(|d| num(d / 60.0)).unwrap_or_else(|| "-".into()),
                        num(r.zenith_db),
                        num(r.endpoint_db),
                        num(r.mean_db),
                    ]
                })
                .collect();
            print_table(
                &["link", "tx", "rx", "tx_m", "rx_m", "coverage_deg", "pass_min", "zenith_db", "edge_db", "mean_db"],
                &cells,
            );
        }
    }
    Ok(Outcome::Done)
}

fn headline(format: Format) -> CmdResult {
    let h = geo_teleport_headline().map_err(err)?;
    match format {
        Format::Json => print_json(&h)?,
        Format::Table => {
            let mut rows = vec![
                ("altitude_km", num(h.altitude_m / 1e3)),
                ("wavelength_nm", num(h.wavelength_m * 1e9)),
                ("per_link_db", num(h.per_link_db)),
                ("total_db", num(h.total_db)),
                ("rate_per_s", num(h.rate_per_s)),
                ("time_1000_events_h", num(h.time_for_1000_events_s / 3600.0)),
            ];
            let labels: Vec<String> = h.deterministic_sps.iter().map(|v| format!("sps_eta_{}", v.eta_sps)).collect();
            for (v, label) in h.deterministic_sps.iter().zip(&labels) {
                let text = format!(
                    "{}/s, 1000 events in {} h, {}x faster",
                    num(v.rate_per_s),
                    num(v.time_for_1000_events_s / 3600.0),
                    num(v.ratio)
                );
                rows.push((label.as_str(), text));
            }
            print_pairs(&rows);
        }
    }
    Ok(Outcome::Done)
}

fn validate(format: Format, a: &ValidateArgs) -> CmdResult {
    if a.trials < MIN_ACCEPTANCE_TRIALS {
        return Err(format!("--trials must be at least {MIN_ACCEPTANCE_TRIALS}"));
    }
    if !(a.sigma > 0.0) {
        return Err("--sigma must be positive".into());
    }
    let checks = oracle_suite(a.seed, a.trials, a.sigma).map_err(err)?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    match format {
        Format::Json => print_json(&json!({
            "seed": a.seed,
            "trials": a.trials,
            "sigma": a.sigma,
            "checks": checks,
            "failed": failed,
        }))?,
        Format::Table => {
            let rows: Vec<Vec<String>> = checks
                .iter()
                .map(|c| {
                    let expected = if c.expected_low == c.expected_high {
                        num(c.expected_low)
                    } else {
                        format!("[{}, {}]", num(c.expected_low), num(c.expected_high))
                    };
                    vec![
                        if c.pass { "PASS" } else { "FAIL" }.into(),
                        c.name.clone(),
                        expected,
                        format!("{} ± {}", num(c.estimate.mean), num(c.estimate.stderr)),
                        format!("{:.2}σ", c.sigmas),
                    ]
                })
                .collect();
            print_table(&["", "check", "expected", "estimate", "off"], &rows);
            emit(&format!(
                "{}/{} checks pass (seed {}, {} trials)\n",
                checks.len() - failed,
                checks.len(),
                a.seed,
                a.trials
            ));
        }
    }
    Ok(if failed == 0 { Outcome::Done } else { Outcome::ValidationFailed })
}

fn print_defaults(format: Format, p: &DefaultParams) {
    match format {
        Format::Json => {
            let _ = print_json(&json!({ "constants": CONSTANTS, "parameters": p }));
        }
        Format::Table => print_pairs(&[
            ("earth_radius_m", num(CONSTANTS.earth_radius_m)),
            ("earth_mu_m3s2", num(CONSTANTS.earth_mu_m3s2)),
            ("light_speed_ms", num(CONSTANTS.light_speed_ms)),
            ("wavelength_m", num(p.wavelength_m)),
            ("rep_rate_hz", num(p.rep_rate_hz)),
            ("eta_sps", num(p.eta_sps)),
            ("eta_det", num(p.eta_det)),
            ("eta_mem", num(p.eta_mem)),
            ("eta_qnd", num(p.eta_qnd)),
            ("t1_s", num(p.t1_s)),
            ("trans_tx", num(p.trans_tx)),
            ("trans_rx", num(p.trans_rx)),
            ("pointing_loss", num(p.pointing_loss)),
            ("pointing_loss_intersatellite", num(p.pointing_loss_intersatellite)),
            ("optical_loss_db", num(p.optical_loss_db)),
            ("a_atm_vertical_db", num(p.a_atm_vertical_db)),
            ("fried_r0_m", num(p.fried_r0_m)),
            ("hap_altitude_m", format!("{} to {}", num(p.hap_altitude_m.0), num(p.hap_altitude_m.1))),
            ("leo_altitude_m", num(p.leo_altitude_m)),
            ("meo_altitude_m", num(p.meo_altitude_m)),
            ("geo_altitude_m", num(p.geo_altitude_m)),
            ("heo_altitude_m", format!("{} to {}", num(p.heo_altitude_m.0), num(p.heo_altitude_m.1))),
        ]),
    }
}
