//! CSV and JSON writers for sweep results.
//!
//! Both carry every row with the resolved parameters alongside, so a row can
//! be recomputed on its own. Floats are written in shortest round-trip form;
//! missing values are empty CSV fields and JSON nulls.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::Orbit;

use super::{Scenario, SweepResult, SweepRow};

/// CSV header, in output order.
pub const CSV_COLUMNS: [&str; 49] = [
    "scenario_name",
    "mode",
    "link_kind",
    "sweep_variable",
    "sweep_value",
    "elevation_deg",
    "ground_distance_m",
    "slant_range_m",
    "link_db",
    "total_db",
    "p_ave",
    "rate_memoryless",
    "rate_one_memory_alice",
    "rate_one_memory_bob",
    "rate_two_memory",
    "rate_two_link_repeater",
    "t1000_memoryless_s",
    "t1000_one_memory_alice_s",
    "t1000_one_memory_bob_s",
    "t1000_two_memory_s",
    "t1000_two_link_repeater_s",
    "qkd_time_wcp_s",
    "qkd_time_eps_s",
    "qkd_window_s",
    "qkd_feasible_wcp",
    "qkd_feasible_eps",
    "infeasible_horizon",
    "low_elevation_shaded",
    "clamped",
    "perigee_alt_m",
    "apogee_alt_m",
    "wavelength_m",
    "a_atm_vertical_db",
    "fried_r0_m",
    "tx_aperture_m",
    "rx_aperture_m",
    "trans_tx",
    "trans_rx",
    "pointing_loss",
    "additional_loss_db",
    "rep_rate_hz",
    "eta_eps",
    "eta_sps",
    "eta_det",
    "eta_store",
    "eta_retrieve",
    "eta_qnd",
    "t1_s",
    "multiplex_factor",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_record(s: &Scenario, row: &SweepRow) -> Vec<String> {
    let rates = row.rates;
    let times = row.time_for_1000_events;
    let qkd = row.qkd;
    let (perigee, apogee) = match s.orbit {
        Orbit::Circular(o) => (o.altitude_m, o.altitude_m),
        Orbit::Elliptical(o) => (o.perigee_alt_m, o.apogee_alt_m),
    };
    let (o, h) = (&s.optics, &s.hardware);
    vec![
        s.name.clone(),
        s.mode.name().into(),
        s.link_kind.name().into(),
        s.sweep.variable.name().into(),
        row.sweep_value.to_string(),
        opt(row.elevation_rad.map(f64::to_degrees)),
        row.ground_distance_m.to_string(),
        opt(row.slant_range_m),
        opt(row.link_db),
        opt(row.total_db),
        opt(row.p_ave),
        opt(rates.map(|r| r.memoryless)),
        opt(rates.map(|r| r.one_memory_alice)),
        opt(rates.map(|r| r.one_memory_bob)),
        opt(rates.map(|r| r.two_memory)),
        opt(rates.map(|r| r.two_link_repeater)),
        opt(times.and_then(|t| t.memoryless)),
        opt(times.and_then(|t| t.one_memory_alice)),
        opt(times.and_then(|t| t.one_memory_bob)),
        opt(times.and_then(|t| t.two_memory)),
        opt(times.and_then(|t| t.two_link_repeater)),
        opt(qkd.map(|q| q.time_wcp_s)),
        opt(qkd.map(|q| q.time_eps_s)),
        opt(qkd.map(|q| q.window_s)),
        opt(qkd.map(|q| q.feasible_wcp)),
        opt(qkd.map(|q| q.feasible_eps)),
        row.flags.infeasible_horizon.to_string(),
        row.flags.low_elevation_shaded.to_string(),
        row.flags.clamped.to_string(),
        perigee.to_string(),
        apogee.to_string(),
        s.wavelength_m.to_string(),
        s.a_atm_vertical_db.to_string(),
        s.fried_r0_m.to_string(),
        o.tx_aperture_m.to_string(),
        o.rx_aperture_m.to_string(),
        o.trans_tx.to_string(),
        o.trans_rx.to_string(),
        o.pointing_loss.to_string(),
        o.additional_loss_db.to_string(),
        h.rep_rate_hz.to_string(),
        h.eta_eps.to_string(),
        h.eta_sps.to_string(),
        h.eta_det.to_string(),
        h.eta_store.to_string(),
        h.eta_retrieve.to_string(),
        h.eta_qnd.to_string(),
        h.t1_s.to_string(),
        h.multiplex_factor.to_string(),
    ]
}

pub fn sweep_to_csv(result: &SweepResult) -> Result<String> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for row in &result.rows {
        w.write_record(csv_record(&result.metadata.parameters, row)).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn sweep_to_json(result: &SweepResult) -> Result<String> {
    let ser = |e: serde_json::Error| Error::Io(e.to_string());
    let params = serde_json::to_value(&result.metadata.parameters).map_err(ser)?;
    let rows = result
        .rows
        .iter()
        .map(|row| {
            let mut v = serde_json::to_value(row).map_err(ser)?;
            if let Value::Object(m) = &mut v {
                m.insert("parameters".into(), params.clone());
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    let doc = json!({ "metadata": result.metadata, "rows": rows });
    serde_json::to_string_pretty(&doc).map_err(ser)
}

#[cfg(test)]
mod tests {
    use super::super::{run_sweep, tests::leo_teleport, SweepVariable};
    use super::*;

    #[test]
    fn csv_has_fixed_columns_and_full_precision() {
        let r = run_sweep(&leo_teleport(SweepVariable::Elevation, 0.0, 90.0, 4)).unwrap();
        let text = sweep_to_csv(&r).unwrap();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), CSV_COLUMNS);
        let recs: Vec<_> = rd.records().map(|r| r.unwrap()).collect();
        assert_eq!(recs.len(), 4);
        for (rec, row) in recs.iter().zip(&r.rows) {
            assert_eq!(rec.len(), CSV_COLUMNS.len());
            let db: f64 = rec[8].parse().unwrap();
            assert_eq!(db, row.link_db.unwrap());
            assert_eq!(&rec[21], "");
        }
    }

    #[test]
    fn json_rows_carry_parameters() {
        let r = run_sweep(&leo_teleport(SweepVariable::TotalDb, 0.0, 100.0, 3)).unwrap();
        let v: Value = serde_json::from_str(&sweep_to_json(&r).unwrap()).unwrap();
        assert_eq!(v["metadata"]["scenario_name"], "leo-teleport");
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2]["parameters"]["hardware"]["eta_eps"], 0.01);
        assert_eq!(rows[1]["total_db"], 50.0);
    }

    #[test]
    fn identical_input_identical_bytes() {
        let s = leo_teleport(SweepVariable::GroundDistance, 0.0, 6e6, 25);
        let (a, b) = (run_sweep(&s).unwrap(), run_sweep(&s).unwrap());
        assert_eq!(sweep_to_csv(&a).unwrap(), sweep_to_csv(&b).unwrap());
        assert_eq!(sweep_to_json(&a).unwrap(), sweep_to_json(&b).unwrap());
    }
}
