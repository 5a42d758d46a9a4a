use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qlink_core::constants::{DefaultParams, Wavelength};
use qlink_core::link_budget::LinkKind;
use qlink_core::rates::{OrbitClass, QkdProtocol, SchemeKind};
use qlink_core::scenario::{Scenario, DEMO_EVENTS};

#[derive(Debug, Parser)]
#[command(name = "qlink", version, about = "Free-space quantum link budgets, teleportation rates and QKD feasibility")]
pub struct Cli {
    /// Output format; json is machine-readable for every command.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    /// Operating wavelength in nm (785 or 1550). Defaults to 785 nm, except
    /// `static-table`, which lists both when it is not given.
    #[arg(long, global = true, value_parser = parse_wavelength, value_name = "NM")]
    pub wavelength: Option<Wavelength>,

    #[command(flatten)]
    pub overrides: Overrides,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Attenuation breakdown of one link.
    Budget(BudgetArgs),
    /// Teleportation rate of one scheme over a symmetric double link.
    Rate(RateArgs),
    /// Run a scenario file and write the sweep as CSV (or JSON with --format json).
    Sweep(SweepArgs),
    /// Time needed to collect the QKD detections, and whether it fits a pass.
    Qkd(QkdArgs),
    /// Minimum apertures for every platform pairing, far end overhead.
    StaticTable(StaticTableArgs),
    /// Pass-averaged losses for every platform pairing.
    DynamicTable(DynamicTableArgs),
    /// GEO teleportation headline numbers (fixed configuration, ignores overrides).
    Headline,
    /// Monte Carlo check of every closed form.
    Validate(ValidateArgs),
    /// Print the parameter table after overrides.
    Defaults,
}

/// Overrides for the default parameter table, one per field.
#[derive(Debug, Clone, Default, Args)]
#[command(next_help_heading = "Parameter overrides")]
pub struct Overrides {
    /// Source repetition rate.
    #[arg(long, global = true, alias = "rep_rate_hz", value_name = "HZ")]
    pub rep_rate_hz: Option<f64>,
    /// Single-photon source efficiency.
    #[arg(long, global = true, alias = "eta_sps", value_name = "ETA")]
    pub eta_sps: Option<f64>,
    /// Detector efficiency.
    #[arg(long, global = true, alias = "eta_det", value_name = "ETA")]
    pub eta_det: Option<f64>,
    /// Combined storage times retrieval efficiency.
    #[arg(long, global = true, alias = "eta_mem", value_name = "ETA")]
    pub eta_mem: Option<f64>,
    /// QND measurement efficiency.
    #[arg(long, global = true, alias = "eta_qnd", value_name = "ETA")]
    pub eta_qnd: Option<f64>,
    /// Memory lifetime.
    #[arg(long, global = true, alias = "t1_s", value_name = "S")]
    pub t1_s: Option<f64>,
    /// Transmitter optics transmittance.
    #[arg(long, global = true, alias = "trans_tx", value_name = "T")]
    pub trans_tx: Option<f64>,
    /// Receiver optics transmittance.
    #[arg(long, global = true, alias = "trans_rx", value_name = "T")]
    pub trans_rx: Option<f64>,
    /// Pointing loss fraction, ground links.
    #[arg(long, global = true, alias = "pointing_loss", value_name = "L")]
    pub pointing_loss: Option<f64>,
    /// Pointing loss fraction, intersatellite links.
    #[arg(long, global = true, alias = "pointing_loss_intersatellite", value_name = "L")]
    pub pointing_loss_intersatellite: Option<f64>,
    /// Additional optical loss.
    #[arg(long, global = true, alias = "optical_loss_db", value_name = "DB")]
    pub optical_loss_db: Option<f64>,
    /// Vertical atmospheric absorption at the chosen wavelength.
    #[arg(long, global = true, alias = "a_atm_vertical_db", value_name = "DB")]
    pub a_atm_vertical_db: Option<f64>,
    /// Fried parameter for uplink divergence.
    #[arg(long, global = true, alias = "fried_r0_m", value_name = "M")]
    pub fried_r0_m: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, mut p: DefaultParams) -> DefaultParams {
        let set = |field: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *field = v;
            }
        };
        set(&mut p.rep_rate_hz, self.rep_rate_hz);
        set(&mut p.eta_sps, self.eta_sps);
        set(&mut p.eta_det, self.eta_det);
        set(&mut p.eta_mem, self.eta_mem);
        set(&mut p.eta_qnd, self.eta_qnd);
        set(&mut p.t1_s, self.t1_s);
        set(&mut p.trans_tx, self.trans_tx);
        set(&mut p.trans_rx, self.trans_rx);
        set(&mut p.pointing_loss, self.pointing_loss);
        set(&mut p.pointing_loss_intersatellite, self.pointing_loss_intersatellite);
        set(&mut p.optical_loss_db, self.optical_loss_db);
        set(&mut p.a_atm_vertical_db, self.a_atm_vertical_db);
        set(&mut p.fried_r0_m, self.fried_r0_m);
        p
    }

    /// Applies the given overrides on top of a parsed scenario.
    pub fn apply_to_scenario(&self, s: &mut Scenario) {
        let hw = &mut s.hardware;
        let set = |field: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *field = v;
            }
        };
        set(&mut hw.rep_rate_hz, self.rep_rate_hz);
        set(&mut hw.eta_sps, self.eta_sps);
        set(&mut hw.eta_det, self.eta_det);
        set(&mut hw.eta_qnd, self.eta_qnd);
        set(&mut hw.t1_s, self.t1_s);
        if let Some(m) = self.eta_mem {
            hw.eta_store = m.sqrt();
            hw.eta_retrieve = m.sqrt();
        }
        let o = &mut s.optics;
        set(&mut o.trans_tx, self.trans_tx);
        set(&mut o.trans_rx, self.trans_rx);
        set(&mut o.additional_loss_db, self.optical_loss_db);
        if s.link_kind == LinkKind::Intersatellite {
            set(&mut o.pointing_loss, self.pointing_loss_intersatellite);
        } else {
            set(&mut o.pointing_loss, self.pointing_loss);
        }
        set(&mut s.a_atm_vertical_db, self.a_atm_vertical_db);
        set(&mut s.fried_r0_m, self.fried_r0_m);
    }
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// uplink, downlink or intersatellite
    #[arg(long, value_parser = parse_kind)]
    pub kind: LinkKind,
    /// Satellite altitude; the range follows from --elevation-deg.
    #[arg(long, required_unless_present = "range_m")]
    pub altitude_m: Option<f64>,
    #[arg(long, default_value_t = 90.0)]
    pub elevation_deg: f64,
    /// Path length, overhead for ground links.
    #[arg(long, conflicts_with_all = ["altitude_m", "elevation_deg"])]
    pub range_m: Option<f64>,
    #[arg(long)]
    pub tx_aperture_m: f64,
    #[arg(long)]
    pub rx_aperture_m: f64,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    /// memoryless, one_memory_alice, one_memory_bob, two_memory, two_link_repeater
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: SchemeKind,
    /// Loss of the whole double link.
    #[arg(long)]
    pub db: f64,
    /// Loss of one repeater elementary link pair; defaults to --db.
    #[arg(long)]
    pub elementary_db: Option<f64>,
    /// Separation of the two ground stations.
    #[arg(long, default_value_t = 0.0)]
    pub ground_distance_m: f64,
    /// Entangled pair source efficiency.
    #[arg(long)]
    pub eta_eps: f64,
    #[arg(long, default_value_t = 1)]
    pub multiplex: u32,
    #[arg(long, default_value_t = DEMO_EVENTS)]
    pub events: u64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub scenario: PathBuf,
    /// Write here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QkdArgs {
    /// Total link loss.
    #[arg(long)]
    pub db: f64,
    /// wcp or eps
    #[arg(long, value_parser = parse_protocol)]
    pub protocol: QkdProtocol,
    /// Source rate; overrides --rep-rate-hz.
    #[arg(long)]
    pub rate_hz: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub multiplex: u32,
    /// leo, meo or geo; all three when omitted.
    #[arg(long, value_parser = parse_orbit)]
    pub orbit: Option<OrbitClass>,
}

#[derive(Debug, Args)]
pub struct StaticTableArgs {
    #[arg(long, default_value_t = 0.25)]
    pub space_cap_m: f64,
    #[arg(long, default_value_t = 2.0)]
    pub ground_cap_m: f64,
    #[arg(long, default_value_t = 50.0)]
    pub uplink_db: f64,
    #[arg(long, default_value_t = 40.0)]
    pub downlink_db: f64,
    #[arg(long, default_value_t = 40.0)]
    pub intersatellite_db: f64,
}

#[derive(Debug, Args)]
pub struct DynamicTableArgs {
    #[arg(long, default_value_t = 1.0)]
    pub ground_aperture_m: f64,
    #[arg(long, default_value_t = 45.0)]
    pub max_zenith_deg: f64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    /// Allowed deviation in standard errors.
    #[arg(long, default_value_t = 3.0)]
    pub sigma: f64,
}

fn parse_wavelength(s: &str) -> Result<Wavelength, String> {
    s.trim_end_matches("nm")
        .parse::<u32>()
        .ok()
        .and_then(Wavelength::from_nm)
        .ok_or_else(|| format!("expected 785 or 1550, got `{s}`"))
}

fn parse_kind(s: &str) -> Result<LinkKind, String> {
    LinkKind::parse(s).ok_or_else(|| format!("expected uplink, downlink or intersatellite, got `{s}`"))
}

fn parse_scheme(s: &str) -> Result<SchemeKind, String> {
    SchemeKind::parse(s).ok_or_else(|| {
        let names: Vec<_> = SchemeKind::ALL.iter().map(|k| k.name()).collect();
        format!("expected one of {}, got `{s}`", names.join(", "))
    })
}

fn parse_protocol(s: &str) -> Result<QkdProtocol, String> {
    QkdProtocol::parse(s).ok_or_else(|| format!("expected wcp or eps, got `{s}`"))
}

fn parse_orbit(s: &str) -> Result<OrbitClass, String> {
    OrbitClass::parse(s).ok_or_else(|| format!("expected leo, meo or geo, got `{s}`"))
}
