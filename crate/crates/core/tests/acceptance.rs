//! Acceptance criteria. Runs without the libtest harness so every verdict
//! line is printed; exits non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use qlink_core::atmosphere::{
    cn2, fried_r0, slant_absorption_db, AbsorptionTable, HvProfile, DEFAULT_TURBULENCE_TOP_M,
};
use qlink_core::constants::{defaults, Wavelength};
use qlink_core::geometry::{
    central_angle_from_elevation, double_link_horizon_distance, elevation_from_central_angle, heo_dwell_above_station,
    min_altitude_for_double_link, slant_range, symmetric_double_link, time_from_perigee, EllipticalOrbit, LinkGeometry,
};
use qlink_core::link_budget::{attenuation_db, LinkKind, OpticalChain};
use qlink_core::oracle::{simulate_ndif, simulate_order_stats, simulate_two_link_repeater, TrialConfig};
use qlink_core::rates::{
    bsm_probability, decay_expectation, decay_expectation_by_summation, expected_n_max, expected_n_min, ndif_pmf,
    qkd_feasible, qkd_time_required, repeater_rate_bounds, swap_probability, teleportation_rate, time_for_events,
    ClassicalComms, HardwareParams, OrbitClass, QkdProtocol, SchemeKind,
};
use qlink_core::scenario::{geo_teleport_headline, run_sweep, SweepVariable, SHADED_ELEVATION_RAD};

const SEED: u64 = 42;
const MC_TRIALS: u64 = 1_000_000;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// Fastest of a few runs, so one scheduler hiccup does not decide a timing check.
fn best_time<T>(mut f: impl FnMut() -> T) -> (T, Duration) {
    let mut out = f();
    let mut best = Duration::MAX;
    for _ in 0..5 {
        let t = Instant::now();
        out = f();
        best = best.min(t.elapsed());
    }
    (out, best)
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn geo_budget() -> f64 {
    let chain = OpticalChain::new(0.5, 2.0, 0.8, 0.8, 0.2, 6.0).unwrap();
    let table = AbsorptionTable::new(vec![(810e-9, 1.0)]).unwrap();
    attenuation_db(LinkKind::Downlink, &chain, 810e-9, &LinkGeometry::zenith(3.6e7), 0.075, &table).unwrap().total_db
}

fn c1_geo_budget() -> Verdict {
    let (db, t) = best_time(geo_budget);
    let ok = (38.0..=41.0).contains(&db) && t < Duration::from_millis(1);
    verdict(ok, format!("{db:.4} dB per link (band [38, 41]), {t:?}"))
}

fn c2_headline() -> Verdict {
    let (r, t) = best_time(|| geo_teleport_headline().unwrap());
    let hours = |s: f64| s / 3600.0;
    let rate_ok = r.rate_per_s >= 0.018 / 2.0 && r.rate_per_s <= 0.018 * 2.0;
    let time_ok = (hours(r.time_for_1000_events_s) / 16.0).log2().abs() <= 1.0;
    let mut parts = vec![format!(
        "rate {:.5}/s vs 0.018, 1000 events in {:.2} h vs ~16 h",
        r.rate_per_s,
        hours(r.time_for_1000_events_s)
    )];
    let mut sps_ok = true;
    for v in &r.deterministic_sps {
        let ratio_ok = v.ratio >= 10.0 * (1.0 - 1e-9) && v.ratio <= 15.0 * (1.0 + 1e-9);
        let t_ok = (hours(v.time_for_1000_events_s) / 1.5).log2().abs() <= 1.0;
        sps_ok &= ratio_ok && t_ok;
        parts.push(format!(
            "SPS {}: ratio {:.3}, {:.2} h vs ~1.5 h",
            v.eta_sps,
            v.ratio,
            hours(v.time_for_1000_events_s)
        ));
    }
    let fast = t < Duration::from_millis(1);
    parts.push(format!("{t:?}"));
    verdict(rate_ok && time_ok && sps_ok && fast, parts.join("; "))
}

fn c3_molniya() -> Verdict {
    let orbit = EllipticalOrbit::new(6.0e5, 4.0e7).unwrap();
    let e = orbit.eccentricity();
    let period_min = 2.0 * time_from_perigee(&orbit, PI).unwrap() / 60.0;
    let ok = (e - 0.74).abs() <= 0.005 && rel(period_min, 718.0) <= 0.02;
    verdict(ok, format!("e = {e:.5} (0.74 ± 0.005), period {period_min:.2} min (718 ± 2%)"))
}

fn c4_min_altitude() -> Verdict {
    let h = min_altitude_for_double_link(4.5e6, FRAC_PI_4).unwrap();
    let ok = rel(h, 4.2e6) <= 0.10;
    verdict(ok, format!("{:.1} km vs 4,200 km ({:.1}% off, limit 10%)", h / 1e3, 100.0 * rel(h, 4.2e6)))
}

fn c5_leo_horizon() -> Verdict {
    // bisection on the feasibility flag itself
    let (mut lo, mut hi) = (0.0, 2.0e7);
    assert!(symmetric_double_link(6e5, lo).feasible && !symmetric_double_link(6e5, hi).feasible);
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if symmetric_double_link(6e5, mid).feasible {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let grazing = double_link_horizon_distance(6e5);
    let consistent = (lo - grazing).abs() <= 1.0;
    let off = rel(lo, 5.0e6);
    verdict(
        off <= 0.05 && consistent,
        format!(
            "transition at {:.1} km vs 5,000 km ({:.2}% off, limit 5%); zero-elevation crossing agrees within {:.3} m",
            lo / 1e3,
            100.0 * off,
            (lo - grazing).abs()
        ),
    )
}

fn c6_heo_dwell() -> Verdict {
    let (dwell, t) = best_time(|| heo_dwell_above_station(&EllipticalOrbit::molniya(), FRAC_PI_4).unwrap());
    let hours = dwell / 3600.0;
    verdict(hours >= 7.0 && t < Duration::from_secs(1), format!("{hours:.3} h within 45° zenith (need ≥ 7 h), {t:?}"))
}

fn c7_fried() -> Verdict {
    let hv = HvProfile::default();
    let r0 = |wl: f64, zen: f64| fried_r0(&hv, wl, zen, 0.0, DEFAULT_TURBULENCE_TOP_M).unwrap();
    let base = r0(785e-9, 0.0);
    let closeness = rel(base, 0.075);
    let mut worst: f64 = 0.0;
    for zen_deg in [10.0f64, 30.0, 45.0, 60.0, 70.0] {
        let z = zen_deg.to_radians();
        worst = worst.max(rel(r0(785e-9, z) / base, z.cos().powf(0.6)));
    }
    for wl in [405e-9, 810e-9, 1064e-9, 1550e-9] {
        worst = worst.max(rel(r0(wl, 0.0) / base, (wl / 785e-9).powf(1.2)));
    }
    verdict(
        closeness <= 0.40 && worst <= 1e-9,
        format!(
            "r0 = {:.3} cm vs 7.5 cm ({:.1}% off, limit 40%); worst scaling-law error {worst:.1e}",
            base * 100.0,
            100.0 * closeness
        ),
    )
}

fn c8_stochastic() -> Verdict {
    let start = Instant::now();
    let mut failures: Vec<String> = Vec::new();
    let ps = [0.9, 0.5, 0.1, 1e-3];
    let ratios = [1e-4, 1e-2, 1.0];
    let t0 = 1e-9;

    // normalisation: direct sum plus the closed-form geometric tail
    for p in [1.0, 0.9, 0.5, 0.1, 1e-3] {
        let n_direct = 200_000u64;
        let mut s: f64 = (0..=n_direct).map(|n| ndif_pmf(p, n)).sum();
        let w: f64 = 1.0 - p;
        if w > 0.0 {
            s += 2.0 * w.powf(n_direct as f64 + 1.0) / (2.0 - p);
        }
        if (s - 1.0).abs() > 1e-12 {
            failures.push(format!("pmf sum at p={p}: {s}"));
        }
    }

    let mut worst_sum: f64 = 0.0;
    for &p in &ps {
        for &r in &ratios {
            let closed = decay_expectation(p, t0, t0 / r).unwrap();
            let summed = decay_expectation_by_summation(p, t0, t0 / r).unwrap();
            worst_sum = worst_sum.max(rel(closed, summed));
        }
    }
    if worst_sum > 1e-10 {
        failures.push(format!("closed form vs summation {worst_sum:.1e}"));
    }

    let mut checks = 0;
    let mut worst_sigma: f64 = 0.0;
    let mut sigma = |what: String, s: f64, failures: &mut Vec<String>| {
        checks += 1;
        worst_sigma = worst_sigma.max(s);
        if s > 3.0 {
            failures.push(format!("{what}: {s:.2}σ"));
        }
    };
    for &p in &ps {
        for &r in &ratios {
            let cfg = TrialConfig::new(MC_TRIALS, SEED, p, t0, t0 / r).unwrap();
            let sample = simulate_ndif(&cfg).unwrap();
            let expected = decay_expectation(p, t0, t0 / r).unwrap();
            sigma(format!("decay p={p} T0/T1={r}"), sample.decay.sigmas_from(expected), &mut failures);
            if r == 1e-2 && (p == 0.5 || p == 0.1) {
                for n in 0..5usize {
                    let s = sample.probability(n).sigmas_from(ndif_pmf(p, n as u64));
                    sigma(format!("pmf p={p} n={n}"), s, &mut failures);
                }
            }
        }
    }
    for p in [0.9, 0.5, 0.1] {
        let o = simulate_order_stats(&TrialConfig::new(MC_TRIALS, SEED, p, t0, 1e-7).unwrap()).unwrap();
        sigma(format!("n_min p={p}"), o.n_min.sigmas_from(expected_n_min(p)), &mut failures);
        sigma(format!("n_max p={p}"), o.n_max.sigmas_from(expected_n_max(p)), &mut failures);
    }

    // repeater band, [lower, upper] widened by 3σ of the estimate
    let base_hw = HardwareParams::from_defaults(&defaults(Wavelength::Nm785), 0.05).unwrap();
    let comms = ClassicalComms::new(0.0).unwrap();
    let mut in_band = 0;
    for p in [0.9, 0.5, 0.1] {
        for r in ratios {
            let hw = HardwareParams { rep_rate_hz: 1.0 / t0, t1_s: t0 / r, ..base_hw };
            let bounds = repeater_rate_bounds(&hw, p, &comms).unwrap();
            let cfg = TrialConfig::new(MC_TRIALS, SEED, p, t0, hw.t1_s).unwrap();
            let sim = simulate_two_link_repeater(&cfg, &hw).unwrap();
            let slack = 3.0 * sim.time_s.stderr;
            if sim.time_s.mean >= bounds.time_lower_s - slack && sim.time_s.mean <= bounds.time_upper_s + slack {
                in_band += 1;
            } else {
                failures.push(format!(
                    "repeater p={p} T0/T1={r}: {:.4e} s outside [{:.4e}, {:.4e}]",
                    sim.time_s.mean, bounds.time_lower_s, bounds.time_upper_s
                ));
            }
        }
    }

    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(60) {
        failures.push(format!("runtime {elapsed:?} over 60 s"));
    }
    let detail = format!(
        "pmf sums to 1e-12; closed vs summed worst {worst_sum:.1e}; {checks} Monte Carlo checks, worst {worst_sigma:.2}σ; \
         repeater ⟨T_r⟩ in band {in_band}/9; seed {SEED}, {MC_TRIALS} trials; {elapsed:.1?}{}",
        if failures.is_empty() { String::new() } else { format!("; failed: {}", failures.join(", ")) }
    );
    verdict(failures.is_empty(), detail)
}

fn c9_qkd() -> Verdict {
    let mut hw = HardwareParams::from_defaults(&defaults(Wavelength::Nm785), 0.5).unwrap();
    let mut ok =
        QkdProtocol::DecoyWcp.required_detections() == 1e5 && QkdProtocol::EpsOrSps.required_detections() == 1e4;
    ok &= OrbitClass::Leo.window_s() == 120.0
        && OrbitClass::Meo.window_s() == 1200.0
        && OrbitClass::Geo.window_s() == 3600.0;
    let zero_db = qkd_time_required(0.0, QkdProtocol::DecoyWcp, &hw);
    ok &= zero_db == 1e-4;
    let mut worst_mux: f64 = 0.0;
    let base: Vec<f64> = (0..=80).map(|db| qkd_time_required(f64::from(db), QkdProtocol::DecoyWcp, &hw)).collect();
    hw.multiplex_factor = 100;
    for (db, t1) in (0..=80).zip(&base) {
        let t100 = qkd_time_required(f64::from(db), QkdProtocol::DecoyWcp, &hw);
        worst_mux = worst_mux.max(rel(t1 / t100, 100.0));
    }
    ok &= worst_mux <= 4.0 * f64::EPSILON;
    ok &= qkd_feasible(120.0, OrbitClass::Leo) && !qkd_feasible(120.000001, OrbitClass::Leo);
    verdict(
        ok,
        format!("N_req 1e5/1e4, windows 120/1200/3600 s, 0 dB WCP at 1 GHz = {zero_db:e} s, multiplex 100× to {worst_mux:.1e}"),
    )
}

type Property = (&'static str, Box<dyn Fn(&mut TestRunner) -> Result<(), String>>);

fn runner() -> TestRunner {
    TestRunner::new_with_rng(
        Config { cases: 256, failure_persistence: None, ..Config::default() },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    )
}

fn close(a: f64, b: f64, tol: f64) -> Result<(), TestCaseError> {
    if rel(a, b) <= tol || a == b {
        Ok(())
    } else {
        Err(TestCaseError::fail(format!("{a} vs {b}")))
    }
}

fn hw_strategy() -> impl Strategy<Value = HardwareParams> {
    let eff = || 0.01f64..=1.0;
    (eff(), eff(), eff(), eff(), eff(), eff(), 1e-4f64..10.0, 1e6f64..1e10, 1u32..1000).prop_map(
        |(eta_eps, eta_sps, eta_det, eta_store, eta_retrieve, eta_qnd, t1_s, rep_rate_hz, multiplex_factor)| {
            HardwareParams {
                rep_rate_hz,
                eta_eps,
                eta_sps,
                eta_det,
                eta_store,
                eta_retrieve,
                eta_qnd,
                t1_s,
                multiplex_factor,
            }
        },
    )
}

fn chain_strategy() -> impl Strategy<Value = OpticalChain> {
    (0.05f64..1.0, 0.05f64..3.0, 0.1f64..=1.0, 0.1f64..=1.0, 0.0f64..0.9, 0.0f64..10.0)
        .prop_map(|(dt, dr, tt, tr, lp, add)| OpticalChain::new(dt, dr, tt, tr, lp, add).unwrap())
}

fn budget(kind: LinkKind, chain: &OpticalChain, h: f64, zen: f64, r0: f64) -> f64 {
    let table = AbsorptionTable::default();
    let g = LinkGeometry {
        slant_range_m: h,
        zenith_angle_rad: zen,
        elevation_rad: FRAC_PI_2 - zen,
        ground_central_angle_rad: 0.0,
    };
    attenuation_db(kind, chain, 785e-9, &g, r0, &table).unwrap().total_db
}

fn run<S: Strategy>(r: &mut TestRunner, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    r.run(&s, f).map_err(|e| e.to_string())
}

fn properties() -> Vec<Property> {
    let kinds = || prop_oneof![Just(LinkKind::Uplink), Just(LinkKind::Downlink), Just(LinkKind::Intersatellite)];
    vec![
        (
            "scheme ratio identities",
            Box::new(|r: &mut TestRunner| {
                run(r, (hw_strategy(), 0.0f64..=1.0, 0.0f64..1e7), |(hw, p, l0)| {
                    let c = ClassicalComms::new(l0).unwrap();
                    let rate = |s| teleportation_rate(s, &hw, p, &c).unwrap();
                    let (ml, alice, bob, two) = (
                        rate(SchemeKind::Memoryless),
                        rate(SchemeKind::OneMemoryAlice),
                        rate(SchemeKind::OneMemoryBob),
                        rate(SchemeKind::TwoMemory),
                    );
                    let m = hw.eta_store * hw.eta_retrieve * hw.eta_qnd;
                    let (d0, d1) = (hw.memory_decay(c.dt0_s()), hw.memory_decay(c.dt1_s()));
                    if p > 0.0 {
                        close(two / bob, m * d0, 1e-12)?;
                        close(bob / ml, m * d0 * d1, 1e-12)?;
                        close(alice / ml, 0.5 * m * d0, 1e-12)?;
                    }
                    prop_assert!(ml >= bob && bob >= two);
                    Ok(())
                })
            }),
        ),
        (
            "rates linear in R_s and multiplex",
            Box::new(|r: &mut TestRunner| {
                run(r, (hw_strategy(), 1e-12f64..=1.0, 0.0f64..1e7, 2u32..50), |(hw, p, l0, k)| {
                    let c = ClassicalComms::new(l0).unwrap();
                    let scaled = HardwareParams {
                        rep_rate_hz: hw.rep_rate_hz * 4.0,
                        multiplex_factor: hw.multiplex_factor * k,
                        ..hw
                    };
                    for s in [
                        SchemeKind::Memoryless,
                        SchemeKind::OneMemoryAlice,
                        SchemeKind::OneMemoryBob,
                        SchemeKind::TwoMemory,
                    ] {
                        let a = teleportation_rate(s, &hw, p, &c).unwrap();
                        let b = teleportation_rate(s, &scaled, p, &c).unwrap();
                        close(b / a, 4.0 * f64::from(k), 1e-12)?;
                    }
                    let a = repeater_rate_bounds(&hw, p.max(1e-6), &c).unwrap().teleportation_rate;
                    let mux = HardwareParams { multiplex_factor: hw.multiplex_factor * k, ..hw };
                    let b = repeater_rate_bounds(&mux, p.max(1e-6), &c).unwrap().teleportation_rate;
                    close(b / a, f64::from(k), 1e-12)
                })
            }),
        ),
        (
            "rates nonincreasing in link dB",
            Box::new(|r: &mut TestRunner| {
                run(r, (hw_strategy(), 0.0f64..150.0, 0.0f64..30.0), |(hw, db, extra)| {
                    let c = ClassicalComms::new(1e6).unwrap();
                    let p = |x: f64| 10f64.powf(-x / 10.0);
                    for s in [
                        SchemeKind::Memoryless,
                        SchemeKind::OneMemoryAlice,
                        SchemeKind::OneMemoryBob,
                        SchemeKind::TwoMemory,
                    ] {
                        prop_assert!(
                            teleportation_rate(s, &hw, p(db + extra), &c).unwrap()
                                <= teleportation_rate(s, &hw, p(db), &c).unwrap()
                        );
                    }
                    prop_assert!(
                        qkd_time_required(db + extra, QkdProtocol::DecoyWcp, &hw)
                            >= qkd_time_required(db, QkdProtocol::DecoyWcp, &hw)
                    );
                    Ok(())
                })
            }),
        ),
        (
            "attenuation monotone in apertures, optics, range, losses",
            Box::new(move |r: &mut TestRunner| {
                run(
                    r,
                    (kinds(), chain_strategy(), 1e4f64..4e7, 0.0f64..1.2, 0.01f64..0.3, 1.0f64..2.0),
                    |(k, c, h, zen, r0, f)| {
                        let base = budget(k, &c, h, zen, r0);
                        let with = |chain: OpticalChain| budget(k, &chain, h, zen, r0);
                        let wider_rx = with(OpticalChain { rx_aperture_m: c.rx_aperture_m * f, ..c });
                        let better_tx = with(OpticalChain { trans_tx: 1.0 - (1.0 - c.trans_tx) / f, ..c });
                        let better_rx = with(OpticalChain { trans_rx: 1.0 - (1.0 - c.trans_rx) / f, ..c });
                        let more_pointing =
                            with(OpticalChain { pointing_loss: 1.0 - (1.0 - c.pointing_loss) / f, ..c });
                        let more_loss = with(OpticalChain { additional_loss_db: c.additional_loss_db * f + 0.1, ..c });
                        prop_assert!(wider_rx <= base && better_tx <= base && better_rx <= base);
                        prop_assert!(budget(k, &c, h * f, zen, r0) >= base);
                        prop_assert!(more_pointing >= base && more_loss >= base);
                        Ok(())
                    },
                )
            }),
        ),
        (
            "downlink minus intersatellite is the slant absorption",
            Box::new(|r: &mut TestRunner| {
                run(r, (chain_strategy(), 1e4f64..4e7, 0.0f64..1.2), |(c, h, zen)| {
                    let table = AbsorptionTable::default();
                    let diff = budget(LinkKind::Downlink, &c, h, zen, 0.075)
                        - budget(LinkKind::Intersatellite, &c, h, zen, 0.075);
                    close(diff, slant_absorption_db(&table, 785e-9, zen).unwrap(), 1e-9)
                })
            }),
        ),
        (
            "halving D_R adds 10·log10(4) unclamped",
            Box::new(move |r: &mut TestRunner| {
                run(r, (kinds(), chain_strategy(), 1e6f64..4e7), |(k, c, h)| {
                    let table = AbsorptionTable::default();
                    let g = LinkGeometry::zenith(h);
                    let a = attenuation_db(k, &c, 785e-9, &g, 0.075, &table).unwrap();
                    let half = OpticalChain { rx_aperture_m: c.rx_aperture_m / 2.0, ..c };
                    let b = attenuation_db(k, &half, 785e-9, &g, 0.075, &table).unwrap();
                    prop_assume!(!a.clamped.geometric);
                    close(b.geometric_db - a.geometric_db, 10.0 * 4f64.log10(), 1e-9)
                })
            }),
        ),
        (
            "uplink with r0 → ∞ is the downlink",
            Box::new(|r: &mut TestRunner| {
                run(r, (chain_strategy(), 1e6f64..4e7, 0.0f64..1.2), |(c, h, zen)| {
                    close(
                        budget(LinkKind::Uplink, &c, h, zen, 1e12),
                        budget(LinkKind::Downlink, &c, h, zen, 0.075),
                        1e-9,
                    )
                })
            }),
        ),
        (
            "elevation ↔ central angle round trip",
            Box::new(|r: &mut TestRunner| {
                run(r, (0.0f64..=FRAC_PI_2, prop_oneof![Just(6e5), Just(2e7), Just(3.6e7)]), |(e, h)| {
                    let back = elevation_from_central_angle(h, central_angle_from_elevation(h, e));
                    prop_assert!((back - e).abs() <= 1e-9);
                    prop_assert_eq!(slant_range(h, FRAC_PI_2), h);
                    Ok(())
                })
            }),
        ),
        (
            "time from perigee strictly increasing",
            Box::new(|r: &mut TestRunner| {
                run(
                    r,
                    (1e5f64..2e6, 1e6f64..5e7, 0.0f64..std::f64::consts::TAU, 1e-6f64..0.003),
                    |(lo, hi, phi, dphi)| {
                        let o = EllipticalOrbit::new(lo, lo + hi).unwrap();
                        prop_assert!(time_from_perigee(&o, phi + dphi).unwrap() > time_from_perigee(&o, phi).unwrap());
                        close(time_from_perigee(&o, 2.0 * PI - 1e-12).unwrap(), o.period_s(), 1e-9)
                    },
                )
            }),
        ),
        (
            "C_n² nonnegative, zenith absorption exact",
            Box::new(|r: &mut TestRunner| {
                run(r, (0.0f64..2e5, 1.0f64..60.0), |(h, wind)| {
                    let hv = HvProfile::new(wind, 1.7e-14).unwrap();
                    prop_assert!(cn2(&hv, h) >= 0.0);
                    let table = AbsorptionTable::default();
                    prop_assert_eq!(slant_absorption_db(&table, 785e-9, 0.0).unwrap(), 1.0);
                    prop_assert_eq!(slant_absorption_db(&table, 1550e-9, 0.0).unwrap(), 0.5);
                    Ok(())
                })
            }),
        ),
        (
            "decay expectation between pmf floor and 1",
            Box::new(|r: &mut TestRunner| {
                run(r, (1e-4f64..=1.0, 1e-6f64..10.0), |(p, ratio)| {
                    let v = decay_expectation(p, 1.0, 1.0 / ratio).unwrap();
                    prop_assert!(v >= ndif_pmf(p, 0) - 1e-15 && v <= 1.0 + 1e-15);
                    prop_assert!(expected_n_min(p) <= 1.0 / p + 1e-12 && 1.0 / p <= expected_n_max(p) + 1e-12);
                    Ok(())
                })
            }),
        ),
        (
            "limit cases",
            Box::new(|r: &mut TestRunner| {
                run(r, (hw_strategy(), 1e-6f64..=1.0), |(hw, p)| {
                    // T₁ → ∞ and L₀ = 0: every memory exponential is exactly 1
                    let forever = HardwareParams { t1_s: f64::INFINITY, ..hw };
                    let far = ClassicalComms::new(5e6).unwrap();
                    let here = ClassicalComms::new(0.0).unwrap();
                    for c in [&far, &here] {
                        let ml = teleportation_rate(SchemeKind::Memoryless, &forever, p, c).unwrap();
                        let bob = teleportation_rate(SchemeKind::OneMemoryBob, &forever, p, c).unwrap();
                        close(bob, ml * hw.eta_store * hw.eta_retrieve * hw.eta_qnd, 1e-15)?;
                    }
                    let ml = teleportation_rate(SchemeKind::Memoryless, &hw, p, &here).unwrap();
                    let bob = teleportation_rate(SchemeKind::OneMemoryBob, &hw, p, &here).unwrap();
                    close(bob, ml * hw.eta_store * hw.eta_retrieve * hw.eta_qnd, 1e-15)?;
                    prop_assert_eq!(decay_expectation(p, 1e-9, f64::INFINITY).unwrap(), 1.0);
                    // p = 1
                    prop_assert_eq!(ndif_pmf(1.0, 0), 1.0);
                    prop_assert_eq!(ndif_pmf(1.0, 3), 0.0);
                    prop_assert_eq!(decay_expectation(1.0, 1e-9, hw.t1_s).unwrap(), 1.0);
                    prop_assert_eq!((expected_n_min(1.0), expected_n_max(1.0)), (1.0, 1.0));
                    let b = repeater_rate_bounds(&hw, 1.0, &here).unwrap();
                    prop_assert_eq!(b.time_lower_s, b.time_upper_s);
                    // efficiencies = 1
                    let ideal = HardwareParams {
                        eta_eps: 1.0,
                        eta_sps: 1.0,
                        eta_det: 1.0,
                        eta_store: 1.0,
                        eta_retrieve: 1.0,
                        eta_qnd: 1.0,
                        ..forever
                    };
                    prop_assert_eq!(bsm_probability(&ideal, false), 0.5);
                    prop_assert_eq!(bsm_probability(&ideal, true), 0.25);
                    prop_assert_eq!(swap_probability(&ideal, p, 1e-9).unwrap(), 0.5);
                    prop_assert!(swap_probability(&hw, p, 1e-9).unwrap() <= 0.5 * hw.eta_det * hw.eta_det);
                    prop_assert_eq!(time_for_events(0.0, 0).unwrap(), 0.0);
                    Ok(())
                })
            }),
        ),
        (
            "sweep flags follow elevation thresholds",
            Box::new(|_r: &mut TestRunner| {
                let d = defaults(Wavelength::Nm785);
                let s = qlink_core::scenario::Scenario {
                    name: "p".into(),
                    mode: qlink_core::scenario::ScenarioMode::Teleportation,
                    link_kind: LinkKind::Downlink,
                    orbit: qlink_core::geometry::Orbit::Circular(
                        qlink_core::geometry::CircularOrbit::new(6e5).unwrap(),
                    ),
                    wavelength_m: d.wavelength_m,
                    a_atm_vertical_db: d.a_atm_vertical_db,
                    fried_r0_m: d.fried_r0_m,
                    ground_distance_m: 0.0,
                    optics: OpticalChain::from_defaults(LinkKind::Downlink, &d, 0.25, 1.0).unwrap(),
                    hardware: HardwareParams::from_defaults(&d, 0.01).unwrap(),
                    sweep: qlink_core::scenario::SweepSpec {
                        variable: SweepVariable::GroundDistance,
                        start: 0.0,
                        stop: 6e6,
                        steps: 241,
                    },
                };
                let a = run_sweep(&s).map_err(|e| e.to_string())?;
                if a != run_sweep(&s).map_err(|e| e.to_string())? {
                    return Err("sweep not deterministic".into());
                }
                for row in &a.rows {
                    let e = row.elevation_rad.unwrap();
                    if row.flags.infeasible_horizon != (e < 0.0)
                        || row.flags.low_elevation_shaded != (0.0..SHADED_ELEVATION_RAD).contains(&e)
                    {
                        return Err(format!("flags wrong at {} m", row.ground_distance_m));
                    }
                }
                Ok(())
            }),
        ),
    ]
}

fn c10_properties() -> Verdict {
    let props = properties();
    let mut failed = Vec::new();
    for (name, check) in &props {
        if let Err(e) = check(&mut runner()) {
            failed.push(format!("{name}: {e}"));
        }
    }
    let total = props.len();
    let detail = if failed.is_empty() {
        format!("{total}/{total} properties hold (256 cases each, fixed seed)")
    } else {
        format!("{}/{total} hold; {}", total - failed.len(), failed.join("; "))
    };
    verdict(failed.is_empty(), detail)
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("GEO link budget", c1_geo_budget),
        ("headline teleportation rate", c2_headline),
        ("Molniya period", c3_molniya),
        ("dual-downlink minimum altitude", c4_min_altitude),
        ("LEO horizon limit", c5_leo_horizon),
        ("HEO dwell", c6_heo_dwell),
        ("Fried parameter", c7_fried),
        ("stochastic closed forms", c8_stochastic),
        ("QKD feasibility logic", c9_qkd),
        ("formula-identity properties", c10_properties),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let v = f();
        println!("criterion {:>2} {} {name}: {}", i + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: 10/10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {}/10 criteria pass, failing: {failed:?}", 10 - failed.len());
        ExitCode::FAILURE
    }
}
