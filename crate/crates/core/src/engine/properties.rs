//! Whole-engine properties, exercised through the public API.

use std::path::Path;

use proptest::prelude::*;
use super::{parse_scenario, preset, run_scenario, scenario_feasibility, Scenario, SupplyMode};
use crate::energy::HarvestProfile;
use crate::node::{EventKind, Role};

fn load(name: &str) -> Scenario {
    parse_scenario(preset(name).unwrap(), Path::new(".")).unwrap()
}

fn bench(duration_s: f64, period_s: f64) -> Scenario {
    Scenario {
        duration_s,
        duty_period_s: period_s,
        supply: SupplyMode::Bench {
            current_limit_ma: 500.0,
            voltage_v: 3.3,
        },
        ..Default::default()
    }
}

#[test]
fn runs_are_deterministic() {
    for name in ["sec632-panel-count", "fig10-nlos-pdr-cc1101"] {
        let mut sc = load(name);
        sc.duration_s = 90.0;
        sc.record_every_steps = 20;
        assert_eq!(run_scenario(&sc).unwrap(), run_scenario(&sc).unwrap(), "{name}");
    }
}

#[test]
fn simulated_pdr_agrees_with_analytic() {
    let mut sc = load("fig10-nlos-pdr-cc1101");
    sc.duty_period_s = 1.0;
    sc.duration_s = 1200.0;
    let r = run_scenario(&sc).unwrap();
    let p = r.pdr_analytic;
    let bound = 3.0 * (p * (1.0 - p) / r.packets_sent as f64).sqrt();
    assert!(r.packets_sent > 1000);
    assert!((r.pdr - p).abs() <= bound, "pdr {} analytic {p} bound {bound}", r.pdr);
}

#[test]
fn zero_duration_does_nothing() {
    let r = run_scenario(&Scenario {
        duration_s: 0.0,
        ..Default::default()
    })
    .unwrap();
    assert_eq!((r.steps, r.tx_attempts, r.boot_count), (0, 0, 0));
    assert_eq!(r.energy_harvested_j, 0.0);
}

#[test]
fn cold_receiver_loses_packets() {
    // a batteryless receiver on indoor light never reaches search; every packet is lost
    let mut sc = load("fig10-nlos-pdr");
    sc.duration_s = 60.0;
    sc.receiver.batteryless = true;
    sc.receiver.harvest = HarvestProfile::constant(0.5);
    let r = run_scenario(&sc).unwrap();
    assert!(r.packets_sent > 0);
    assert_eq!(r.packets_delivered, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The first cycle fires right after boot; later ones every period.
    #[test]
    fn bench_sends_on_schedule(duration in 5.0f64..80.0, period in 1.0f64..15.0) {
        let sc = bench(duration, period);
        let b = &sc.budget;
        let airtime = sc.radio.airtime(sc.payload_len).unwrap();
        let first_done = b.boot_duration_s + b.sense_duration_s + airtime;
        let cycles = (duration - first_done) / period;
        // keep clear of step-boundary ties
        prop_assume!(cycles < 0.0 || (cycles - cycles.round()).abs() * period > 3.0 * sc.dt_s);
        let expected = if cycles < 0.0 { 0 } else { cycles.floor() as u64 + 1 };
        let r = run_scenario(&sc).unwrap();
        prop_assert_eq!(r.packets_sent, expected);
        prop_assert_eq!(r.packets_sent as usize, r.count(Role::Transmitter, EventKind::TxCompleted));
        prop_assert_eq!(r.brownouts, 0);
    }

    #[test]
    fn energy_closes_for_harvested_runs(
        i_h in 0.5f64..100.0,
        main_uf in 22.0f64..1000.0,
        bank_uf in 47.0f64..3000.0,
        period in 1.0f64..20.0,
        power in 5u8..=14,
    ) {
        let mut sc = Scenario {
            duration_s: 30.0,
            duty_period_s: period,
            harvest: HarvestProfile::constant(i_h),
            ..Default::default()
        };
        sc.main_cap.capacitance_f = main_uf * 1e-6;
        sc.radio_ufop.capacitance_f = bank_uf * 1e-6;
        sc.radio.set_tx_power_dbm(f64::from(power));
        let r = run_scenario(&sc).unwrap();
        let scale = r.energy_harvested_j.max(1e-12);
        prop_assert!(r.energy_residual_j().abs() / scale <= 1e-6, "residual {}", r.energy_residual_j());
        prop_assert!(r.energy_shunted_j >= 0.0);
    }

    /// A bank that cannot carry the packet, even when charged to the rail
    /// clamp and helped by its charger, fails every attempt.
    #[test]
    fn undersized_bank_always_depletes(bank_uf in 50.0f64..1000.0, power in 17.0f64..23.0) {
        let mut sc = load("sec81-capacitor-sizing");
        sc.duration_s = 45.0;
        sc.radio.set_tx_power_dbm(power.round());
        sc.radio_ufop.capacitance_f = bank_uf * 1e-6;
        let f = scenario_feasibility(&sc).unwrap();
        prop_assert!(!f.verdict.is_feasible());

        let u = &sc.radio_ufop;
        let v_top = u.clamp_voltage_v.min(sc.main_cap.clamp_voltage_v);
        let assist = u.charge_current_ma.min(u.pass_limit_ma);
        prop_assume!(assist < f.tx_current_ma);
        let best_case = u.capacitance_f * (v_top - (u.regulated_out_v + u.dropout_v)) + assist / 1000.0 * f.airtime_s;
        prop_assume!(best_case < f.required_c);

        let r = run_scenario(&sc).unwrap();
        prop_assert!(r.tx_attempts > 0);
        prop_assert_eq!(r.count(Role::Transmitter, EventKind::TxFailedBankDepleted) as u64, r.tx_attempts);
        prop_assert_eq!(r.packets_sent, 0);
    }
}
