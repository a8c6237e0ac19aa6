//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use solora_core::engine::{
    calibrate_channel, compare_scenarios, max_range, parse_scenario, parse_targets, preset, run_scenario,
    scenario_feasibility, write_result, Scenario, SearchGrid, SimResult, SupplyMode, NLOS_TARGETS,
};
use solora_core::energy::HarvestProfile;
use solora_core::node::{EventKind, Role};
use solora_core::phy::{
    link_pdr, lora_airtime, packet_rng, pdr_analytic, received_power_mean, sample_packet_outcome, ChannelModel,
    LoRaConfig, LORA_BANDWIDTHS_HZ,
};

type Check = Result<String, String>;

fn load(name: &str) -> Scenario {
    parse_scenario(preset(name).expect("preset exists"), Path::new(".")).expect("preset parses")
}

fn with(sc: &Scenario, sets: &[&str]) -> Scenario {
    sets.iter().fold(sc.clone(), |s, a| s.with_override(a).expect("override applies"))
}

fn run(sc: &Scenario) -> SimResult {
    run_scenario(sc).expect("scenario runs")
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Time on air evaluated directly from the datasheet expression.
fn oracle_airtime(sf: u32, bw: f64, payload: u32) -> f64 {
    let t_sym = 2f64.powi(sf as i32) / bw;
    let de = if t_sym >= 16e-3 { 1.0 } else { 0.0 };
    let (crc, ih, cr, n_pre) = (1.0, 0.0, 1.0, 8.0);
    let num = 8.0 * payload as f64 - 4.0 * sf as f64 + 28.0 + 16.0 * crc - 20.0 * ih;
    let den = 4.0 * (sf as f64 - 2.0 * de);
    let n_payload = 8.0 + ((num / den).ceil() * (cr + 4.0)).max(0.0);
    (n_pre + 4.25) * t_sym + n_payload * t_sym
}

fn lora(sf: u8, bw: f64) -> LoRaConfig {
    LoRaConfig {
        spreading_factor: sf,
        bandwidth_hz: bw,
        ..Default::default()
    }
    .with_recommended_ldro()
}

fn airtime_oracle() -> Check {
    // hand-evaluated anchors
    let anchors = [(7u8, 125e3, 20usize, 56.576e-3), (12, 125e3, 20, 1318.912e-3), (7, 500e3, 0, 6.464e-3)];
    for (sf, bw, pl, want) in anchors {
        let got = lora_airtime(&lora(sf, bw), pl).map_err(|e| e.to_string())?;
        if ((got - want) / want).abs() > 1e-12 {
            return Err(format!("SF{sf}/{bw}/{pl}B: {got} vs hand value {want}"));
        }
    }
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for sf in 7..=12u8 {
        for bw in LORA_BANDWIDTHS_HZ {
            for pl in [0u32, 20, 255] {
                let got = lora_airtime(&lora(sf, bw), pl as usize).map_err(|e| e.to_string())?;
                let want = oracle_airtime(u32::from(sf), bw, pl);
                worst = worst.max(((got - want) / want).abs());
                cases += 1;
            }
        }
    }
    ensure(worst <= 1e-12, format!("{cases} cases, worst relative error {worst:.1e} (tol 1e-12)"))
}

fn pdr_coherence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 100_000usize;
    let mut within = 0;
    for i in 0..20u64 {
        let margin: f64 = rng.random_range(-10.0..10.0);
        let sigma: f64 = rng.random_range(1.0..12.0);
        let ch = ChannelModel {
            shadowing_sigma_db: sigma,
            ..ChannelModel::non_line_of_sight()
        };
        let sens = received_power_mean(&ch, 5.0, 200.0).unwrap() - margin;
        let mut draws = packet_rng(i, 0);
        let hits = (0..n)
            .filter(|_| sample_packet_outcome(&ch, sens, 5.0, 200.0, &mut draws).unwrap())
            .count();
        let p = pdr_analytic(margin, sigma);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        if (hits as f64 / n as f64 - p).abs() <= 3.0 * se {
            within += 1;
        }
    }
    ensure(within >= 19, format!("{within}/20 pairs within 3 binomial SE (need 19)"))
}

fn lora_advantage() -> Check {
    let targets = parse_targets(NLOS_TARGETS).map_err(|e| e.to_string())?;
    let grid = targets.grid.clone().unwrap_or_else(SearchGrid::default);
    let cal = calibrate_channel(&targets.base_channel, &targets.points, &grid).map_err(|e| e.to_string())?;
    let distances: Vec<f64> = (1..=200).map(|i| i as f64 * 25.0).collect();
    let report = compare_scenarios(
        &load("fig10-nlos-pdr"),
        &load("fig10-nlos-pdr-cc1101"),
        &distances,
        Some(cal.channel),
    )
    .map_err(|e| e.to_string())?;
    let d = report.point_delta;
    ensure(
        (d - 0.07).abs() <= 0.02,
        format!(
            "calibrated n={} sigma={} dB, delta at {} m = {d:+.4} (want +0.07 +/- 0.02)",
            cal.channel.exponent, cal.channel.shadowing_sigma_db, report.point_distance_m
        ),
    )
}

fn range_claim() -> Check {
    let sc = load("fig11-los-range");
    if sc.radio.tx_power_dbm() != 23.0 {
        return Err(format!("preset transmits at {} dBm", sc.radio.tx_power_dbm()));
    }
    let curve = (1..=200)
        .map(|i| {
            let d = i as f64 * 25.0;
            link_pdr(&sc.channel, &sc.radio, d).map(|p| (d, p))
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let range = max_range(curve).unwrap_or(0.0);
    let sim = run(&with(&sc, &["distance_m=1000"]));
    ensure(
        range >= 1000.0 && sim.pdr >= 0.5,
        format!("max_range {range} m (need >= 1000), simulated pdr at 1000 m {:.3}", sim.pdr),
    )
}

fn bench_supply() -> Check {
    let sc = load("sec631-bench-16mA");
    let limit = match sc.supply {
        SupplyMode::Bench { current_limit_ma, .. } => current_limit_ma,
        SupplyMode::Harvested => return Err("preset is not bench-supplied".into()),
    };
    let ok = run(&sc);
    let over = run(&with(&sc, &["radio.tx_power_dbm=8"]));
    let uc = over.count(Role::Transmitter, EventKind::TxFailedUnderCurrent);
    ensure(
        limit == 16.0 && sc.duration_s == 60.0 && ok.brownouts == 0 && ok.packets_sent == 6 && uc >= 1,
        format!(
            "16 mA: {} tx, {} brownouts, peak {:.1} mA; 8 dBm: {uc} under-current failures",
            ok.packets_sent, ok.brownouts, ok.peak_current_ma
        ),
    )
}

fn boot_loops() -> Check {
    let one = run(&load("sec632-panel-count"));
    let three = run(&load("sec632-three-panel"));
    ensure(
        one.duration_s <= 600.0 && one.boot_loops_detected >= 1 && three.boot_loops_detected == 0,
        format!(
            "one panel: {} loops ({} boots); three panels: {} loops",
            one.boot_loops_detected, one.boot_count, three.boot_loops_detected
        ),
    )
}

fn capacitor_sizing() -> Check {
    let sc = load("sec81-capacitor-sizing");
    let mut lines = Vec::new();
    let mut ok = true;
    for (label, cap) in [("100 uF", 100e-6), ("1000 uF", 1000e-6)] {
        let s = with(&sc, &[&format!("radio_ufop.capacitance_f={cap}")]);
        let f = scenario_feasibility(&s).map_err(|e| e.to_string())?;
        ok &= !f.verdict.is_feasible() && (f.required_c - 6.22e-4).abs() < 0.01e-4 && f.deliverable_c <= 5.0e-4 + 1e-12;
        let r = run(&with(&s, &["radio.tx_power_dbm=23"]));
        let depleted = r.count(Role::Transmitter, EventKind::TxFailedBankDepleted);
        ok &= r.tx_attempts > 0 && depleted as u64 == r.tx_attempts && r.packets_sent == 0;
        lines.push(format!(
            "{label}: need {:.3e} C, have {:.1e} C, engine {depleted}/{} depleted",
            f.required_c, f.deliverable_c, r.tx_attempts
        ));
    }
    ensure(ok, lines.join("; "))
}

fn current_clip() -> Check {
    let sc = load("sec81-current-clip");
    let clipped = run(&sc);
    let uc = clipped.count(Role::Transmitter, EventKind::TxFailedUnderCurrent);
    let opened = run(&with(&sc, &["radio_ufop.pass_limit_ma=120"]));
    let done = opened.count(Role::Transmitter, EventKind::TxCompleted);
    ensure(
        sc.radio.tx_current_ma().unwrap() > 20.0 && clipped.tx_attempts > 0 && uc as u64 == clipped.tx_attempts && done >= 1,
        format!("20 mA: {uc}/{} under-current; 120 mA: {done} completed", clipped.tx_attempts),
    )
}

fn random_scenario(rng: &mut ChaCha8Rng, i: u64) -> Scenario {
    let mut sc = Scenario {
        name: format!("random-{i}"),
        seed: i,
        duration_s: rng.random_range(5.0..40.0),
        duty_period_s: rng.random_range(2.0..12.0),
        distance_m: rng.random_range(50.0..3000.0),
        ..Default::default()
    };
    sc.radio.set_tx_power_dbm(rng.random_range(5.0..14.0f64).round());
    sc.main_cap.capacitance_f = rng.random_range(47e-6..470e-6);
    sc.radio_ufop.capacitance_f = rng.random_range(100e-6..3000e-6);
    sc.receiver.batteryless = rng.random_bool(0.3);
    if rng.random_bool(0.3) {
        sc.supply = SupplyMode::Bench {
            current_limit_ma: rng.random_range(10.0..60.0),
            voltage_v: 3.3,
        };
    } else {
        sc.harvest = HarvestProfile::constant(rng.random_range(2.0..90.0));
    }
    sc
}

fn conservation_and_determinism() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let r = run(&random_scenario(&mut rng, i));
        let scale = r.energy_harvested_j.abs().max(r.energy_consumed_j.abs()).max(1e-12);
        worst = worst.max(r.energy_residual_j().abs() / scale);
    }

    let mut identical = true;
    for name in ["sec631-bench-16mA", "sec632-three-panel"] {
        let sc = with(&load(name), &["record_every_steps=50"]);
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let fa = write_result(&run(&sc), a.path()).map_err(|e| e.to_string())?;
        write_result(&run(&sc), b.path()).map_err(|e| e.to_string())?;
        for f in fa {
            let name = f.file_name().unwrap();
            identical &= std::fs::read(&f).unwrap() == std::fs::read(b.path().join(name)).unwrap();
        }
    }

    let mut worst_dt: f64 = 0.0;
    let mut pdr_same = true;
    for name in ["sec631-bench-16mA", "sec632-three-panel", "fig10-nlos-pdr-cc1101"] {
        let sc = with(&load(name), &["duration_s=120"]);
        let coarse = run(&sc);
        let fine = run(&with(&sc, &[&format!("dt_s={}", sc.dt_s / 2.0)]));
        for (x, y) in [
            (coarse.energy_consumed_j, fine.energy_consumed_j),
            (coarse.energy_harvested_j, fine.energy_harvested_j),
        ] {
            worst_dt = worst_dt.max(((x - y) / x).abs());
        }
        pdr_same &= coarse.pdr == fine.pdr;
    }
    ensure(
        worst <= 1e-6 && identical && worst_dt <= 1e-3 && pdr_same,
        format!(
            "closure worst {worst:.1e} over 100 runs; byte-identical {identical}; dt/2 energy change {:.3}%, pdr unchanged {pdr_same}",
            worst_dt * 100.0
        ),
    )
}

fn bitrate_envelope() -> Check {
    let payload = Scenario::default().payload_len;
    let mut rates = Vec::new();
    for sf in 7..=12u8 {
        for bw in LORA_BANDWIDTHS_HZ {
            let t = lora_airtime(&lora(sf, bw), payload).map_err(|e| e.to_string())?;
            rates.push((sf, bw, 8.0 * payload as f64 / t / 1000.0));
        }
    }
    let (lo, hi) = (0.37, 46.9);
    let outside: Vec<String> = rates
        .iter()
        .filter(|&&(_, _, r)| !(lo..=hi).contains(&r))
        .map(|&(sf, bw, r)| format!("SF{sf}/{}k={r:.3}", bw / 1000.0))
        .collect();
    let min = rates.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let max = rates.iter().map(|r| r.2).fold(0.0, f64::max);
    let detail = format!("{payload} B payload rates span [{min:.3}, {max:.3}] kbps vs [{lo}, {hi}]");
    if outside.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; outside: {}", outside.join(", ")))
    }
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Check); 10] = [
        ("airtime oracle", Duration::from_secs(1), airtime_oracle),
        ("pdr coherence", Duration::from_secs(10), pdr_coherence),
        ("lora vs cc1101 delta", Duration::from_secs(30), lora_advantage),
        ("los range at 23 dBm", Duration::from_secs(30), range_claim),
        ("bench supply 16 mA", Duration::MAX, bench_supply),
        ("boot loop", Duration::MAX, boot_loops),
        ("capacitor sizing", Duration::MAX, capacitor_sizing),
        ("current clip", Duration::MAX, current_clip),
        ("conservation and determinism", Duration::MAX, conservation_and_determinism),
        ("bit-rate envelope", Duration::MAX, bitrate_envelope),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let (verdict, detail) = match outcome {
            Ok(d) if took <= budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; took {took:.2?}, budget {budget:.0?}")),
            Err(d) => ("FAIL", d),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!("{verdict} {:>2} {name}: {detail} [{took:.2?}]", i + 1);
    }
    println!("{} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
