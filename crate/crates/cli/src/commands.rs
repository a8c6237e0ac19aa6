use std::io::IsTerminal;
use std::path::Path;

use serde_json::json;
use solora_core::engine::{
    calibrate_channel, compare_scenarios, ensure_dir, fmt_num, load_scenario, max_range, parse_targets,
    parse_values, resolved_config_text, run_scenario, scenario_feasibility, scenario_notes, sha256_hex, sweep,
    write_file, write_result, CsvTable, Scenario, SearchGrid,
};
use solora_core::node::Feasibility;
use solora_core::phy::{link_pdr, ChannelModel};
use solora_core::{Error, Result};

use crate::{Cli, Command};

const RANGE_NOTE: &str = "largest swept distance with pdr >= 0.5";

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run { scenario } => cmd_run(cli, scenario),
        Command::Sweep {
            scenario,
            param,
            values,
            seeds,
        } => cmd_sweep(cli, scenario, param, values, *seeds),
        Command::Compare {
            scenario_a,
            scenario_b,
            channel,
            distances,
        } => cmd_compare(cli, scenario_a, scenario_b, channel.as_deref(), distances),
        Command::Calibrate { targets, grid } => cmd_calibrate(cli, targets, grid.as_deref()),
        Command::Feasibility { scenario } => cmd_feasibility(cli, scenario),
    }
}

fn color() -> bool {
    std::env::var_os("NO_COLOR").is_none() && std::io::stdout().is_terminal()
}

fn paint(text: &str, good: bool) -> String {
    if color() {
        format!("\x1b[{}m{text}\x1b[0m", if good { "32" } else { "31" })
    } else {
        text.to_string()
    }
}

/// Load a scenario and apply `--seed` and `--set` in order.
fn scenario(cli: &Cli, path: &Path) -> Result<Scenario> {
    let mut sc = load_scenario(path)?;
    if let Some(seed) = cli.seed {
        sc.seed = seed;
    }
    for s in &cli.set {
        sc = sc.with_override(s)?;
    }
    sc.validate()?;
    Ok(sc)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Argument(format!("{} not found", path.display())),
        _ => Error::io(path, e),
    })
}

fn cmd_run(cli: &Cli, path: &Path) -> Result<()> {
    let sc = scenario(cli, path)?;
    let r = run_scenario(&sc)?;
    write_result(&r, &cli.out)?;
    println!(
        "{}: pdr={} sent={} delivered={} brownouts={} boot_loops={}",
        sc.name,
        fmt_num(r.pdr),
        r.packets_sent,
        r.packets_delivered,
        paint(&r.brownouts.to_string(), r.brownouts == 0),
        paint(&r.boot_loops_detected.to_string(), r.boot_loops_detected == 0),
    );
    Ok(())
}

fn cmd_sweep(cli: &Cli, path: &Path, param: &str, spec: &str, seeds: usize) -> Result<()> {
    if seeds == 0 {
        return Err(Error::Argument("--seeds must be at least 1".into()));
    }
    let sc = scenario(cli, path)?;
    let values = parse_values(spec)?;
    if values.is_empty() {
        return Err(Error::Argument(format!("--values `{spec}` selects no points")));
    }
    let rows = sweep(&sc, param, &values, seeds)?;
    ensure_dir(&cli.out)?;
    let digest = sc.digest();
    let notes = |t: CsvTable| {
        scenario_notes(t, &sc)
            .note("param", param)
            .note("values", spec)
            .note("seeds_per_point", seeds.to_string())
    };

    let mut table = notes(CsvTable::new(
        &digest,
        &[
            param,
            "pdr_mean",
            "pdr_analytic",
            "packets_sent_mean",
            "packets_delivered_mean",
            "brownouts_mean",
            "boot_loops_mean",
            "mean_current_ma",
            "peak_current_ma",
            "energy_consumed_j",
        ],
    ));
    for row in &rows {
        table.push(vec![
            fmt_num(row.value),
            fmt_num(row.mean_pdr()),
            fmt_num(row.pdr_analytic),
            fmt_num(row.mean_packets_sent()),
            fmt_num(row.mean_packets_delivered()),
            fmt_num(row.mean_brownouts()),
            fmt_num(row.mean_boot_loops()),
            fmt_num(row.mean_current_ma()),
            fmt_num(row.mean_peak_current_ma()),
            fmt_num(row.mean_energy_consumed_j()),
        ]);
    }
    table.write(&cli.out.join("sweep.csv"))?;

    let mut runs = notes(CsvTable::new(
        &digest,
        &[
            param,
            "seed",
            "pdr",
            "packets_sent",
            "packets_delivered",
            "brownouts",
            "boot_loops",
            "tx_failed_under_current",
            "tx_failed_bank_depleted",
            "mean_current_ma",
            "peak_current_ma",
            "energy_consumed_j",
        ],
    ));
    for row in &rows {
        for r in &row.runs {
            runs.push(vec![
                fmt_num(row.value),
                r.seed.to_string(),
                fmt_num(r.pdr),
                r.packets_sent.to_string(),
                r.packets_delivered.to_string(),
                r.brownouts.to_string(),
                r.boot_loops_detected.to_string(),
                r.tx_failed_under_current.to_string(),
                r.tx_failed_bank_depleted.to_string(),
                fmt_num(r.mean_current_ma),
                fmt_num(r.peak_current_ma),
                fmt_num(r.energy_consumed_j),
            ]);
        }
    }
    runs.write(&cli.out.join("sweep_runs.csv"))?;
    write_file(&cli.out.join("config.resolved"), &resolved_config_text(&sc))?;

    println!("{}: {} points x {seeds} seeds over {param}", sc.name, rows.len());
    if param == "distance_m" {
        let range = max_range(rows.iter().map(|r| (r.value, r.mean_pdr())));
        println!(
            "max range ({RANGE_NOTE}): {}",
            range.map_or_else(|| "none".to_string(), |d| format!("{} m", fmt_num(d)))
        );
    }
    Ok(())
}

fn cmd_compare(cli: &Cli, a: &Path, b: &Path, channel: Option<&Path>, distances: &str) -> Result<()> {
    let sa = scenario(cli, a)?;
    let sb = scenario(cli, b)?;
    let ch: Option<ChannelModel> = channel
        .map(|p| {
            let text = read(p)?;
            let ch: ChannelModel = serde_json::from_str(&text)?;
            let errs = ch.validate("channel");
            if errs.is_empty() {
                Ok(ch)
            } else {
                Err(Error::Validation(errs))
            }
        })
        .transpose()?;
    let ds = parse_values(distances)?;
    let report = compare_scenarios(&sa, &sb, &ds, ch)?;
    ensure_dir(&cli.out)?;

    let channel_json = serde_json::to_value(report.channel)?;
    let resolved = json!({
        "scenario_a": sa.to_value(),
        "scenario_b": sb.to_value(),
        "channel": channel_json,
        "distances": distances,
    });
    let digest = sha256_hex(&serde_json::to_string(&resolved)?);
    let notes = |t: CsvTable| {
        t.note("scenario_a", sa.name.clone())
            .note("scenario_b", sb.name.clone())
            .note("radio_a", sa.radio.describe())
            .note("radio_b", sb.radio.describe())
            .note(
                "channel",
                format!(
                    "n={} sigma_db={} pl0_db={} d0_m={}",
                    report.channel.exponent,
                    report.channel.shadowing_sigma_db,
                    report.channel.pl0_db,
                    report.channel.d0_m
                ),
            )
            .note("pdr", "analytic")
            .note("range_definition", RANGE_NOTE)
    };

    let mut pdr = notes(CsvTable::new(&digest, &["d_m", "pdr_a", "pdr_b", "delta"]));
    for r in &report.pdr_rows {
        pdr.push(vec![fmt_num(r.distance_m), fmt_num(r.pdr_a), fmt_num(r.pdr_b), fmt_num(r.delta)]);
    }
    pdr.write(&cli.out.join("pdr_vs_distance.csv"))?;

    let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
    let mut range = notes(CsvTable::new(&digest, &["power", "max_range_a", "max_range_b"]));
    for r in &report.range_rows {
        range.push(vec![fmt_num(r.tx_power_dbm), opt(r.max_range_a), opt(r.max_range_b)]);
    }
    range.write(&cli.out.join("range_vs_power.csv"))?;

    let mut echo = serde_json::to_string_pretty(&json!({ "config_sha256": digest, "compare": resolved }))?;
    echo.push('\n');
    write_file(&cli.out.join("config.resolved"), &echo)?;

    println!(
        "at {} m: pdr_a={} pdr_b={} delta={}{}",
        fmt_num(report.point_distance_m),
        fmt_num(report.point_pdr_a),
        fmt_num(report.point_pdr_b),
        if report.point_delta >= 0.0 { "+" } else { "" },
        fmt_num(report.point_delta)
    );
    Ok(())
}

fn cmd_calibrate(cli: &Cli, path: &Path, grid: Option<&str>) -> Result<()> {
    let text = read(path)?;
    let targets = parse_targets(&text)?;
    let grid = match grid {
        Some(spec) => SearchGrid::parse(spec)?,
        None => targets.grid.clone().unwrap_or_default(),
    };
    let cal = calibrate_channel(&targets.base_channel, &targets.points, &grid)?;
    ensure_dir(&cli.out)?;

    let digest = sha256_hex(&format!(
        "{text}\n{}\n{}",
        serde_json::to_string(&grid.exponent)?,
        serde_json::to_string(&grid.sigma_db)?
    ));
    let mut ch = serde_json::to_string_pretty(&cal.channel)?;
    ch.push('\n');
    write_file(&cli.out.join("channel.calibrated.json"), &ch)?;

    let mut table = CsvTable::new(
        &digest,
        &["radio", "distance_m", "tx_power_dbm", "observed_pdr", "fitted_pdr", "error"],
    )
    .note("targets", path.display().to_string())
    .note("exponent", fmt_num(cal.channel.exponent))
    .note("shadowing_sigma_db", fmt_num(cal.channel.shadowing_sigma_db))
    .note("residual_sse", fmt_num(cal.residual))
    .note("grid_points", cal.evaluated.to_string());
    for p in &targets.points {
        let fitted = link_pdr(&cal.channel, &p.radio, p.distance_m)?;
        table.push(vec![
            p.radio.label().to_string(),
            fmt_num(p.distance_m),
            fmt_num(p.tx_power_dbm),
            fmt_num(p.observed_pdr),
            fmt_num(fitted),
            fmt_num(fitted - p.observed_pdr),
        ]);
    }
    table.write(&cli.out.join("calibration.csv"))?;

    println!(
        "n={} sigma_db={} residual={} ({} grid points)",
        fmt_num(cal.channel.exponent),
        fmt_num(cal.channel.shadowing_sigma_db),
        fmt_num(cal.residual),
        cal.evaluated
    );
    Ok(())
}

fn cmd_feasibility(cli: &Cli, path: &Path) -> Result<()> {
    let sc = scenario(cli, path)?;
    let r = scenario_feasibility(&sc)?;
    let verdict = match r.verdict {
        Feasibility::Feasible { margin_c } => paint(&format!("feasible (margin {} C)", fmt_num(margin_c)), true),
        Feasibility::Infeasible { shortfall_c } => {
            paint(&format!("infeasible (short {} C)", fmt_num(shortfall_c)), false)
        }
    };
    println!("{}: {verdict}", sc.name);
    println!(
        "required:    {} C  ({} mA x {} s)",
        fmt_num(r.required_c),
        fmt_num(r.tx_current_ma),
        fmt_num(r.airtime_s)
    );
    println!(
        "deliverable: {} C  ({} F from {} V to {} V)",
        fmt_num(r.deliverable_c),
        fmt_num(sc.radio_ufop.capacitance_f),
        fmt_num(r.v_interrupt),
        fmt_num(r.v_min_operate)
    );
    println!("minimum bank: {} uF", fmt_num(r.min_capacitance_f * 1e6));
    Ok(())
}
