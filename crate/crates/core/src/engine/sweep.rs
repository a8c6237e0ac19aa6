use rayon::prelude::*;
use serde_json::Value;

use super::scenario::{get_path, numeric_paths, set_path, Scenario};
use super::sim::{run_scenario, SimResult};
use crate::{Error, Result};

/// Scalars kept from one seeded run of a sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    pub pdr: f64,
    pub packets_sent: u64,
    pub packets_delivered: u64,
    pub brownouts: u64,
    pub boot_loops_detected: u64,
    pub tx_failed_under_current: u64,
    pub tx_failed_bank_depleted: u64,
    pub mean_current_ma: f64,
    pub peak_current_ma: f64,
    pub energy_consumed_j: f64,
}

impl From<&SimResult> for SeedRun {
    fn from(r: &SimResult) -> Self {
        Self {
            seed: r.config_echo.seed,
            pdr: r.pdr,
            packets_sent: r.packets_sent,
            packets_delivered: r.packets_delivered,
            brownouts: r.brownouts,
            boot_loops_detected: r.boot_loops_detected,
            tx_failed_under_current: r.tx_failed_under_current,
            tx_failed_bank_depleted: r.tx_failed_bank_depleted,
            mean_current_ma: r.mean_current_ma,
            peak_current_ma: r.peak_current_ma,
            energy_consumed_j: r.energy_consumed_j,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub pdr_analytic: f64,
    pub runs: Vec<SeedRun>,
}

impl SweepRow {
    fn mean(&self, f: impl Fn(&SeedRun) -> f64) -> f64 {
        if self.runs.is_empty() {
            return 0.0;
        }
        self.runs.iter().map(f).sum::<f64>() / self.runs.len() as f64
    }

    pub fn mean_pdr(&self) -> f64 {
        self.mean(|r| r.pdr)
    }
    pub fn mean_packets_sent(&self) -> f64 {
        self.mean(|r| r.packets_sent as f64)
    }
    pub fn mean_packets_delivered(&self) -> f64 {
        self.mean(|r| r.packets_delivered as f64)
    }
    pub fn mean_brownouts(&self) -> f64 {
        self.mean(|r| r.brownouts as f64)
    }
    pub fn mean_boot_loops(&self) -> f64 {
        self.mean(|r| r.boot_loops_detected as f64)
    }
    pub fn mean_current_ma(&self) -> f64 {
        self.mean(|r| r.mean_current_ma)
    }
    pub fn mean_peak_current_ma(&self) -> f64 {
        self.mean(|r| r.peak_current_ma)
    }
    pub fn mean_energy_consumed_j(&self) -> f64 {
        self.mean(|r| r.energy_consumed_j)
    }
}

/// Scenario with `path` set to `value`, validated.
pub fn scenario_at(sc: &Scenario, path: &str, value: f64) -> Result<Scenario> {
    let mut doc = sc.to_value();
    match get_path(&doc, path) {
        Some(Value::Number(_)) => {}
        _ => {
            return Err(Error::Config(format!(
                "`{path}` is not a numeric scenario key; valid keys: {}",
                numeric_paths(&doc).join(", ")
            )))
        }
    }
    let number = serde_json::Number::from_f64(value)
        .ok_or_else(|| Error::Argument(format!("sweep value {value} is not finite")))?;
    set_path(&mut doc, path, Value::Number(number))?;
    let point = Scenario::from_value(doc)?;
    point.validate()?;
    Ok(point)
}

/// Run `per_point_seeds` seeds (base seed + index) at every value of `path`.
///
/// Points and seeds run in parallel; rows come back in the order given.
pub fn sweep(sc: &Scenario, path: &str, values: &[f64], per_point_seeds: usize) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Ok(Vec::new());
    }
    let points = values
        .iter()
        .map(|&v| scenario_at(sc, path, v))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, Scenario)> = points
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            (0..per_point_seeds as u64).map(move |j| {
                let mut s = p.clone();
                s.seed = p.seed.wrapping_add(j);
                (i, s)
            })
        })
        .collect();
    let runs = jobs
        .par_iter()
        .map(|(i, s)| run_scenario(s).map(|r| (*i, SeedRun::from(&r), r.pdr_analytic)))
        .collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<SweepRow> = values
        .iter()
        .zip(&points)
        .map(|(&value, p)| {
            Ok(SweepRow {
                value,
                pdr_analytic: crate::phy::link_pdr(&p.channel, &p.radio, p.distance_m)?,
                runs: Vec::new(),
            })
        })
        .collect::<Result<_>>()?;
    for (i, run, _) in runs {
        rows[i].runs.push(run);
    }
    Ok(rows)
}

/// Largest distance with PDR >= 0.5, if any.
pub fn max_range(points: impl IntoIterator<Item = (f64, f64)>) -> Option<f64> {
    points
        .into_iter()
        .filter(|&(_, pdr)| pdr >= 0.5)
        .map(|(d, _)| d)
        .fold(None, |best, d| Some(best.map_or(d, |b: f64| b.max(d))))
}

/// Parse `a,b,c` and/or inclusive `start:stop:step` ranges.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| Error::Argument(format!("bad value list `{spec}`: {what}"));
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let nums: Vec<&str> = part.split(':').collect();
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("`{s}` is not a number")));
        match nums.as_slice() {
            [one] => out.push(num(one)?),
            [start, stop, step] => out.extend(range_values(num(start)?, num(stop)?, num(step)?).ok_or_else(|| bad("step must be > 0"))?),
            _ => return Err(bad(&format!("`{part}` is neither a number nor start:stop:step"))),
        }
    }
    Ok(out)
}

/// Inclusive arithmetic progression; `None` when `step <= 0`.
pub fn range_values(start: f64, stop: f64, step: f64) -> Option<Vec<f64>> {
    if !(step > 0.0) {
        return None;
    }
    let n = ((stop - start) / step + 1e-9).floor();
    if n < 0.0 {
        return Some(Vec::new());
    }
    Some((0..=n as u64).map(|i| start + i as f64 * step).collect())
}
