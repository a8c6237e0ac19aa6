use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::sweep::range_values;
use crate::phy::{link_margin, pdr_analytic, ChannelModel, FskConfig, LoRaConfig, RadioModel};
use crate::{Error, Result};

/// One observed delivery ratio to fit.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationPoint {
    pub radio: RadioModel,
    pub distance_m: f64,
    pub tx_power_dbm: f64,
    pub observed_pdr: f64,
}

/// Candidate values for the path-loss exponent and shadowing sigma.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchGrid {
    pub exponent: Vec<f64>,
    pub sigma_db: Vec<f64>,
}

impl SearchGrid {
    /// Parse `n=start:stop:step,sigma=start:stop:step` (a lone value is also
    /// accepted for either axis).
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |m: String| Error::Argument(format!("bad grid `{spec}`: {m}"));
        let (mut exponent, mut sigma_db) = (None, None);
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, range) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("`{part}` is not key=range")))?;
            let nums = range
                .split(':')
                .map(|s| s.trim().parse::<f64>().map_err(|_| bad(format!("`{s}` is not a number"))))
                .collect::<Result<Vec<_>>>()?;
            let values = match nums.as_slice() {
                [v] => vec![*v],
                [a, b, s] => range_values(*a, *b, *s).ok_or_else(|| bad("step must be > 0".into()))?,
                _ => return Err(bad(format!("`{range}` is not start:stop:step"))),
            };
            match key.trim() {
                "n" | "exponent" => exponent = Some(values),
                "sigma" | "sigma_db" => sigma_db = Some(values),
                other => return Err(bad(format!("unknown axis `{other}`"))),
            }
        }
        let grid = Self {
            exponent: exponent.ok_or_else(|| bad("missing n axis".into()))?,
            sigma_db: sigma_db.ok_or_else(|| bad("missing sigma axis".into()))?,
        };
        if grid.exponent.is_empty() || grid.sigma_db.is_empty() {
            return Err(bad("empty axis".into()));
        }
        Ok(grid)
    }
}

impl Default for SearchGrid {
    fn default() -> Self {
        Self::parse(DEFAULT_GRID).expect("default grid parses")
    }
}

pub const DEFAULT_GRID: &str = "n=2:4:0.05,sigma=1:12:0.25";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub channel: ChannelModel,
    /// Sum of squared PDR errors at the chosen grid point.
    pub residual: f64,
    pub evaluated: usize,
}

/// Grid search for the `(n, sigma)` minimising squared PDR error.
///
/// Other channel fields come from `base`. Ties go to the smaller exponent,
/// then the smaller sigma.
pub fn calibrate_channel(
    base: &ChannelModel,
    points: &[CalibrationPoint],
    grid: &SearchGrid,
) -> Result<Calibration> {
    if points.is_empty() {
        return Err(Error::Argument("calibration needs at least one target point".into()));
    }
    if grid.exponent.is_empty() || grid.sigma_db.is_empty() {
        return Err(Error::Argument("calibration grid is empty".into()));
    }
    let sens = points
        .iter()
        .map(|p| p.radio.sensitivity_dbm())
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<(f64, ChannelModel)> = None;
    let mut evaluated = 0;
    for &n in &grid.exponent {
        for &sigma in &grid.sigma_db {
            let ch = ChannelModel {
                exponent: n,
                shadowing_sigma_db: sigma,
                ..*base
            };
            let mut sse = 0.0;
            for (p, &s) in points.iter().zip(&sens) {
                let m = link_margin(&ch, s, p.tx_power_dbm, p.distance_m)?;
                let e = pdr_analytic(m, sigma) - p.observed_pdr;
                sse += e * e;
            }
            evaluated += 1;
            if best.as_ref().map_or(true, |(b, _)| sse < *b) {
                best = Some((sse, ch));
            }
        }
    }
    let (residual, channel) = best.expect("grid is non-empty");
    Ok(Calibration {
        channel,
        residual,
        evaluated,
    })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetPointDoc {
    radio: String,
    distance_m: f64,
    tx_power_dbm: f64,
    observed_pdr: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetsDoc {
    #[serde(default)]
    #[allow(dead_code)]
    description: String,
    #[serde(default = "ChannelModel::non_line_of_sight")]
    base_channel: ChannelModel,
    #[serde(default)]
    radios: BTreeMap<String, RadioModel>,
    #[serde(default)]
    grid: Option<String>,
    points: Vec<TargetPointDoc>,
}

/// A parsed calibration target file.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTargets {
    pub base_channel: ChannelModel,
    pub points: Vec<CalibrationPoint>,
    pub grid: Option<SearchGrid>,
}

/// Parse a calibration target document.
///
/// Point radios name entries of the `radios` map; `lora` and `cc1101` default
/// to the stock configurations.
pub fn parse_targets(text: &str) -> Result<CalibrationTargets> {
    let doc: TargetsDoc = serde_json::from_str(text)?;
    let mut radios = doc.radios;
    radios
        .entry("lora".into())
        .or_insert_with(|| RadioModel::Lora(LoRaConfig::default()));
    radios
        .entry("cc1101".into())
        .or_insert_with(|| RadioModel::Fsk(FskConfig::default()));
    let points = doc
        .points
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut radio = radios.get(&p.radio).cloned().ok_or_else(|| {
                Error::Config(format!(
                    "points[{i}].radio `{}` is not one of: {}",
                    p.radio,
                    radios.keys().cloned().collect::<Vec<_>>().join(", ")
                ))
            })?;
            if !(0.0..=1.0).contains(&p.observed_pdr) {
                return Err(Error::Config(format!("points[{i}].observed_pdr must lie in [0, 1]")));
            }
            if !(p.distance_m >= doc.base_channel.d0_m) {
                return Err(Error::Config(format!("points[{i}].distance_m is inside d0")));
            }
            radio.set_tx_power_dbm(p.tx_power_dbm);
            Ok(CalibrationPoint {
                radio,
                distance_m: p.distance_m,
                tx_power_dbm: p.tx_power_dbm,
                observed_pdr: p.observed_pdr,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = doc.grid.as_deref().map(SearchGrid::parse).transpose()?;
    Ok(CalibrationTargets {
        base_channel: doc.base_channel,
        points,
        grid,
    })
}
