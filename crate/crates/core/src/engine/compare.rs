use serde_json::Value;

use super::scenario::Scenario;
use super::sweep::max_range;
use crate::phy::{link_pdr, ChannelModel, RadioModel};
use crate::{Error, Result};

/// Keys allowed to differ between the two sides of a comparison.
const RADIO_KEYS: &[&str] = &["radio", "name", "description"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdrRow {
    pub distance_m: f64,
    pub pdr_a: f64,
    pub pdr_b: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeRow {
    pub tx_power_dbm: f64,
    pub max_range_a: Option<f64>,
    pub max_range_b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub channel: ChannelModel,
    pub pdr_rows: Vec<PdrRow>,
    pub range_rows: Vec<RangeRow>,
    /// Comparison point: the scenarios' own distance and powers.
    pub point_distance_m: f64,
    pub point_pdr_a: f64,
    pub point_pdr_b: f64,
    pub point_delta: f64,
}

/// Dotted paths where two scenario documents differ, outside the radio.
pub fn divergent_keys(a: &Scenario, b: &Scenario) -> Vec<String> {
    fn walk(a: &Value, b: &Value, prefix: &str, out: &mut Vec<String>) {
        match (a, b) {
            (Value::Object(ma), Value::Object(mb)) => {
                let mut keys: Vec<&String> = ma.keys().chain(mb.keys()).collect();
                keys.sort();
                keys.dedup();
                for k in keys {
                    if prefix.is_empty() && RADIO_KEYS.contains(&k.as_str()) {
                        continue;
                    }
                    let p = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    match (ma.get(k), mb.get(k)) {
                        (Some(x), Some(y)) => walk(x, y, &p, out),
                        _ => out.push(p),
                    }
                }
            }
            _ if a != b => out.push(prefix.to_string()),
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk(&a.to_value(), &b.to_value(), "", &mut out);
    out
}

fn with_power(radio: &RadioModel, p: f64) -> RadioModel {
    let mut r = radio.clone();
    r.set_tx_power_dbm(p);
    r
}

/// Integer powers both radios can legally transmit at.
pub fn shared_powers(a: &RadioModel, b: &RadioModel) -> Vec<f64> {
    let (alo, ahi) = a.power_range_dbm();
    let (blo, bhi) = b.power_range_dbm();
    let (lo, hi) = (alo.max(blo).ceil(), ahi.min(bhi).floor());
    if lo > hi {
        return Vec::new();
    }
    (lo as i64..=hi as i64).map(|p| p as f64).collect()
}

/// Analytic PDR-vs-distance and range-vs-power tables for two radios.
///
/// `channel` replaces both scenarios' channel (e.g. a calibrated one).
pub fn compare_scenarios(
    a: &Scenario,
    b: &Scenario,
    distances_m: &[f64],
    channel: Option<ChannelModel>,
) -> Result<CompareReport> {
    let diverging = divergent_keys(a, b);
    if !diverging.is_empty() {
        return Err(Error::Config(format!(
            "scenarios may differ only in radio settings; divergent keys: {}",
            diverging.join(", ")
        )));
    }
    let ch = channel.unwrap_or(a.channel);
    if let Some(&d) = distances_m.iter().find(|&&d| !(d >= ch.d0_m)) {
        return Err(Error::Argument(format!("distance {d} m is inside d0 ({} m)", ch.d0_m)));
    }

    let pdr_rows = distances_m
        .iter()
        .map(|&d| {
            let pa = link_pdr(&ch, &a.radio, d)?;
            let pb = link_pdr(&ch, &b.radio, d)?;
            Ok(PdrRow {
                distance_m: d,
                pdr_a: pa,
                pdr_b: pb,
                delta: pa - pb,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let range_rows = shared_powers(&a.radio, &b.radio)
        .into_iter()
        .map(|p| {
            let (ra, rb) = (with_power(&a.radio, p), with_power(&b.radio, p));
            let curve = |r: &RadioModel| {
                distances_m
                    .iter()
                    .map(|&d| Ok((d, link_pdr(&ch, r, d)?)))
                    .collect::<Result<Vec<_>>>()
            };
            Ok(RangeRow {
                tx_power_dbm: p,
                max_range_a: max_range(curve(&ra)?),
                max_range_b: max_range(curve(&rb)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let point_pdr_a = link_pdr(&ch, &a.radio, a.distance_m)?;
    let point_pdr_b = link_pdr(&ch, &b.radio, a.distance_m)?;
    Ok(CompareReport {
        channel: ch,
        pdr_rows,
        range_rows,
        point_distance_m: a.distance_m,
        point_pdr_a,
        point_pdr_b,
        point_delta: point_pdr_a - point_pdr_b,
    })
}
