use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::current::{validate_curve, CurrentCurve};
use crate::{Error, FieldViolation, Result};

pub const LORA_POWER_RANGE_DBM: (f64, f64) = (5.0, 23.0);
pub const LORA_BANDWIDTHS_HZ: [f64; 3] = [125_000.0, 250_000.0, 500_000.0];
pub const MAX_PAYLOAD: usize = 255;

/// Symbol time above which the datasheet asks for low-data-rate optimisation.
const LDRO_SYMBOL_S: f64 = 16e-3;

/// Chirp-spread-spectrum link configuration (SX1276 class radio).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoRaConfig {
    pub spreading_factor: u8,
    pub bandwidth_hz: f64,
    /// Coding rate denominator offset: 1 => 4/5 ... 4 => 4/8.
    pub coding_rate: u8,
    pub preamble_symbols: u16,
    pub explicit_header: bool,
    pub crc_on: bool,
    pub low_data_rate_opt: bool,
    pub tx_power_dbm: f64,
    pub frequency_hz: f64,
    pub noise_figure_db: f64,
    /// Demodulation SNR floor keyed by spreading factor.
    #[serde(with = "sf_keys")]
    pub snr_required_db: BTreeMap<u8, f64>,
    pub current_curve: CurrentCurve,
}

impl Default for LoRaConfig {
    fn default() -> Self {
        Self {
            spreading_factor: 7,
            bandwidth_hz: 125_000.0,
            coding_rate: 1,
            preamble_symbols: 8,
            explicit_header: true,
            crc_on: true,
            low_data_rate_opt: false,
            tx_power_dbm: 5.0,
            frequency_hz: 433e6,
            noise_figure_db: 6.0,
            snr_required_db: default_snr_table(),
            current_curve: default_lora_curve(),
        }
    }
}

/// JSON object keys are strings; parse them explicitly so the table also
/// survives the buffering done for tagged enums.
mod sf_keys {
    use std::collections::BTreeMap;

    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(table: &BTreeMap<u8, f64>, s: S) -> Result<S::Ok, S::Error> {
        let text: BTreeMap<String, f64> = table.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        text.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u8, f64>, D::Error> {
        BTreeMap::<String, f64>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| {
                k.trim()
                    .parse::<u8>()
                    .map(|sf| (sf, v))
                    .map_err(|_| D::Error::custom(format!("spreading factor key `{k}` is not an integer")))
            })
            .collect()
    }
}

/// Demodulation SNR floor per spreading factor.
pub fn default_snr_table() -> BTreeMap<u8, f64> {
    [(7, -7.5), (8, -10.0), (9, -12.5), (10, -15.0), (11, -17.5), (12, -20.0)]
        .into_iter()
        .collect()
}

/// Transmit current vs. output power, anchored at 15.6 mA for 5 dBm.
pub fn default_lora_curve() -> CurrentCurve {
    CurrentCurve(vec![
        (5.0, 15.6),
        (8.0, 19.0),
        (11.0, 24.0),
        (14.0, 33.0),
        (17.0, 50.0),
        (20.0, 80.0),
        (23.0, 120.0),
    ])
}

impl LoRaConfig {
    pub fn symbol_time(&self) -> f64 {
        f64::from(1u32 << self.spreading_factor) / self.bandwidth_hz
    }

    /// Enable low-data-rate optimisation when the symbol time calls for it.
    pub fn with_recommended_ldro(mut self) -> Self {
        self.low_data_rate_opt = self.symbol_time() >= LDRO_SYMBOL_S;
        self
    }

    pub fn validate(&self, prefix: &str) -> Vec<FieldViolation> {
        let mut out = Vec::new();
        let v = |f: &str, m: String| FieldViolation::new(format!("{prefix}.{f}"), m);
        if !(7..=12).contains(&self.spreading_factor) {
            out.push(v("spreading_factor", format!("{} not in [7, 12]", self.spreading_factor)));
        }
        if !LORA_BANDWIDTHS_HZ.contains(&self.bandwidth_hz) {
            out.push(v(
                "bandwidth_hz",
                format!("{} not one of 125000, 250000, 500000", self.bandwidth_hz),
            ));
        }
        if !(1..=4).contains(&self.coding_rate) {
            out.push(v("coding_rate", format!("{} not in [1, 4]", self.coding_rate)));
        }
        let (lo, hi) = LORA_POWER_RANGE_DBM;
        if !(self.tx_power_dbm >= lo && self.tx_power_dbm <= hi) {
            out.push(v("tx_power_dbm", format!("{} not in [{lo}, {hi}]", self.tx_power_dbm)));
        }
        if !(self.frequency_hz > 0.0) {
            out.push(v("frequency_hz", "must be > 0".into()));
        }
        if !self.snr_required_db.contains_key(&self.spreading_factor) {
            out.push(v(
                "snr_required_db",
                format!("no entry for SF{}", self.spreading_factor),
            ));
        }
        if let Err(e) = validate_curve(&self.current_curve) {
            out.push(v("current_curve", e));
        }
        out
    }
}

/// Time on air of one LoRa frame (datasheet formula), in seconds.
pub fn lora_airtime(cfg: &LoRaConfig, payload_len: usize) -> Result<f64> {
    if payload_len > MAX_PAYLOAD {
        return Err(Error::Argument(format!(
            "payload {payload_len} B exceeds the {MAX_PAYLOAD} B LoRa limit"
        )));
    }
    let sf = i64::from(cfg.spreading_factor);
    let crc = i64::from(cfg.crc_on);
    let ih = i64::from(!cfg.explicit_header);
    let de = i64::from(cfg.low_data_rate_opt);
    let cr = i64::from(cfg.coding_rate);

    let t_sym = cfg.symbol_time();
    let t_preamble = (f64::from(cfg.preamble_symbols) + 4.25) * t_sym;

    let num = 8 * payload_len as i64 - 4 * sf + 28 + 16 * crc - 20 * ih;
    let den = 4 * (sf - 2 * de);
    let blocks = if num > 0 { (num + den - 1) / den } else { 0 };
    let n_payload = 8 + (blocks * (cr + 4)).max(0);

    Ok(t_preamble + n_payload as f64 * t_sym)
}

/// Receiver sensitivity: thermal floor + bandwidth + noise figure + SNR floor.
pub fn lora_sensitivity(cfg: &LoRaConfig) -> Result<f64> {
    let snr = cfg
        .snr_required_db
        .get(&cfg.spreading_factor)
        .ok_or_else(|| Error::Config(format!("no SNR floor for SF{}", cfg.spreading_factor)))?;
    Ok(-174.0 + 10.0 * cfg.bandwidth_hz.log10() + cfg.noise_figure_db + snr)
}
