use serde::{Deserialize, Serialize};

use super::current::{validate_curve, CurrentCurve};
use crate::{Error, FieldViolation, Result};

pub const FSK_POWER_RANGE_DBM: (f64, f64) = (-30.0, 10.0);

/// Narrowband FSK transceiver (CC1101 class) at a fixed data rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FskConfig {
    pub bitrate_bps: f64,
    /// Preamble, sync word, length, address and CRC bytes.
    pub overhead_bytes: u32,
    pub tx_power_dbm: f64,
    pub sensitivity_dbm: f64,
    pub frequency_hz: f64,
    pub current_curve: CurrentCurve,
}

impl Default for FskConfig {
    fn default() -> Self {
        Self {
            bitrate_bps: 38_400.0,
            overhead_bytes: 12,
            tx_power_dbm: 5.0,
            sensitivity_dbm: -104.0,
            frequency_hz: 433e6,
            current_curve: default_cc1101_curve(),
        }
    }
}

/// CC1101 transmit current at 433 MHz (datasheet-typical shape).
pub fn default_cc1101_curve() -> CurrentCurve {
    CurrentCurve(vec![
        (-30.0, 12.3),
        (-20.0, 13.5),
        (-10.0, 14.5),
        (0.0, 16.9),
        (5.0, 20.0),
        (7.0, 25.8),
        (10.0, 29.2),
    ])
}

impl FskConfig {
    pub fn validate(&self, prefix: &str) -> Vec<FieldViolation> {
        let mut out = Vec::new();
        let v = |f: &str, m: String| FieldViolation::new(format!("{prefix}.{f}"), m);
        if !(self.bitrate_bps > 0.0) {
            out.push(v("bitrate_bps", "must be > 0".into()));
        }
        let (lo, hi) = FSK_POWER_RANGE_DBM;
        if !(self.tx_power_dbm >= lo && self.tx_power_dbm <= hi) {
            out.push(v("tx_power_dbm", format!("{} not in [{lo}, {hi}]", self.tx_power_dbm)));
        }
        if !(self.frequency_hz > 0.0) {
            out.push(v("frequency_hz", "must be > 0".into()));
        }
        if let Err(e) = validate_curve(&self.current_curve) {
            out.push(v("current_curve", e));
        }
        out
    }
}

pub fn fsk_airtime(cfg: &FskConfig, payload_len: usize) -> Result<f64> {
    if !(cfg.bitrate_bps > 0.0) {
        return Err(Error::Config(format!("FSK bitrate {} must be > 0", cfg.bitrate_bps)));
    }
    Ok(8.0 * (payload_len as f64 + f64::from(cfg.overhead_bytes)) / cfg.bitrate_bps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn airtime_reference() {
        let t = fsk_airtime(&FskConfig::default(), 20).unwrap();
        assert!((t - 8.0 * 32.0 / 38400.0).abs() < 1e-15);
        assert!((t * 1e3 - 6.667).abs() < 1e-3);
    }

    #[test]
    fn empty_payload_is_overhead_only() {
        let c = FskConfig::default();
        assert_eq!(fsk_airtime(&c, 0).unwrap(), 8.0 * 12.0 / 38400.0);
    }

    #[test]
    fn doubling_bitrate_halves_airtime() {
        let c = FskConfig::default();
        let fast = FskConfig {
            bitrate_bps: 2.0 * c.bitrate_bps,
            ..c.clone()
        };
        for pl in [0, 7, 20, 61] {
            assert_eq!(fsk_airtime(&c, pl).unwrap(), 2.0 * fsk_airtime(&fast, pl).unwrap());
        }
    }

    #[test]
    fn zero_bitrate_is_config_error() {
        let c = FskConfig {
            bitrate_bps: 0.0,
            ..Default::default()
        };
        assert!(matches!(fsk_airtime(&c, 1), Err(Error::Config(_))));
    }

    #[test]
    fn power_outside_cc1101_span_fails_validation() {
        let c = FskConfig {
            tx_power_dbm: 12.0,
            ..Default::default()
        };
        assert_eq!(c.validate("radio").len(), 1);
    }
}
