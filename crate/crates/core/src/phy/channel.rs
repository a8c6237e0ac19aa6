use serde::{Deserialize, Serialize};

use crate::{Error, FieldViolation, Result};

/// Log-distance path loss with log-normal shadowing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelModel {
    pub d0_m: f64,
    pub pl0_db: f64,
    pub exponent: f64,
    pub shadowing_sigma_db: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
}

/// Free-space loss at 1 m for 433 MHz, rounded to 0.1 dB.
pub const PL0_433MHZ_1M_DB: f64 = 25.2;

impl Default for ChannelModel {
    fn default() -> Self {
        Self::line_of_sight()
    }
}

impl ChannelModel {
    pub fn line_of_sight() -> Self {
        Self {
            d0_m: 1.0,
            pl0_db: PL0_433MHZ_1M_DB,
            exponent: 2.0,
            shadowing_sigma_db: 2.0,
            tx_gain_dbi: 0.0,
            rx_gain_dbi: 0.0,
        }
    }

    pub fn non_line_of_sight() -> Self {
        Self {
            exponent: 3.0,
            shadowing_sigma_db: 6.0,
            ..Self::line_of_sight()
        }
    }

    pub fn validate(&self, prefix: &str) -> Vec<FieldViolation> {
        let mut out = Vec::new();
        if !(self.d0_m > 0.0) {
            out.push(FieldViolation::new(format!("{prefix}.d0_m"), "must be > 0"));
        }
        if !(self.exponent > 0.0) {
            out.push(FieldViolation::new(format!("{prefix}.exponent"), "must be > 0"));
        }
        if !(self.shadowing_sigma_db >= 0.0) {
            out.push(FieldViolation::new(
                format!("{prefix}.shadowing_sigma_db"),
                "must be >= 0",
            ));
        }
        out
    }
}

/// Friis free-space loss in dB at distance `d_m`.
pub fn free_space_loss_db(frequency_hz: f64, d_m: f64) -> f64 {
    let wavelength = 299_792_458.0 / frequency_hz;
    20.0 * (4.0 * std::f64::consts::PI * d_m / wavelength).log10()
}

/// Mean path loss (dB) at `d_m`, shadowing excluded.
pub fn path_loss(ch: &ChannelModel, d_m: f64) -> Result<f64> {
    if !(d_m >= ch.d0_m) {
        return Err(Error::Argument(format!(
            "distance {d_m} m is inside the reference distance {} m",
            ch.d0_m
        )));
    }
    Ok(ch.pl0_db + 10.0 * ch.exponent * (d_m / ch.d0_m).log10())
}

pub fn received_power_mean(ch: &ChannelModel, ptx_dbm: f64, d_m: f64) -> Result<f64> {
    Ok(ptx_dbm + ch.tx_gain_dbi + ch.rx_gain_dbi - path_loss(ch, d_m)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch() -> ChannelModel {
        ChannelModel {
            shadowing_sigma_db: 0.0,
            ..ChannelModel::line_of_sight()
        }
    }

    #[test]
    fn reference_distance_gives_pl0() {
        assert_eq!(path_loss(&ch(), 1.0).unwrap(), 25.2);
        assert_eq!(received_power_mean(&ch(), 7.0, 1.0).unwrap(), 7.0 - 25.2);
    }

    #[test]
    fn log_distance_values() {
        assert!((path_loss(&ch(), 100.0).unwrap() - 65.2).abs() < 1e-12);
        assert!((path_loss(&ch(), 1000.0).unwrap() - 85.2).abs() < 1e-12);
        assert!((received_power_mean(&ch(), 5.0, 100.0).unwrap() - -60.2).abs() < 1e-12);
    }

    #[test]
    fn power_is_additive() {
        let a = received_power_mean(&ch(), 5.0, 321.0).unwrap();
        let b = received_power_mean(&ch(), 8.0, 321.0).unwrap();
        assert!((b - a - 3.0).abs() < 1e-12);
    }

    #[test]
    fn inside_reference_distance_is_error() {
        assert!(matches!(path_loss(&ch(), 0.5), Err(Error::Argument(_))));
    }

    #[test]
    fn pl0_matches_free_space_at_433mhz() {
        let fs = free_space_loss_db(433e6, 1.0);
        assert!((fs - PL0_433MHZ_1M_DB).abs() < 0.05, "{fs}");
    }
}
