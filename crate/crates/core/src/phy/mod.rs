//! Radio physical layer: airtime, sensitivity, channel, delivery and
//! transmit-current models for LoRa and narrowband FSK.

mod channel;
mod current;
mod fsk;
mod link;
mod lora;

pub use channel::{free_space_loss_db, path_loss, received_power_mean, ChannelModel, PL0_433MHZ_1M_DB};
pub use current::{tx_current, CurrentCurve};
pub use fsk::{default_cc1101_curve, fsk_airtime, FskConfig, FSK_POWER_RANGE_DBM};
pub use link::{
    link_margin, packet_energy, packet_rng, pdr_analytic, sample_packet_outcome, std_normal_cdf,
};
pub use lora::{
    default_lora_curve, default_snr_table, lora_airtime, lora_sensitivity, LoRaConfig,
    LORA_BANDWIDTHS_HZ, LORA_POWER_RANGE_DBM, MAX_PAYLOAD,
};

use serde::{Deserialize, Serialize};

use crate::{FieldViolation, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RadioModel {
    Lora(LoRaConfig),
    Fsk(FskConfig),
}

impl Default for RadioModel {
    fn default() -> Self {
        RadioModel::Lora(LoRaConfig::default())
    }
}

impl RadioModel {
    pub fn label(&self) -> &'static str {
        match self {
            RadioModel::Lora(_) => "lora",
            RadioModel::Fsk(_) => "fsk",
        }
    }

    pub fn tx_power_dbm(&self) -> f64 {
        match self {
            RadioModel::Lora(c) => c.tx_power_dbm,
            RadioModel::Fsk(c) => c.tx_power_dbm,
        }
    }

    pub fn set_tx_power_dbm(&mut self, p: f64) {
        match self {
            RadioModel::Lora(c) => c.tx_power_dbm = p,
            RadioModel::Fsk(c) => c.tx_power_dbm = p,
        }
    }

    /// Legal output power span of the radio.
    pub fn power_range_dbm(&self) -> (f64, f64) {
        match self {
            RadioModel::Lora(_) => LORA_POWER_RANGE_DBM,
            RadioModel::Fsk(_) => FSK_POWER_RANGE_DBM,
        }
    }

    pub fn current_curve(&self) -> &CurrentCurve {
        match self {
            RadioModel::Lora(c) => &c.current_curve,
            RadioModel::Fsk(c) => &c.current_curve,
        }
    }

    pub fn airtime(&self, payload_len: usize) -> Result<f64> {
        match self {
            RadioModel::Lora(c) => lora_airtime(c, payload_len),
            RadioModel::Fsk(c) => fsk_airtime(c, payload_len),
        }
    }

    pub fn sensitivity_dbm(&self) -> Result<f64> {
        match self {
            RadioModel::Lora(c) => lora_sensitivity(c),
            RadioModel::Fsk(c) => Ok(c.sensitivity_dbm),
        }
    }

    pub fn tx_current_ma(&self) -> Result<f64> {
        tx_current(self.current_curve(), self.tx_power_dbm())
    }

    pub fn validate(&self, prefix: &str) -> Vec<FieldViolation> {
        match self {
            RadioModel::Lora(c) => c.validate(prefix),
            RadioModel::Fsk(c) => c.validate(prefix),
        }
    }

    /// Short description recorded in output headers.
    pub fn describe(&self) -> String {
        match self {
            RadioModel::Lora(c) => format!(
                "lora sf={} bw_hz={} cr=4/{} preamble={} crc={} ldro={} tx_dbm={} nf_db={}",
                c.spreading_factor,
                c.bandwidth_hz,
                4 + c.coding_rate,
                c.preamble_symbols,
                c.crc_on,
                c.low_data_rate_opt,
                c.tx_power_dbm,
                c.noise_figure_db
            ),
            RadioModel::Fsk(c) => format!(
                "fsk bitrate_bps={} overhead_bytes={} sensitivity_dbm={} tx_dbm={}",
                c.bitrate_bps, c.overhead_bytes, c.sensitivity_dbm, c.tx_power_dbm
            ),
        }
    }
}

/// Expected delivery probability of `radio` over `ch` at distance `d_m`.
pub fn link_pdr(ch: &ChannelModel, radio: &RadioModel, d_m: f64) -> Result<f64> {
    let margin = link_margin(ch, radio.sensitivity_dbm()?, radio.tx_power_dbm(), d_m)?;
    Ok(pdr_analytic(margin, ch.shadowing_sigma_db))
}
