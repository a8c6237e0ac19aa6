use serde::Serialize;

use super::scenario::Scenario;
use crate::node::{min_bank_capacitance, required_charge, tx_feasibility, Feasibility};
use crate::energy::{deliverable_charge, CapacitorState};
use crate::Result;

/// Radio-bank sizing check for one scenario's packet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SizingReport {
    pub verdict: Feasibility,
    pub tx_current_ma: f64,
    pub airtime_s: f64,
    pub required_c: f64,
    pub deliverable_c: f64,
    pub v_interrupt: f64,
    pub v_min_operate: f64,
    pub min_capacitance_f: f64,
}

/// The bank discharges from its interrupt level to the regulated output
/// voltage; rail assist is ignored.
pub fn scenario_feasibility(sc: &Scenario) -> Result<SizingReport> {
    sc.validate()?;
    let bank_cfg = &sc.radio_ufop;
    let bank = CapacitorState::new(bank_cfg.capacitance_f, bank_cfg.interrupt_v, bank_cfg.clamp_voltage_v);
    let (v_hi, v_lo) = (bank_cfg.interrupt_v, bank_cfg.regulated_out_v);
    let i_tx = sc.radio.tx_current_ma()?;
    let airtime = sc.radio.airtime(sc.payload_len)?;
    Ok(SizingReport {
        verdict: tx_feasibility(&bank, v_hi, v_lo, i_tx, airtime)?,
        tx_current_ma: i_tx,
        airtime_s: airtime,
        required_c: required_charge(i_tx, airtime),
        deliverable_c: deliverable_charge(&bank, v_hi, v_lo)?,
        v_interrupt: v_hi,
        v_min_operate: v_lo,
        min_capacitance_f: min_bank_capacitance(i_tx, airtime, v_hi, v_lo),
    })
}
