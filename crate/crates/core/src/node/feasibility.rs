use serde::Serialize;

use crate::energy::{deliverable_charge, CapacitorState};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Feasibility {
    Feasible { margin_c: f64 },
    Infeasible { shortfall_c: f64 },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }
}

/// Charge (coulombs) one transmission draws.
pub fn required_charge(i_tx_ma: f64, airtime_s: f64) -> f64 {
    i_tx_ma / 1000.0 * airtime_s
}

/// Can the bank alone carry one packet, discharging from `v_interrupt` to
/// `v_min_operate`? Rail assist is ignored (worst case).
pub fn tx_feasibility(
    bank: &CapacitorState,
    v_interrupt: f64,
    v_min_operate: f64,
    i_tx_ma: f64,
    airtime_s: f64,
) -> Result<Feasibility> {
    let required = required_charge(i_tx_ma, airtime_s);
    let available = deliverable_charge(bank, v_interrupt, v_min_operate)?;
    Ok(if available >= required {
        Feasibility::Feasible {
            margin_c: available - required,
        }
    } else {
        Feasibility::Infeasible {
            shortfall_c: required - available,
        }
    })
}

/// Smallest bank (farads) that would make the transmission feasible.
pub fn min_bank_capacitance(i_tx_ma: f64, airtime_s: f64, v_interrupt: f64, v_min_operate: f64) -> f64 {
    required_charge(i_tx_ma, airtime_s) / (v_interrupt - v_min_operate)
}
