//! Harvesters, storage capacitors, the main-rail hysteresis gate and the
//! per-peripheral federated banks.

mod capacitor;
mod comparator;
mod harvest;
mod ufop;

pub use capacitor::{capacitor_step, deliverable_charge, CapStep, CapacitorState};
pub use comparator::{comparator_step, HysteresisComparator};
pub use harvest::{
    harvester_current, load_trace, parse_trace, HarvestProfile, HarvestSource, INDOOR_IRRADIANCE,
    PANEL_RATED_MA,
};
pub use ufop::{ufop_step, ufop_step_limited, SupplyStatus, UfopConfig, UfopReport, UfopUnit};

use serde::{Deserialize, Serialize};

/// Scenario-level description of a plain storage capacitor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitorConfig {
    pub capacitance_f: f64,
    #[serde(default = "default_clamp")]
    pub clamp_voltage_v: f64,
    #[serde(default)]
    pub initial_voltage_v: f64,
}

fn default_clamp() -> f64 {
    5.1
}

impl Default for CapacitorConfig {
    /// 100 uF main capacitor behind a 5.1 V Zener.
    fn default() -> Self {
        Self {
            capacitance_f: 100e-6,
            clamp_voltage_v: 5.1,
            initial_voltage_v: 0.0,
        }
    }
}

impl CapacitorConfig {
    pub fn build(&self) -> CapacitorState {
        CapacitorState::new(self.capacitance_f, self.initial_voltage_v, self.clamp_voltage_v)
    }
}
