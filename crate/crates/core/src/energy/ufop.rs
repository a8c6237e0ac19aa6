use serde::{Deserialize, Serialize};

use super::capacitor::CapacitorState;
use crate::{Error, Result};

/// Slack for floating-point comparison against interrupt thresholds.
const V_EPS: f64 = 1e-9;

/// Static description of one federated peripheral bank, as it appears in a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UfopConfig {
    pub name: String,
    pub charge_start_v: f64,
    pub interrupt_v: f64,
    pub capacitance_f: f64,
    #[serde(default)]
    pub initial_voltage_v: f64,
    #[serde(default = "default_clamp")]
    pub clamp_voltage_v: f64,
    /// Limit of the gating element in series with the bank (both directions).
    #[serde(default = "default_pass_limit")]
    pub pass_limit_ma: f64,
    /// Constant-current charger setting; the effective charge rate is further
    /// capped by `pass_limit_ma`.
    #[serde(default = "default_charge_current")]
    pub charge_current_ma: f64,
    #[serde(default = "default_regulated_out")]
    pub regulated_out_v: f64,
    #[serde(default = "default_dropout")]
    pub dropout_v: f64,
}

fn default_clamp() -> f64 {
    5.1
}
fn default_pass_limit() -> f64 {
    20.0
}
fn default_charge_current() -> f64 {
    20.0
}
fn default_regulated_out() -> f64 {
    3.0
}
fn default_dropout() -> f64 {
    0.1
}

impl UfopConfig {
    /// Radio bank: 100 uF, charges from 3.3 V, interrupt at 3.5 V.
    pub fn radio() -> Self {
        Self {
            name: "radio".into(),
            charge_start_v: 3.3,
            interrupt_v: 3.5,
            capacitance_f: 100e-6,
            initial_voltage_v: 0.0,
            clamp_voltage_v: default_clamp(),
            pass_limit_ma: default_pass_limit(),
            charge_current_ma: default_charge_current(),
            regulated_out_v: default_regulated_out(),
            dropout_v: default_dropout(),
        }
    }

    /// Sensor bank: 22 uF, charges from 3.2 V, interrupt at 3.3 V.
    pub fn sensor() -> Self {
        Self {
            name: "sensor".into(),
            charge_start_v: 3.2,
            interrupt_v: 3.3,
            capacitance_f: 22e-6,
            ..Self::radio()
        }
    }

    pub fn validate(&self, prefix: &str) -> Vec<crate::FieldViolation> {
        use crate::FieldViolation as V;
        let mut out = Vec::new();
        if !(self.charge_start_v < self.interrupt_v) {
            out.push(V::new(
                format!("{prefix}.charge_start_v"),
                format!(
                    "must be below interrupt_v ({} >= {})",
                    self.charge_start_v, self.interrupt_v
                ),
            ));
        }
        if !(self.capacitance_f > 0.0) {
            out.push(V::new(format!("{prefix}.capacitance_f"), "must be > 0"));
        }
        if !(self.initial_voltage_v >= 0.0 && self.initial_voltage_v <= self.clamp_voltage_v) {
            out.push(V::new(
                format!("{prefix}.initial_voltage_v"),
                "must lie within [0, clamp_voltage_v]",
            ));
        }
        if !(self.interrupt_v <= self.clamp_voltage_v) {
            out.push(V::new(format!("{prefix}.interrupt_v"), "must not exceed clamp_voltage_v"));
        }
        if !(self.pass_limit_ma >= 0.0) {
            out.push(V::new(format!("{prefix}.pass_limit_ma"), "must be >= 0"));
        }
        if !(self.charge_current_ma >= 0.0) {
            out.push(V::new(format!("{prefix}.charge_current_ma"), "must be >= 0"));
        }
        if !(self.regulated_out_v > 0.0) {
            out.push(V::new(format!("{prefix}.regulated_out_v"), "must be > 0"));
        }
        if !(self.dropout_v >= 0.0) {
            out.push(V::new(format!("{prefix}.dropout_v"), "must be >= 0"));
        }
        out
    }

    pub fn build(&self) -> Result<UfopUnit> {
        let errs = self.validate(&self.name);
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        Ok(UfopUnit {
            name: self.name.clone(),
            charge_start_v: self.charge_start_v,
            interrupt_v: self.interrupt_v,
            bank: CapacitorState::new(self.capacitance_f, self.initial_voltage_v, self.clamp_voltage_v),
            gate_closed: false,
            pass_limit_ma: self.pass_limit_ma,
            charge_current_ma: self.charge_current_ma,
            regulated_out_v: self.regulated_out_v,
            dropout_v: self.dropout_v,
        })
    }
}

/// Runtime state of a federated peripheral bank.
#[derive(Debug, Clone, PartialEq)]
pub struct UfopUnit {
    pub name: String,
    pub charge_start_v: f64,
    pub interrupt_v: f64,
    pub bank: CapacitorState,
    /// Closed gate = the peripheral is drawing from the bank.
    pub gate_closed: bool,
    pub pass_limit_ma: f64,
    pub charge_current_ma: f64,
    pub regulated_out_v: f64,
    pub dropout_v: f64,
}

/// How well a peripheral was supplied during a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupplyStatus {
    #[default]
    Ok,
    /// Demand exceeded what the supply path can pass.
    UnderCurrent,
    /// The bank fell below the regulator's minimum input.
    Collapsed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UfopReport {
    pub interrupt: bool,
    pub delivered_ma: f64,
    pub charge_ma: f64,
    pub under_supplied: bool,
    pub status: SupplyStatus,
    pub bank_mean_voltage: f64,
}

impl UfopUnit {
    pub fn interrupt(&self) -> bool {
        self.bank.voltage + V_EPS >= self.interrupt_v
    }

    /// Lowest bank voltage at which the output regulator still holds its level.
    pub fn min_operate_v(&self) -> f64 {
        self.regulated_out_v + self.dropout_v
    }
}

/// Advance a bank by `dt` with no upstream current ceiling.
pub fn ufop_step(unit: &UfopUnit, rail_v: f64, load_demand_ma: f64, dt: f64) -> (UfopUnit, UfopReport) {
    ufop_step_limited(unit, rail_v, load_demand_ma, f64::INFINITY, dt)
}

/// Advance a bank by `dt`.
///
/// `supply_ceiling_ma` caps how much the rail can feed the charger this step
/// (the engine uses it to keep the rail above `charge_start_v`).
pub fn ufop_step_limited(
    unit: &UfopUnit,
    rail_v: f64,
    load_demand_ma: f64,
    supply_ceiling_ma: f64,
    dt: f64,
) -> (UfopUnit, UfopReport) {
    let bank = &unit.bank;
    let drawing = unit.gate_closed && load_demand_ma > 0.0;

    let mut delivered = 0.0;
    let mut regulator_alive = true;
    if drawing {
        if bank.voltage + V_EPS < unit.min_operate_v() {
            regulator_alive = false;
        } else {
            delivered = load_demand_ma.min(unit.pass_limit_ma);
        }
    }

    let charge = if rail_v >= unit.charge_start_v {
        let path_max = unit
            .pass_limit_ma
            .min(unit.charge_current_ma)
            .min(supply_ceiling_ma)
            .max(0.0);
        // current that would leave the bank exactly at the rail level
        let room = bank.capacitance * (rail_v - bank.voltage) / dt * 1000.0 + delivered;
        path_max.min(room).max(0.0)
    } else {
        0.0
    };

    delivered = delivered.min(bank.charge() / dt * 1000.0 + charge);

    let step = bank.step(charge - delivered, dt);
    let mut next = unit.clone();
    next.bank = step.next;

    if drawing && next.bank.voltage + V_EPS < unit.min_operate_v() {
        regulator_alive = false;
    }

    let status = if !drawing {
        SupplyStatus::Ok
    } else if load_demand_ma > unit.pass_limit_ma {
        SupplyStatus::UnderCurrent
    } else if !regulator_alive {
        SupplyStatus::Collapsed
    } else {
        SupplyStatus::Ok
    };

    let report = UfopReport {
        interrupt: next.interrupt(),
        delivered_ma: delivered,
        charge_ma: charge,
        under_supplied: drawing && delivered < load_demand_ma,
        status,
        bank_mean_voltage: step.mean_voltage,
    };
    (next, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn radio_at(v: f64) -> UfopUnit {
        let mut u = UfopConfig::radio().build().unwrap();
        u.bank.voltage = v;
        u
    }

    #[test]
    fn full_radio_bank_raises_interrupt() {
        let (_, r) = ufop_step(&radio_at(3.5), 3.4, 0.0, 1e-3);
        assert!(r.interrupt);
        assert_eq!(r.charge_ma, 0.0);
    }

    #[test]
    fn sensor_waits_for_charge_start() {
        let mut u = UfopConfig::sensor().build().unwrap();
        u.bank.voltage = 1.0;
        let (next, r) = ufop_step(&u, 3.0, 0.0, 1e-3);
        assert_eq!(r.charge_ma, 0.0);
        assert!(!r.interrupt);
        assert_eq!(next.bank.voltage, 1.0);
    }

    #[test]
    fn pass_limit_clips_load() {
        let mut u = radio_at(3.5);
        u.gate_closed = true;
        let (_, r) = ufop_step(&u, 3.4, 25.0, 1e-3);
        assert_eq!(r.delivered_ma, 20.0);
        assert!(r.under_supplied);
        assert_eq!(r.status, SupplyStatus::UnderCurrent);
    }

    #[test]
    fn charges_at_constant_current_until_rail() {
        let u = radio_at(1.0);
        let (next, r) = ufop_step(&u, 4.0, 0.0, 1e-3);
        assert_eq!(r.charge_ma, 20.0);
        assert!((next.bank.voltage - 1.2).abs() < 1e-12);

        let near = radio_at(3.99);
        let (next, r) = ufop_step(&near, 4.0, 0.0, 1e-3);
        assert!(r.charge_ma < 20.0);
        assert!((next.bank.voltage - 4.0).abs() < 1e-12);
    }

    #[test]
    fn collapses_below_regulator_headroom() {
        let mut u = radio_at(3.12);
        u.gate_closed = true;
        u.charge_start_v = 10.0; // no recharge
        let (next, r) = ufop_step(&u, 0.0, 15.0, 1e-3);
        assert!(next.bank.voltage < 3.1);
        assert_eq!(r.status, SupplyStatus::Collapsed);
        let (_, r2) = ufop_step(&next, 0.0, 15.0, 1e-3);
        assert_eq!(r2.delivered_ma, 0.0);
    }

    proptest! {
        #[test]
        fn never_exceeds_limits(
            v in 0.0f64..5.1, rail in 0.0f64..5.1, load in 0.0f64..200.0,
            pass in 0.0f64..150.0, charge in 0.0f64..150.0, closed in any::<bool>(),
            ceiling in 0.0f64..200.0, dt in 1e-4f64..1e-2,
        ) {
            let mut u = radio_at(v);
            u.pass_limit_ma = pass;
            u.charge_current_ma = charge;
            u.gate_closed = closed;
            let (next, r) = ufop_step_limited(&u, rail, load, ceiling, dt);
            prop_assert!(r.delivered_ma <= pass + 1e-12);
            prop_assert!(r.charge_ma <= pass + 1e-12);
            prop_assert!(r.charge_ma <= ceiling + 1e-12);
            prop_assert!(next.bank.voltage <= next.bank.clamp_voltage);
            if r.charge_ma > 0.0 {
                prop_assert!(next.bank.voltage <= rail.max(v) + 1e-9);
            }
            prop_assert_eq!(r.interrupt, next.bank.voltage + 1e-9 >= u.interrupt_v);
        }
    }
}
