use serde::{Deserialize, Serialize};

/// An ideal capacitor with a Zener-style upper clamp.
///
/// Voltage stays inside `[0, clamp_voltage]`. Charge pushed above the clamp is
/// diverted and accumulated in `shunted_charge`; charge requested below zero
/// could not be supplied and is accumulated in `unmet_charge`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacitorState {
    pub capacitance: f64,
    pub voltage: f64,
    pub clamp_voltage: f64,
    pub shunted_charge: f64,
    pub unmet_charge: f64,
}

/// Outcome of one explicit-Euler step with constant net current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapStep {
    pub next: CapacitorState,
    /// Time-averaged terminal voltage over the step. Multiplying any branch
    /// current by `mean_voltage * dt` gives the exact energy that branch moved.
    pub mean_voltage: f64,
    pub shunted: f64,
    pub unmet: f64,
}

impl CapacitorState {
    pub fn new(capacitance: f64, voltage: f64, clamp_voltage: f64) -> Self {
        Self {
            capacitance,
            voltage,
            clamp_voltage,
            shunted_charge: 0.0,
            unmet_charge: 0.0,
        }
    }

    pub fn charge(&self) -> f64 {
        self.capacitance * self.voltage
    }

    pub fn energy(&self) -> f64 {
        0.5 * self.capacitance * self.voltage * self.voltage
    }

    /// Advance by `dt` seconds with `net_current_ma` flowing in (negative = out).
    pub fn step(&self, net_current_ma: f64, dt: f64) -> CapStep {
        let current = net_current_ma / 1000.0;
        let dq = current * dt;
        let q0 = self.charge();
        let q_max = self.capacitance * self.clamp_voltage;
        let q1 = q0 + dq;

        let mut next = *self;
        let (mean_voltage, shunted, unmet);
        if q1 > q_max {
            // Linear rise to the clamp, then flat for the rest of the step.
            let t_hit = if current > 0.0 {
                ((q_max - q0) / current).clamp(0.0, dt)
            } else {
                0.0
            };
            mean_voltage = (t_hit * 0.5 * (self.voltage + self.clamp_voltage)
                + (dt - t_hit) * self.clamp_voltage)
                / dt;
            shunted = q1 - q_max;
            unmet = 0.0;
            next.voltage = self.clamp_voltage;
        } else if q1 < 0.0 {
            let t_hit = if current < 0.0 {
                (q0 / -current).clamp(0.0, dt)
            } else {
                0.0
            };
            mean_voltage = t_hit * 0.5 * self.voltage / dt;
            shunted = 0.0;
            unmet = -q1;
            next.voltage = 0.0;
        } else {
            next.voltage = q1 / self.capacitance;
            mean_voltage = 0.5 * (self.voltage + next.voltage);
            shunted = 0.0;
            unmet = 0.0;
        }
        next.shunted_charge += shunted;
        next.unmet_charge += unmet;
        CapStep {
            next,
            mean_voltage,
            shunted,
            unmet,
        }
    }
}

/// Pure form of [`CapacitorState::step`] returning only the next state.
pub fn capacitor_step(cap: &CapacitorState, net_current_ma: f64, dt: f64) -> CapacitorState {
    cap.step(net_current_ma, dt).next
}

/// Charge (coulombs) that can be drawn while the bank falls from `v_hi` to `v_lo`.
pub fn deliverable_charge(bank: &CapacitorState, v_hi: f64, v_lo: f64) -> crate::Result<f64> {
    if v_lo >= v_hi {
        return Err(crate::Error::Argument(format!(
            "empty voltage window: v_lo {v_lo} V must be below v_hi {v_hi} V"
        )));
    }
    if v_hi > bank.clamp_voltage {
        return Err(crate::Error::Argument(format!(
            "v_hi {v_hi} V exceeds the bank clamp {} V",
            bank.clamp_voltage
        )));
    }
    Ok(bank.capacitance * (v_hi - v_lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const UF: f64 = 1e-6;

    #[test]
    fn charges_by_i_dt_over_c() {
        let cap = CapacitorState::new(100.0 * UF, 2.0, 5.1);
        let next = capacitor_step(&cap, 70.0, 1e-3);
        assert!((next.voltage - 2.7).abs() < 1e-12);
        assert_eq!(next.shunted_charge, 0.0);
    }

    #[test]
    fn zero_current_holds() {
        let cap = CapacitorState::new(100.0 * UF, 2.0, 5.1);
        assert_eq!(capacitor_step(&cap, 0.0, 1.0).voltage, 2.0);
    }

    #[test]
    fn zener_clamp_shunts_excess() {
        let cap = CapacitorState::new(100.0 * UF, 5.05, 5.1);
        let next = capacitor_step(&cap, 70.0, 1e-3);
        assert_eq!(next.voltage, 5.1);
        let expected = (0.7 - 0.05) * 1e-4;
        assert!((next.shunted_charge - expected).abs() < 1e-15);
    }

    #[test]
    fn floor_at_zero_records_unmet() {
        let cap = CapacitorState::new(10.0 * UF, 0.1, 5.1);
        let step = cap.step(-10.0, 1e-3);
        assert_eq!(step.next.voltage, 0.0);
        assert!((step.unmet - (1e-5 - 1e-6)).abs() < 1e-15);
        // energy leaves only while the voltage is above zero
        let e_out = 10e-3 * 1e-3 * step.mean_voltage;
        assert!((e_out - cap.energy()).abs() < 1e-15);
    }

    #[test]
    fn deliverable_charge_window() {
        let bank = CapacitorState::new(100.0 * UF, 0.0, 5.1);
        assert!((deliverable_charge(&bank, 3.5, 3.0).unwrap() - 5.0e-5).abs() < 1e-15);
        let big = CapacitorState::new(1000.0 * UF, 0.0, 5.1);
        assert!((deliverable_charge(&big, 3.5, 3.0).unwrap() - 5.0e-4).abs() < 1e-15);
        assert!(deliverable_charge(&bank, 3.0, 3.0).is_err());
        assert!(deliverable_charge(&bank, 6.0, 3.0).is_err());
    }

    proptest! {
        #[test]
        fn charge_is_conserved(
            cap_uf in 1.0f64..2000.0,
            v0 in 0.0f64..5.1,
            currents in prop::collection::vec(-200.0f64..200.0, 1..200),
            dt in 1e-4f64..1e-2,
        ) {
            let start = CapacitorState::new(cap_uf * UF, v0, 5.1);
            let mut cap = start;
            let mut q_in = 0.0;
            let mut q_out = 0.0;
            for i in currents {
                if i >= 0.0 { q_in += i / 1000.0 * dt } else { q_out += -i / 1000.0 * dt }
                cap = capacitor_step(&cap, i, dt);
                prop_assert!(cap.voltage >= 0.0 && cap.voltage <= cap.clamp_voltage);
            }
            let lhs = q_in - q_out - cap.shunted_charge + cap.unmet_charge;
            let rhs = cap.capacitance * (cap.voltage - start.voltage);
            let scale = q_in.max(q_out).max(cap.charge()).max(1e-12);
            prop_assert!((lhs - rhs).abs() / scale <= 1e-9, "lhs {lhs} rhs {rhs}");
        }

        #[test]
        fn step_energy_is_exact(
            cap_uf in 1.0f64..2000.0,
            v0 in 0.0f64..5.1,
            i in -300.0f64..300.0,
            dt in 1e-4f64..1e-2,
        ) {
            let cap = CapacitorState::new(cap_uf * UF, v0, 5.1);
            let s = cap.step(i, dt);
            let moved = i / 1000.0 * dt * s.mean_voltage;
            let stored = s.next.energy() - cap.energy() + s.shunted * cap.clamp_voltage;
            prop_assert!((moved - stored).abs() <= 1e-9 * moved.abs().max(cap.energy()).max(1e-12));
        }

        #[test]
        fn deliverable_is_linear(c in 1.0f64..5000.0, lo in 0.0f64..3.0, w in 0.01f64..2.0, k in 0.1f64..10.0) {
            let a = CapacitorState::new(c * UF, 0.0, 5.1);
            let b = CapacitorState::new(k * c * UF, 0.0, 5.1);
            let qa = deliverable_charge(&a, lo + w, lo).unwrap();
            let qb = deliverable_charge(&b, lo + w, lo).unwrap();
            prop_assert!((qb - k * qa).abs() <= 1e-12 * qb.abs().max(1e-15));
        }
    }
}
