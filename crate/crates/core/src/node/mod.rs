//! Duty-cycled node state machine: boot, sleep, sense, transmit and listen,
//! with boot-loop and transmit-feasibility checks.

mod bootloop;
mod feasibility;
mod machine;

pub use bootloop::{count_boot_loops, detect_boot_loop};
pub use feasibility::{min_bank_capacitance, required_charge, tx_feasibility, Feasibility};
pub use machine::{node_step, NodeInputs, NodeParams, NodeStep};

use serde::{Deserialize, Serialize};

use crate::FieldViolation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodePhase {
    Off,
    Booting,
    Sleep,
    Sensing,
    Transmitting,
    SearchIdle,
    Receiving,
}

impl NodePhase {
    pub fn is_powered(self) -> bool {
        self != NodePhase::Off
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    #[default]
    Transmitter,
    Receiver,
}

/// Per-phase current draw and the fixed-length phase durations.
///
/// `Off` always draws nothing and has no entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurrentBudget {
    pub booting_ma: f64,
    pub sleep_ma: f64,
    /// Sensor plus MCU while sampling, drawn from the sensor bank.
    pub sensing_ma: f64,
    /// MCU draw on top of the radio's transmit current.
    pub tx_mcu_ma: f64,
    pub search_idle_ma: f64,
    pub receiving_ma: f64,
    pub boot_duration_s: f64,
    pub sense_duration_s: f64,
}

impl Default for CurrentBudget {
    fn default() -> Self {
        Self {
            booting_ma: 5.0,
            sleep_ma: 1.8,
            sensing_ma: 2.0,
            tx_mcu_ma: 0.0,
            search_idle_ma: 12.0,
            receiving_ma: 10.0,
            boot_duration_s: 0.1,
            sense_duration_s: 0.2,
        }
    }
}

impl CurrentBudget {
    pub fn validate(&self, prefix: &str) -> Vec<FieldViolation> {
        let mut out = Vec::new();
        for (name, value) in [
            ("booting_ma", self.booting_ma),
            ("sleep_ma", self.sleep_ma),
            ("sensing_ma", self.sensing_ma),
            ("tx_mcu_ma", self.tx_mcu_ma),
            ("search_idle_ma", self.search_idle_ma),
            ("receiving_ma", self.receiving_ma),
        ] {
            if !(value >= 0.0) {
                out.push(FieldViolation::new(format!("{prefix}.{name}"), "must be >= 0"));
            }
        }
        if self.sleep_ma > self.search_idle_ma {
            out.push(FieldViolation::new(
                format!("{prefix}.sleep_ma"),
                format!("must not exceed search_idle_ma ({})", self.search_idle_ma),
            ));
        }
        for (name, value) in [
            ("boot_duration_s", self.boot_duration_s),
            ("sense_duration_s", self.sense_duration_s),
        ] {
            if !(value > 0.0) {
                out.push(FieldViolation::new(format!("{prefix}.{name}"), "must be > 0"));
            }
        }
        out
    }
}

/// Current requested by a node for the next step, split by supply path.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Demand {
    /// Drawn straight from the main rail.
    pub rail_ma: f64,
    pub sensor_ma: f64,
    pub radio_ma: f64,
}

impl Demand {
    pub fn total(&self) -> f64 {
        self.rail_ma + self.sensor_ma + self.radio_ma
    }

    pub fn for_phase(phase: NodePhase, role: Role, budget: &CurrentBudget, tx_ma: f64) -> Self {
        let mut d = Demand::default();
        match (phase, role) {
            (NodePhase::Off, _) => {}
            (NodePhase::Booting, _) => d.rail_ma = budget.booting_ma,
            (NodePhase::Sleep, _) => d.rail_ma = budget.sleep_ma,
            (NodePhase::Sensing, _) => d.sensor_ma = budget.sensing_ma,
            (NodePhase::Transmitting, _) => {
                d.rail_ma = budget.tx_mcu_ma;
                d.radio_ma = tx_ma;
            }
            (NodePhase::SearchIdle, _) => d.rail_ma = budget.search_idle_ma,
            (NodePhase::Receiving, Role::Transmitter) => d.radio_ma = budget.receiving_ma,
            (NodePhase::Receiving, Role::Receiver) => d.rail_ma = budget.receiving_ma,
        }
        d
    }
}

/// Total draw of a phase in mA; `tx_ma` is the radio's transmit current.
pub fn phase_current(phase: NodePhase, budget: &CurrentBudget, tx_ma: f64) -> f64 {
    Demand::for_phase(phase, Role::Transmitter, budget, tx_ma).total()
}

/// One power-on of a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootRecord {
    pub time_s: f64,
    /// A full sense-and-transmit cycle finished before the next power loss.
    pub completed_cycle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    BootStarted,
    BootCompleted,
    SenseDone,
    TxStarted,
    TxCompleted,
    TxFailedUnderCurrent,
    TxFailedBankDepleted,
    Brownout,
    AckReceived,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::BootStarted => "BootStarted",
            EventKind::BootCompleted => "BootCompleted",
            EventKind::SenseDone => "SenseDone",
            EventKind::TxStarted => "TxStarted",
            EventKind::TxCompleted => "TxCompleted",
            EventKind::TxFailedUnderCurrent => "TxFailedUnderCurrent",
            EventKind::TxFailedBankDepleted => "TxFailedBankDepleted",
            EventKind::Brownout => "Brownout",
            EventKind::AckReceived => "AckReceived",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeEvent {
    pub time_s: f64,
    pub kind: EventKind,
    /// Packet sequence number for transmit-related events.
    pub packet: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub role: Role,
    pub phase: NodePhase,
    pub phase_elapsed: f64,
    /// Seconds until the next sense-and-transmit cycle may start.
    pub duty_timer: f64,
    pub packets_sent: u64,
    /// Transmissions started so far; the next packet's sequence number.
    pub tx_attempts: u64,
    pub boot_events: Vec<BootRecord>,
    /// Length of the current Receiving phase.
    pub rx_window_s: f64,
}

impl NodeState {
    pub fn new(role: Role) -> Self {
        Self {
            role,
            phase: NodePhase::Off,
            phase_elapsed: 0.0,
            duty_timer: 0.0,
            packets_sent: 0,
            tx_attempts: 0,
            boot_events: Vec::new(),
            rx_window_s: 0.0,
        }
    }

    /// Sequence number of the packet currently or most recently on air.
    pub fn current_packet(&self) -> Option<u64> {
        self.tx_attempts.checked_sub(1)
    }
}
