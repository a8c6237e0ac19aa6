use super::{BootRecord, CurrentBudget, Demand, EventKind, NodeEvent, NodePhase, NodeState, Role};
use crate::energy::SupplyStatus;

/// Conditions observed during the step that just ran.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeInputs {
    /// Time at the end of the step.
    pub now_s: f64,
    pub rail_on: bool,
    pub radio_interrupt: bool,
    pub sensor_interrupt: bool,
    pub radio_status: SupplyStatus,
    pub sensor_status: SupplyStatus,
    /// A frame of this total length (data plus acknowledgement) began while
    /// the node was listening. Receiver role only.
    pub incoming_s: Option<f64>,
    /// The peer acknowledged the packet currently in flight.
    pub ack_available: bool,
}

impl NodeInputs {
    /// Rail on, both banks full and healthy.
    pub fn powered(now_s: f64) -> Self {
        Self {
            now_s,
            rail_on: true,
            radio_interrupt: true,
            sensor_interrupt: true,
            radio_status: SupplyStatus::Ok,
            sensor_status: SupplyStatus::Ok,
            incoming_s: None,
            ack_available: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeParams {
    pub budget: CurrentBudget,
    pub duty_period_s: f64,
    pub tx_airtime_s: f64,
    pub tx_current_ma: f64,
    /// Listen window for the acknowledgement; `None` skips it.
    pub ack_window_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeStep {
    pub state: NodeState,
    pub events: Vec<NodeEvent>,
    /// Current the node will draw during the next step.
    pub demand: Demand,
}

fn enter(s: &mut NodeState, phase: NodePhase) {
    s.phase = phase;
    s.phase_elapsed = 0.0;
}

fn mark_cycle_completed(s: &mut NodeState) {
    if let Some(last) = s.boot_events.last_mut() {
        last.completed_cycle = true;
    }
}

/// Advance the node by one step of `dt` seconds.
///
/// Takes the state by value so long boot histories are not copied each step.
pub fn node_step(state: NodeState, inp: &NodeInputs, params: &NodeParams, dt: f64) -> NodeStep {
    let mut s = state;
    let mut events = Vec::new();
    let eps = dt * 1e-6;
    let budget = &params.budget;
    let mut emit = |kind, packet| {
        events.push(NodeEvent {
            time_s: inp.now_s,
            kind,
            packet,
        })
    };

    if !inp.rail_on {
        if s.phase.is_powered() {
            if s.phase == NodePhase::Transmitting && inp.radio_status == SupplyStatus::Collapsed {
                emit(EventKind::TxFailedBankDepleted, s.current_packet());
            }
            emit(EventKind::Brownout, None);
            enter(&mut s, NodePhase::Off);
        }
    } else if s.phase == NodePhase::Off {
        enter(&mut s, NodePhase::Booting);
        s.duty_timer = 0.0;
        s.boot_events.push(BootRecord {
            time_s: inp.now_s,
            completed_cycle: false,
        });
        emit(EventKind::BootStarted, None);
    } else {
        s.phase_elapsed += dt;
        if s.phase != NodePhase::Booting {
            s.duty_timer = (s.duty_timer - dt).max(0.0);
        }
        let done = |limit: f64| s.phase_elapsed >= limit - eps;
        match (s.phase, s.role) {
            (NodePhase::Booting, role) => {
                if done(budget.boot_duration_s) {
                    emit(EventKind::BootCompleted, None);
                    match role {
                        Role::Transmitter => {
                            enter(&mut s, NodePhase::Sleep);
                            s.duty_timer = 0.0;
                        }
                        Role::Receiver => {
                            // listening is the receiver's whole duty
                            mark_cycle_completed(&mut s);
                            enter(&mut s, NodePhase::SearchIdle);
                        }
                    }
                }
            }
            (NodePhase::Sleep, _) => {
                if s.duty_timer <= eps && inp.sensor_interrupt {
                    enter(&mut s, NodePhase::Sensing);
                    s.duty_timer = params.duty_period_s;
                }
            }
            (NodePhase::Sensing, _) => {
                if inp.sensor_status != SupplyStatus::Ok {
                    enter(&mut s, NodePhase::Sleep);
                } else if done(budget.sense_duration_s) {
                    emit(EventKind::SenseDone, None);
                    if inp.radio_interrupt {
                        let seq = s.tx_attempts;
                        s.tx_attempts += 1;
                        enter(&mut s, NodePhase::Transmitting);
                        emit(EventKind::TxStarted, Some(seq));
                    } else {
                        enter(&mut s, NodePhase::Sleep);
                    }
                }
            }
            (NodePhase::Transmitting, _) => {
                let seq = s.current_packet();
                match inp.radio_status {
                    SupplyStatus::UnderCurrent => {
                        emit(EventKind::TxFailedUnderCurrent, seq);
                        enter(&mut s, NodePhase::Sleep);
                    }
                    SupplyStatus::Collapsed => {
                        emit(EventKind::TxFailedBankDepleted, seq);
                        enter(&mut s, NodePhase::Sleep);
                    }
                    SupplyStatus::Ok => {
                        if done(params.tx_airtime_s) {
                            s.packets_sent += 1;
                            mark_cycle_completed(&mut s);
                            emit(EventKind::TxCompleted, seq);
                            match params.ack_window_s {
                                Some(w) => {
                                    enter(&mut s, NodePhase::Receiving);
                                    s.rx_window_s = w;
                                }
                                None => enter(&mut s, NodePhase::Sleep),
                            }
                        }
                    }
                }
            }
            (NodePhase::Receiving, Role::Transmitter) => {
                if inp.radio_status != SupplyStatus::Ok {
                    enter(&mut s, NodePhase::Sleep);
                } else if done(s.rx_window_s) {
                    if inp.ack_available {
                        emit(EventKind::AckReceived, s.current_packet());
                    }
                    enter(&mut s, NodePhase::Sleep);
                }
            }
            (NodePhase::SearchIdle, _) => {
                if let Some(w) = inp.incoming_s {
                    enter(&mut s, NodePhase::Receiving);
                    s.rx_window_s = w;
                }
            }
            (NodePhase::Receiving, Role::Receiver) => {
                if done(s.rx_window_s) {
                    enter(&mut s, NodePhase::SearchIdle);
                }
            }
            (NodePhase::Off, _) => unreachable!("handled above"),
        }
    }

    let demand = Demand::for_phase(s.phase, s.role, budget, params.tx_current_ma);
    NodeStep {
        state: s,
        events,
        demand,
    }
}
