use serde::Serialize;

use super::scenario::{Scenario, SupplyMode};
use crate::energy::{
    comparator_step, harvester_current, ufop_step_limited, CapacitorState, HarvestProfile,
    HysteresisComparator, SupplyStatus, UfopUnit,
};
use crate::node::{
    count_boot_loops, node_step, Demand, EventKind, NodeEvent, NodeInputs, NodeParams, NodePhase,
    NodeState, Role,
};
use crate::phy::{link_pdr, packet_rng, sample_packet_outcome};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoggedEvent {
    pub node: Role,
    #[serde(flatten)]
    pub event: NodeEvent,
}

/// Metrics of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub duration_s: f64,
    pub steps: u64,
    pub tx_attempts: u64,
    pub packets_sent: u64,
    pub packets_delivered: u64,
    pub acks_received: u64,
    pub pdr: f64,
    /// Expected delivery ratio of the configured link.
    pub pdr_analytic: f64,
    pub brownouts: u64,
    pub receiver_brownouts: u64,
    pub boot_count: u64,
    pub boot_loops_detected: u64,
    pub tx_failed_under_current: u64,
    pub tx_failed_bank_depleted: u64,
    pub energy_harvested_j: f64,
    pub energy_consumed_j: f64,
    pub energy_shunted_j: f64,
    /// Change of the energy held by every capacitor in the run.
    pub energy_stored_delta_j: f64,
    /// Energy drawn by a continuously supplied receiver (outside the balance).
    pub receiver_supply_j: f64,
    /// Transmitter supply current, time-averaged.
    pub mean_current_ma: f64,
    pub peak_current_ma: f64,
    pub current_series: Option<Vec<(f64, f64)>>,
    pub event_log: Vec<LoggedEvent>,
    pub config_echo: Scenario,
}

impl SimResult {
    /// `harvested - (consumed + shunted + stored delta)`.
    pub fn energy_residual_j(&self) -> f64 {
        self.energy_harvested_j
            - (self.energy_consumed_j + self.energy_shunted_j + self.energy_stored_delta_j)
    }

    pub fn count(&self, node: Role, kind: EventKind) -> usize {
        self.event_log
            .iter()
            .filter(|e| e.node == node && e.event.kind == kind)
            .count()
    }
}

#[derive(Debug, Default)]
struct EnergyLedger {
    harvested: f64,
    consumed: f64,
    shunted: f64,
}

impl EnergyLedger {
    /// Branch moving `ma` for `dt` at mean terminal voltage `v`.
    fn joules(ma: f64, v: f64, dt: f64) -> f64 {
        ma / 1000.0 * v * dt
    }
}

/// Main capacitor behind the hysteresis gate.
#[derive(Debug, Clone)]
struct GatedRail {
    cap: CapacitorState,
    comp: HysteresisComparator,
}

impl GatedRail {
    fn new(cap: CapacitorState, comp: HysteresisComparator) -> Self {
        let comp = comparator_step(&comp, cap.voltage);
        Self { cap, comp }
    }

    fn on(&self) -> bool {
        self.comp.output
    }

    /// Current the rail can give up this step without falling below `floor_v`.
    fn headroom_ma(&self, floor_v: f64, dt: f64) -> f64 {
        (self.cap.capacitance * (self.cap.voltage - floor_v) / dt * 1000.0).max(0.0)
    }

    /// Harvest in, `out_ma` out; returns the step's mean voltage.
    fn advance(&mut self, harvest_ma: f64, out_ma: f64, dt: f64, ledger: &mut EnergyLedger) -> f64 {
        let step = self.cap.step(harvest_ma - out_ma, dt);
        ledger.harvested += EnergyLedger::joules(harvest_ma, step.mean_voltage, dt);
        ledger.shunted += step.shunted * self.cap.clamp_voltage;
        self.cap = step.next;
        self.comp = comparator_step(&self.comp, self.cap.voltage);
        step.mean_voltage
    }
}

/// What the transmitter's supply reported for one step.
#[derive(Debug, Clone, Copy)]
struct SupplyReport {
    rail_on: bool,
    radio_interrupt: bool,
    sensor_interrupt: bool,
    radio_status: SupplyStatus,
    sensor_status: SupplyStatus,
    delivered_ma: f64,
}

struct HarvestedSupply<'a> {
    profile: &'a HarvestProfile,
    rail: GatedRail,
    radio: UfopUnit,
    sensor: UfopUnit,
}

impl HarvestedSupply<'_> {
    fn step(&mut self, t0: f64, demand: &Demand, dt: f64, ledger: &mut EnergyLedger) -> Result<SupplyReport> {
        let i_h = harvester_current(self.profile, t0)?;
        let rail_on = self.rail.on();
        let rail_v = if rail_on { self.rail.cap.voltage } else { 0.0 };
        let rail_load = if rail_on { demand.rail_ma } else { 0.0 };

        // banks charge sensor-first and may not pull the rail below their start level
        self.sensor.gate_closed = rail_on && demand.sensor_ma > 0.0;
        let ceiling = self.rail.headroom_ma(self.sensor.charge_start_v, dt) + i_h - rail_load;
        let (sensor, rs) = ufop_step_limited(&self.sensor, rail_v, demand.sensor_ma, ceiling.max(0.0), dt);

        self.radio.gate_closed = rail_on && demand.radio_ma > 0.0;
        let ceiling =
            self.rail.headroom_ma(self.radio.charge_start_v, dt) + i_h - rail_load - rs.charge_ma;
        let (radio, rr) = ufop_step_limited(&self.radio, rail_v, demand.radio_ma, ceiling.max(0.0), dt);

        let v_main = self.rail.advance(i_h, rail_load + rs.charge_ma + rr.charge_ma, dt, ledger);
        ledger.consumed += EnergyLedger::joules(rail_load, v_main, dt);
        for (unit, next, r) in [(&self.sensor, &sensor, &rs), (&self.radio, &radio, &rr)] {
            // charger loss plus what the peripheral drew from the bank
            ledger.consumed += EnergyLedger::joules(r.charge_ma, v_main - r.bank_mean_voltage, dt)
                + EnergyLedger::joules(r.delivered_ma, r.bank_mean_voltage, dt);
            ledger.shunted +=
                (next.bank.shunted_charge - unit.bank.shunted_charge) * unit.bank.clamp_voltage;
        }
        self.sensor = sensor;
        self.radio = radio;

        Ok(SupplyReport {
            rail_on: self.rail.on(),
            radio_interrupt: rr.interrupt,
            sensor_interrupt: rs.interrupt,
            radio_status: rr.status,
            sensor_status: rs.status,
            delivered_ma: rail_load + rs.delivered_ma + rr.delivered_ma,
        })
    }

    fn stored(&self) -> f64 {
        self.rail.cap.energy() + self.radio.bank.energy() + self.sensor.bank.energy()
    }
}

/// Current-limited lab supply feeding every load directly.
fn bench_step(limit_ma: f64, voltage_v: f64, demand: &Demand, dt: f64, ledger: &mut EnergyLedger) -> SupplyReport {
    let total = demand.total();
    let mut r = SupplyReport {
        rail_on: true,
        radio_interrupt: true,
        sensor_interrupt: true,
        radio_status: SupplyStatus::Ok,
        sensor_status: SupplyStatus::Ok,
        delivered_ma: total.min(limit_ma),
    };
    if total > limit_ma {
        if demand.radio_ma > 0.0 {
            r.radio_status = SupplyStatus::UnderCurrent;
        } else if demand.sensor_ma > 0.0 {
            r.sensor_status = SupplyStatus::UnderCurrent;
        } else {
            r.rail_on = false;
        }
    }
    let e = EnergyLedger::joules(r.delivered_ma, voltage_v, dt);
    ledger.harvested += e;
    ledger.consumed += e;
    r
}

/// A packet between TxStarted and the end of its acknowledgement window.
#[derive(Debug, Clone, Copy)]
struct InFlight {
    seq: u64,
    /// Receiver was listening at the start and has stayed powered.
    heard: bool,
    delivered: Option<bool>,
}

/// Run one scenario to completion.
pub fn run_scenario(sc: &Scenario) -> Result<SimResult> {
    sc.validate()?;
    let dt = sc.dt_s;
    let steps = (sc.duration_s / dt * (1.0 + 1e-12)).floor() as u64;
    let airtime = sc.radio.airtime(sc.payload_len)?;
    let ack_window = if sc.ack {
        Some(sc.radio.airtime(sc.ack_len)?)
    } else {
        None
    };
    let tx_ma = sc.radio.tx_current_ma()?;
    let sensitivity = sc.radio.sensitivity_dbm()?;
    let ptx = sc.radio.tx_power_dbm();
    let params = NodeParams {
        budget: sc.budget.clone(),
        duty_period_s: sc.duty_period_s,
        tx_airtime_s: airtime,
        tx_current_ma: tx_ma,
        ack_window_s: ack_window,
    };
    let rx_params = NodeParams {
        ack_window_s: None,
        ..params.clone()
    };

    let mut ledger = EnergyLedger::default();
    let mut harvested = match sc.supply {
        SupplyMode::Harvested => Some(HarvestedSupply {
            profile: &sc.harvest,
            rail: GatedRail::new(sc.main_cap.build(), sc.main_comparator),
            radio: sc.radio_ufop.build()?,
            sensor: sc.sensor_ufop.build()?,
        }),
        SupplyMode::Bench { .. } => None,
    };
    let mut rx_rail = sc.receiver.batteryless.then(|| {
        GatedRail::new(sc.receiver.main_cap.build(), sc.receiver.main_comparator)
    });
    let stored0 = harvested.as_ref().map_or(0.0, |h| h.stored())
        + rx_rail.as_ref().map_or(0.0, |r| r.cap.energy());

    let mut tx = NodeState::new(Role::Transmitter);
    let mut rx = NodeState::new(Role::Receiver);
    let mut tx_demand = Demand::default();
    let mut rx_demand = Demand::default();
    let mut in_flight: Option<InFlight> = None;

    let mut log = Vec::new();
    let mut series = (sc.record_every_steps > 0).then(Vec::new);
    let (mut delivered, mut acks) = (0u64, 0u64);
    let (mut charge_mas, mut peak_ma) = (0.0f64, 0.0f64);
    let mut receiver_supply_j = 0.0;

    for k in 0..steps {
        let t0 = k as f64 * dt;
        let t1 = (k + 1) as f64 * dt;

        let supply = match (&mut harvested, &sc.supply) {
            (Some(h), _) => h.step(t0, &tx_demand, dt, &mut ledger)?,
            (None, SupplyMode::Bench { current_limit_ma, voltage_v }) => {
                bench_step(*current_limit_ma, *voltage_v, &tx_demand, dt, &mut ledger)
            }
            (None, SupplyMode::Harvested) => unreachable!("harvested supply is always built"),
        };
        charge_mas += supply.delivered_ma * dt;
        peak_ma = peak_ma.max(supply.delivered_ma);
        if let Some(s) = series.as_mut() {
            if k % sc.record_every_steps == 0 {
                s.push((t0, supply.delivered_ma));
            }
        }

        let inputs = NodeInputs {
            now_s: t1,
            rail_on: supply.rail_on,
            radio_interrupt: supply.radio_interrupt,
            sensor_interrupt: supply.sensor_interrupt,
            radio_status: supply.radio_status,
            sensor_status: supply.sensor_status,
            incoming_s: None,
            ack_available: in_flight.is_some_and(|f| f.heard && f.delivered == Some(true)),
        };
        let rx_was_listening = rx.phase == NodePhase::SearchIdle;
        let out = node_step(std::mem::replace(&mut tx, NodeState::new(Role::Transmitter)), &inputs, &params, dt);

        let mut incoming = None;
        for e in &out.events {
            match e.kind {
                EventKind::TxStarted => {
                    let heard = rx_was_listening;
                    in_flight = Some(InFlight {
                        seq: e.packet.unwrap_or_default(),
                        heard,
                        delivered: None,
                    });
                    if heard {
                        incoming = Some(airtime + ack_window.unwrap_or(0.0));
                    }
                }
                EventKind::TxCompleted => {
                    if let Some(f) = in_flight.as_mut() {
                        let mut rng = packet_rng(sc.seed, f.seq);
                        let through =
                            sample_packet_outcome(&sc.channel, sensitivity, ptx, sc.distance_m, &mut rng)?;
                        let ok = f.heard && through;
                        f.delivered = Some(ok);
                        delivered += u64::from(ok);
                    }
                }
                EventKind::TxFailedUnderCurrent | EventKind::TxFailedBankDepleted => in_flight = None,
                EventKind::AckReceived => acks += 1,
                _ => {}
            }
        }
        log.extend(out.events.iter().map(|&event| LoggedEvent {
            node: Role::Transmitter,
            event,
        }));
        tx_demand = out.demand;
        tx = out.state;
        if !matches!(tx.phase, NodePhase::Transmitting | NodePhase::Receiving) {
            in_flight = None;
        }

        let rx_on = match rx_rail.as_mut() {
            Some(rail) => {
                let i_h = harvester_current(&sc.receiver.harvest, t0)?;
                let load = if rail.on() { rx_demand.total() } else { 0.0 };
                let v = rail.advance(i_h, load, dt, &mut ledger);
                ledger.consumed += EnergyLedger::joules(load, v, dt);
                rail.on()
            }
            None => {
                receiver_supply_j +=
                    EnergyLedger::joules(rx_demand.total(), sc.receiver.supply_voltage_v, dt);
                true
            }
        };
        let rx_inputs = NodeInputs {
            rail_on: rx_on,
            incoming_s: incoming,
            ..NodeInputs::powered(t1)
        };
        let rx_out = node_step(std::mem::replace(&mut rx, NodeState::new(Role::Receiver)), &rx_inputs, &rx_params, dt);
        if rx_out.state.phase == NodePhase::Off {
            if let Some(f) = in_flight.as_mut() {
                f.heard = false;
            }
        }
        log.extend(rx_out.events.iter().map(|&event| LoggedEvent {
            node: Role::Receiver,
            event,
        }));
        rx_demand = rx_out.demand;
        rx = rx_out.state;
    }

    let stored1 = harvested.as_ref().map_or(0.0, |h| h.stored())
        + rx_rail.as_ref().map_or(0.0, |r| r.cap.energy());
    let count = |node: Role, kind: EventKind| {
        log.iter()
            .filter(|e: &&LoggedEvent| e.node == node && e.event.kind == kind)
            .count() as u64
    };
    let sim_time = steps as f64 * dt;

    Ok(SimResult {
        duration_s: sim_time,
        steps,
        tx_attempts: tx.tx_attempts,
        packets_sent: tx.packets_sent,
        packets_delivered: delivered,
        acks_received: acks,
        pdr: if tx.packets_sent == 0 {
            0.0
        } else {
            delivered as f64 / tx.packets_sent as f64
        },
        pdr_analytic: link_pdr(&sc.channel, &sc.radio, sc.distance_m)?,
        brownouts: count(Role::Transmitter, EventKind::Brownout),
        receiver_brownouts: count(Role::Receiver, EventKind::Brownout),
        boot_count: tx.boot_events.len() as u64,
        boot_loops_detected: count_boot_loops(&tx.boot_events, sc.boot_loop.k, sc.boot_loop.window_s)
            as u64,
        tx_failed_under_current: count(Role::Transmitter, EventKind::TxFailedUnderCurrent),
        tx_failed_bank_depleted: count(Role::Transmitter, EventKind::TxFailedBankDepleted),
        energy_harvested_j: ledger.harvested,
        energy_consumed_j: ledger.consumed,
        energy_shunted_j: ledger.shunted,
        energy_stored_delta_j: stored1 - stored0,
        receiver_supply_j,
        mean_current_ma: if sim_time > 0.0 { charge_mas / sim_time } else { 0.0 },
        peak_current_ma: peak_ma,
        current_series: series,
        event_log: log,
        config_echo: sc.clone(),
    })
}
