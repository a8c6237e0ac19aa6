use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::energy::{
    load_trace, CapacitorConfig, HarvestProfile, HarvestSource, HysteresisComparator, UfopConfig,
};
use crate::node::CurrentBudget;
use crate::phy::{ChannelModel, RadioModel, MAX_PAYLOAD};
use crate::{Error, FieldViolation, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SupplyMode {
    /// Solar harvester into the main capacitor, gated by the comparator.
    Harvested,
    /// Stiff lab supply with a current limit; banks are bypassed.
    Bench {
        current_limit_ma: f64,
        #[serde(default = "default_bench_voltage")]
        voltage_v: f64,
    },
}

fn default_bench_voltage() -> f64 {
    3.3
}

impl Default for SupplyMode {
    fn default() -> Self {
        SupplyMode::Harvested
    }
}

/// The listening end of the link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReceiverConfig {
    /// Powered from its own harvester and capacitor instead of a steady supply.
    pub batteryless: bool,
    /// Supply voltage used for energy reporting when not batteryless.
    pub supply_voltage_v: f64,
    pub harvest: HarvestProfile,
    pub main_cap: CapacitorConfig,
    pub main_comparator: HysteresisComparator,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        Self {
            batteryless: false,
            supply_voltage_v: 3.3,
            harvest: HarvestProfile::default(),
            main_cap: CapacitorConfig::default(),
            main_comparator: HysteresisComparator::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BootLoopConfig {
    pub k: usize,
    pub window_s: f64,
}

impl Default for BootLoopConfig {
    fn default() -> Self {
        Self { k: 3, window_s: 60.0 }
    }
}

/// A complete, self-contained simulation setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub duration_s: f64,
    pub dt_s: f64,
    pub seed: u64,
    pub supply: SupplyMode,
    pub harvest: HarvestProfile,
    pub main_cap: CapacitorConfig,
    pub main_comparator: HysteresisComparator,
    pub radio_ufop: UfopConfig,
    pub sensor_ufop: UfopConfig,
    pub radio: RadioModel,
    pub channel: ChannelModel,
    pub distance_m: f64,
    pub duty_period_s: f64,
    pub budget: CurrentBudget,
    pub payload_len: usize,
    /// Listen for a short acknowledgement after each packet.
    pub ack: bool,
    pub ack_len: usize,
    pub receiver: ReceiverConfig,
    pub boot_loop: BootLoopConfig,
    /// Record the node's supply current every `record_every_steps` steps (0 = off).
    pub record_every_steps: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "default".into(),
            description: String::new(),
            duration_s: 60.0,
            dt_s: 1e-3,
            seed: 1,
            supply: SupplyMode::Harvested,
            harvest: HarvestProfile::default(),
            main_cap: CapacitorConfig::default(),
            main_comparator: HysteresisComparator::default(),
            radio_ufop: UfopConfig::radio(),
            sensor_ufop: UfopConfig::sensor(),
            radio: RadioModel::default(),
            channel: ChannelModel::line_of_sight(),
            distance_m: 100.0,
            duty_period_s: 10.0,
            budget: CurrentBudget::default(),
            payload_len: 20,
            ack: true,
            ack_len: 5,
            receiver: ReceiverConfig::default(),
            boot_loop: BootLoopConfig::default(),
            record_every_steps: 0,
        }
    }
}

impl Scenario {
    /// Every violated field, in a stable order.
    pub fn violations(&self) -> Vec<FieldViolation> {
        let mut out = Vec::new();
        let mut v = |f: &str, m: String| out.push(FieldViolation::new(f, m));
        if !(self.dt_s > 0.0) {
            v("dt_s", format!("{} must be > 0", self.dt_s));
        }
        // a zero-length run is allowed and does nothing
        if !(self.duration_s == 0.0 || self.duration_s >= self.dt_s) {
            v("duration_s", format!("{} must be 0 or >= dt_s", self.duration_s));
        }
        let phase_min = self.budget.boot_duration_s.min(self.budget.sense_duration_s);
        if self.dt_s > 0.0 && self.dt_s > phase_min / 2.0 {
            v(
                "dt_s",
                format!("{} too coarse for the shortest phase ({phase_min} s)", self.dt_s),
            );
        }
        if !(self.duty_period_s > 0.0) {
            v("duty_period_s", "must be > 0".into());
        }
        if !(self.distance_m >= self.channel.d0_m) {
            v(
                "distance_m",
                format!("{} must be >= channel.d0_m ({})", self.distance_m, self.channel.d0_m),
            );
        }
        if matches!(self.radio, RadioModel::Lora(_)) {
            for (name, len) in [("payload_len", self.payload_len), ("ack_len", self.ack_len)] {
                if len > MAX_PAYLOAD {
                    v(name, format!("{len} exceeds {MAX_PAYLOAD} B"));
                }
            }
        }
        if let SupplyMode::Bench {
            current_limit_ma,
            voltage_v,
        } = self.supply
        {
            if !(current_limit_ma >= 0.0) {
                v("supply.current_limit_ma", "must be >= 0".into());
            }
            if !(voltage_v > 0.0) {
                v("supply.voltage_v", "must be > 0".into());
            }
        }
        if let Err(e) = self.harvest.validate() {
            v("harvest", e.to_string());
        }
        if !(self.main_cap.capacitance_f > 0.0) {
            v("main_cap.capacitance_f", "must be > 0".into());
        }
        if !(self.main_cap.initial_voltage_v >= 0.0
            && self.main_cap.initial_voltage_v <= self.main_cap.clamp_voltage_v)
        {
            v("main_cap.initial_voltage_v", "must lie within [0, clamp_voltage_v]".into());
        }
        if let Err(e) = self.main_comparator.validate() {
            v("main_comparator", e.to_string());
        }
        if !(self.boot_loop.k >= 2) {
            v("boot_loop.k", "must be >= 2".into());
        }
        if !(self.boot_loop.window_s > 0.0) {
            v("boot_loop.window_s", "must be > 0".into());
        }
        if self.receiver.batteryless {
            if let Err(e) = self.receiver.harvest.validate() {
                v("receiver.harvest", e.to_string());
            }
            if !(self.receiver.main_cap.capacitance_f > 0.0) {
                v("receiver.main_cap.capacitance_f", "must be > 0".into());
            }
            if let Err(e) = self.receiver.main_comparator.validate() {
                v("receiver.main_comparator", e.to_string());
            }
        }
        out.extend(self.radio_ufop.validate("radio_ufop"));
        out.extend(self.sensor_ufop.validate("sensor_ufop"));
        out.extend(self.radio.validate("radio"));
        out.extend(self.channel.validate("channel"));
        out.extend(self.budget.validate("budget"));
        if out.is_empty() {
            if let Err(e) = self.radio.tx_current_ma() {
                out.push(FieldViolation::new("radio.tx_power_dbm", e.to_string()));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.violations();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }

    /// Load trace files referenced by path, relative to `base_dir`.
    pub fn resolve_files(&mut self, base_dir: &Path) -> Result<()> {
        for profile in [&mut self.harvest, &mut self.receiver.harvest] {
            if let HarvestSource::Trace {
                samples,
                path: Some(p),
            } = &mut profile.source
            {
                let full = base_dir.join(&*p);
                let loaded = load_trace(&full)?;
                if let HarvestSource::Trace { samples: s, .. } = loaded.source {
                    *samples = s;
                }
            }
        }
        Ok(())
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("scenario serializes")
    }

    pub fn from_value(v: Value) -> Result<Self> {
        Ok(serde_json::from_value(v)?)
    }

    /// SHA-256 of the canonical (key-sorted, compact) JSON form.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(&self.to_value()).expect("scenario serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    /// Apply a dotted-path override such as `radio.tx_power_dbm=11`.
    ///
    /// The value is read as JSON when it parses, otherwise as a string. The
    /// path must already exist in the resolved scenario.
    pub fn with_override(&self, assignment: &str) -> Result<Self> {
        let (path, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Argument(format!("override `{assignment}` is not key=value")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let mut doc = self.to_value();
        set_path(&mut doc, path.trim(), value)?;
        Self::from_value(doc)
    }
}

/// Replace the value at a dotted `path`, which must exist.
pub fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<()> {
    let mut cur = doc;
    for key in path.split('.') {
        cur = match cur {
            Value::Object(map) => map.get_mut(key),
            Value::Array(items) => key.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| Error::Config(format!("unknown scenario key `{path}`")))?;
    }
    *cur = value;
    Ok(())
}

pub fn get_path<'a>(doc: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(doc, |cur, key| match cur {
        Value::Object(map) => map.get(key),
        Value::Array(items) => key.parse::<usize>().ok().and_then(|i| items.get(i)),
        _ => None,
    })
}

/// Dotted paths of every numeric leaf (array elements excluded).
pub fn numeric_paths(doc: &Value) -> Vec<String> {
    fn walk(v: &Value, prefix: &str, out: &mut Vec<String>) {
        if let Value::Object(map) = v {
            for (k, child) in map {
                let p = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                match child {
                    Value::Number(_) => out.push(p),
                    Value::Object(_) => walk(child, &p, out),
                    _ => {}
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(doc, "", &mut out);
    out
}

/// Parse, resolve and validate a scenario document.
///
/// `base_dir` anchors relative trace paths.
pub fn parse_scenario(text: &str, base_dir: &Path) -> Result<Scenario> {
    let mut sc: Scenario = serde_json::from_str(text)?;
    sc.resolve_files(base_dir)?;
    sc.validate()?;
    Ok(sc)
}

/// Read a scenario file. A missing `.json` extension is tolerated, and the
/// file stem of a built-in preset resolves to that preset.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let candidates = [path.to_path_buf(), PathBuf::from(format!("{}.json", path.display()))];
    for c in &candidates {
        if c.is_file() {
            let text = std::fs::read_to_string(c).map_err(|e| Error::io(c, e))?;
            let base = c.parent().unwrap_or(Path::new("."));
            return parse_scenario(&text, base);
        }
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    if let Some(text) = super::presets::preset(stem) {
        return parse_scenario(text, Path::new("."));
    }
    Err(Error::Argument(format!(
        "scenario `{}` not found (nor a built-in preset)",
        path.display()
    )))
}
