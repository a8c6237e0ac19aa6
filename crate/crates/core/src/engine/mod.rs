//! Fixed-step simulation of a transmitter/receiver pair, plus the scenario
//! document, sweeps, channel calibration, radio comparison and CSV output.

mod calibrate;
mod compare;
mod output;
mod presets;
#[cfg(test)]
mod properties;
mod scenario;
mod sim;
mod sizing;
mod sweep;

pub use calibrate::{
    calibrate_channel, parse_targets, Calibration, CalibrationPoint, CalibrationTargets, SearchGrid,
    DEFAULT_GRID,
};
pub use compare::{compare_scenarios, divergent_keys, shared_powers, CompareReport, PdrRow, RangeRow};
pub use output::{
    ensure_dir, fmt_num, resolved_config_text, scenario_notes, sha256_hex, summary_row, write_file, write_result,
    CsvTable, SUMMARY_COLUMNS,
};
pub use presets::{preset, NLOS_TARGETS, PRESET_NAMES};
pub use scenario::{
    get_path, load_scenario, numeric_paths, parse_scenario, set_path, BootLoopConfig, ReceiverConfig,
    Scenario, SupplyMode,
};
pub use sim::{run_scenario, LoggedEvent, SimResult};
pub use sizing::{scenario_feasibility, SizingReport};
pub use sweep::{max_range, parse_values, range_values, scenario_at, sweep, SeedRun, SweepRow};

pub use crate::energy::load_trace;
