//! Scenario presets shipped with the crate, one per reproduced experiment.

macro_rules! presets {
    ($($name:literal),* $(,)?) => {
        /// Names of all built-in presets.
        pub const PRESET_NAMES: &[&str] = &[$($name),*];

        /// JSON text of a built-in preset.
        pub fn preset(name: &str) -> Option<&'static str> {
            match name {
                $($name => Some(include_str!(concat!("../../../../presets/", $name, ".json"))),)*
                _ => None,
            }
        }
    };
}

presets!(
    "fig8-current-sweep",
    "fig10-nlos-pdr",
    "fig10-nlos-pdr-cc1101",
    "fig11-los-range",
    "fig11-los-range-cc1101",
    "sec631-bench-16mA",
    "sec632-panel-count",
    "sec632-three-panel",
    "sec81-capacitor-sizing",
    "sec81-current-clip",
    "rail-3v3",
);

/// Calibration targets for the non-line-of-sight comparison.
pub const NLOS_TARGETS: &str = include_str!("../../../../presets/fig10-nlos-targets.json");
