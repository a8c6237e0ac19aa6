use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Two-threshold power gate: on at or above `v_on`, off at or below `v_off`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HysteresisComparator {
    pub v_on: f64,
    pub v_off: f64,
    #[serde(default)]
    pub output: bool,
}

impl Default for HysteresisComparator {
    /// MIC841 thresholds of the main rail gate.
    fn default() -> Self {
        Self {
            v_on: 3.38,
            v_off: 3.05,
            output: false,
        }
    }
}

impl HysteresisComparator {
    pub fn new(v_on: f64, v_off: f64) -> Result<Self> {
        let c = Self {
            v_on,
            v_off,
            output: false,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_off < self.v_on) {
            return Err(Error::Config(format!(
                "comparator v_off {} must be strictly below v_on {}",
                self.v_off, self.v_on
            )));
        }
        Ok(())
    }
}

pub fn comparator_step(comp: &HysteresisComparator, v: f64) -> HysteresisComparator {
    let output = if v >= comp.v_on {
        true
    } else if v <= comp.v_off {
        false
    } else {
        comp.output
    };
    HysteresisComparator { output, ..*comp }
}
