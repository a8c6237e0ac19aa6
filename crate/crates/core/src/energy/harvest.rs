use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Rated short-circuit current of one 6 V solar panel.
pub const PANEL_RATED_MA: f64 = 70.0;

/// Fraction of full-sun harvest current assumed for indoor light.
pub const INDOOR_IRRADIANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HarvestSource {
    Constant {
        current_ma: f64,
    },
    Trace {
        #[serde(default)]
        samples: Vec<(f64, f64)>,
        /// CSV file with a `t_s,i_mA` header; loaded into `samples` on resolve.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<String>,
    },
    Diurnal {
        amplitude_ma: f64,
        period_s: f64,
    },
}

/// A current-source harvester: `scale * irradiance * source(t)`.
///
/// Unknown keys are rejected by the flattened source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarvestProfile {
    #[serde(flatten)]
    pub source: HarvestSource,
    /// Panel count multiplier.
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default = "one")]
    pub irradiance: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for HarvestProfile {
    fn default() -> Self {
        Self::constant(PANEL_RATED_MA)
    }
}

impl HarvestProfile {
    pub fn constant(current_ma: f64) -> Self {
        Self {
            source: HarvestSource::Constant { current_ma },
            scale: 1.0,
            irradiance: 1.0,
        }
    }

    pub fn trace(samples: Vec<(f64, f64)>) -> Self {
        Self {
            source: HarvestSource::Trace {
                samples,
                path: None,
            },
            scale: 1.0,
            irradiance: 1.0,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_irradiance(mut self, irradiance: f64) -> Self {
        self.irradiance = irradiance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale >= 0.0) {
            return Err(Error::Config(format!("harvest scale {} must be >= 0", self.scale)));
        }
        if !(self.irradiance >= 0.0) {
            return Err(Error::Config(format!(
                "harvest irradiance {} must be >= 0",
                self.irradiance
            )));
        }
        match &self.source {
            HarvestSource::Constant { current_ma } if !(*current_ma >= 0.0) => Err(Error::Config(
                format!("constant harvest current {current_ma} mA must be >= 0"),
            )),
            HarvestSource::Trace { samples, .. } => validate_samples(samples),
            HarvestSource::Diurnal {
                amplitude_ma,
                period_s,
            } if !(*amplitude_ma >= 0.0) || !(*period_s > 0.0) => Err(Error::Config(format!(
                "diurnal harvest needs amplitude >= 0 and period > 0 (got {amplitude_ma} mA, {period_s} s)"
            ))),
            _ => Ok(()),
        }
    }
}

fn validate_samples(samples: &[(f64, f64)]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Config("harvest trace is empty".into()));
    }
    for (i, w) in samples.windows(2).enumerate() {
        if !(w[1].0 > w[0].0) {
            return Err(Error::Config(format!(
                "harvest trace times must strictly increase (sample {})",
                i + 1
            )));
        }
    }
    if let Some((t, i)) = samples.iter().find(|(t, i)| !(*t >= 0.0) || !(*i >= 0.0)) {
        return Err(Error::Config(format!(
            "harvest trace sample ({t}, {i}) must be non-negative"
        )));
    }
    Ok(())
}

/// Harvested current in mA at time `t`.
///
/// Traces use zero-order hold and fall to zero after the last sample.
pub fn harvester_current(profile: &HarvestProfile, t: f64) -> Result<f64> {
    let raw = match &profile.source {
        HarvestSource::Constant { current_ma } => *current_ma,
        HarvestSource::Trace { samples, .. } => {
            if samples.is_empty() {
                return Err(Error::Config("harvest trace is empty".into()));
            }
            let last = samples[samples.len() - 1];
            if t > last.0 {
                0.0
            } else {
                // index of the last sample with time <= t
                let idx = samples.partition_point(|&(ts, _)| ts <= t);
                if idx == 0 {
                    0.0
                } else {
                    samples[idx - 1].1
                }
            }
        }
        HarvestSource::Diurnal {
            amplitude_ma,
            period_s,
        } => amplitude_ma * (std::f64::consts::TAU * t / period_s).sin().max(0.0),
    };
    Ok(profile.scale * profile.irradiance * raw)
}

/// Parse a harvest trace CSV (`t_s,i_mA`).
pub fn parse_trace(text: &str, origin: &str) -> Result<Vec<(f64, f64)>> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "t_s,i_mA" => {}
        Some((_, header)) => {
            return Err(err(1, format!("expected header `t_s,i_mA`, found `{}`", header.trim())))
        }
        None => return Err(err(1, "missing header `t_s,i_mA`".into())),
    }
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(t), Some(i), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(err(line_no, format!("expected 2 fields, got `{line}`")));
        };
        let t: f64 = t
            .trim()
            .parse()
            .map_err(|_| err(line_no, format!("bad time `{}`", t.trim())))?;
        let i: f64 = i
            .trim()
            .parse()
            .map_err(|_| err(line_no, format!("bad current `{}`", i.trim())))?;
        if !(t >= 0.0) || !(i >= 0.0) {
            return Err(err(line_no, format!("negative value in `{line}`")));
        }
        if let Some(&(prev, _)) = samples.last() {
            if !(t > prev) {
                return Err(err(line_no, format!("time {t} not after previous {prev}")));
            }
        }
        samples.push((t, i));
    }
    if samples.is_empty() {
        return Err(Error::Config(format!("{origin}: harvest trace is empty")));
    }
    Ok(samples)
}

/// Load a harvest trace file into a profile with unit scale.
pub fn load_trace(path: impl AsRef<Path>) -> Result<HarvestProfile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let samples = parse_trace(&text, &path.display().to_string())?;
    Ok(HarvestProfile::trace(samples))
}
