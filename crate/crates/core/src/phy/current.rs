use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Transmit-current curve: `(tx_power_dbm, current_ma)` points with strictly
/// increasing power, linearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CurrentCurve(pub Vec<(f64, f64)>);

impl CurrentCurve {
    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.0.first()?.0, self.0.last()?.0))
    }
}

pub(crate) fn validate_curve(curve: &CurrentCurve) -> Result<(), String> {
    let pts = &curve.0;
    if pts.len() < 2 {
        return Err(format!("needs at least 2 points, has {}", pts.len()));
    }
    if pts.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err("power values must strictly increase".into());
    }
    if pts.iter().any(|&(_, i)| !(i >= 0.0)) {
        return Err("currents must be >= 0".into());
    }
    Ok(())
}

/// Interpolated transmit current (mA) at `ptx_dbm`.
pub fn tx_current(curve: &CurrentCurve, ptx_dbm: f64) -> Result<f64> {
    let pts = &curve.0;
    let (lo, hi) = curve
        .span()
        .ok_or_else(|| Error::Config("empty current curve".into()))?;
    if !(ptx_dbm >= lo && ptx_dbm <= hi) {
        return Err(Error::Range {
            what: "tx power (dBm)",
            value: ptx_dbm,
            min: lo,
            max: hi,
        });
    }
    let idx = pts.partition_point(|&(p, _)| p < ptx_dbm);
    if idx < pts.len() && pts[idx].0 == ptx_dbm {
        return Ok(pts[idx].1);
    }
    let (p0, i0) = pts[idx - 1];
    let (p1, i1) = pts[idx];
    Ok(i0 + (i1 - i0) * (ptx_dbm - p0) / (p1 - p0))
}
