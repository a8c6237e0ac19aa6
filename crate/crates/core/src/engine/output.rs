use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::sim::SimResult;
use crate::{Error, Result};

/// Format with 9 significant digits, fixed-point where readable.
///
/// Identical inputs always give identical text, so repeated runs write
/// byte-identical files.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let x = if x == 0.0 { 0.0 } else { x };
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..=15).contains(&exp) {
        let rounded: f64 = sci.parse().expect("round trip");
        let decimals = (8 - exp).max(0) as usize;
        format!("{rounded:.decimals$}")
    } else {
        format!("{mantissa}e{exp}")
    }
}

/// A CSV document: digest line, `# key=value` notes, then a column header.
#[derive(Debug, Clone)]
pub struct CsvTable {
    digest: String,
    notes: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(digest: &str, columns: &[&str]) -> Self {
        Self {
            digest: digest.to_string(),
            notes: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn note(mut self, key: &str, value: impl Into<String>) -> Self {
        self.notes.push((key.to_string(), value.into()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# config_sha256={}", self.digest).unwrap();
        for (k, v) in &self.notes {
            writeln!(s, "# {k}={}", v.replace('\n', " ")).unwrap();
        }
        writeln!(s, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            writeln!(s, "{}", row.join(",")).unwrap();
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, &self.render())
    }
}

/// Hex SHA-256 of `text`, used for digests of multi-input outputs.
pub fn sha256_hex(text: &str) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Header notes shared by every file describing one scenario.
pub fn scenario_notes(table: CsvTable, sc: &super::Scenario) -> CsvTable {
    table
        .note("scenario", sc.name.clone())
        .note("radio", sc.radio.describe())
        .note("seed", sc.seed.to_string())
        .note(
            "modeling_defaults",
            "search_idle_ma; sense/boot timing; sensor interrupt level; indoor irradiance factor",
        )
}

pub const SUMMARY_COLUMNS: &[&str] = &[
    "duration_s",
    "tx_attempts",
    "packets_sent",
    "packets_delivered",
    "acks_received",
    "pdr",
    "pdr_analytic",
    "brownouts",
    "receiver_brownouts",
    "boot_count",
    "boot_loops_detected",
    "tx_failed_under_current",
    "tx_failed_bank_depleted",
    "energy_harvested_j",
    "energy_consumed_j",
    "energy_shunted_j",
    "energy_stored_delta_j",
    "receiver_supply_j",
    "mean_current_ma",
    "peak_current_ma",
];

pub fn summary_row(r: &SimResult) -> Vec<String> {
    vec![
        fmt_num(r.duration_s),
        r.tx_attempts.to_string(),
        r.packets_sent.to_string(),
        r.packets_delivered.to_string(),
        r.acks_received.to_string(),
        fmt_num(r.pdr),
        fmt_num(r.pdr_analytic),
        r.brownouts.to_string(),
        r.receiver_brownouts.to_string(),
        r.boot_count.to_string(),
        r.boot_loops_detected.to_string(),
        r.tx_failed_under_current.to_string(),
        r.tx_failed_bank_depleted.to_string(),
        fmt_num(r.energy_harvested_j),
        fmt_num(r.energy_consumed_j),
        fmt_num(r.energy_shunted_j),
        fmt_num(r.energy_stored_delta_j),
        fmt_num(r.receiver_supply_j),
        fmt_num(r.mean_current_ma),
        fmt_num(r.peak_current_ma),
    ]
}

/// Pretty JSON echo of the resolved scenario, wrapped with its digest.
pub fn resolved_config_text(sc: &super::Scenario) -> String {
    let doc = serde_json::json!({
        "config_sha256": sc.digest(),
        "scenario": sc.to_value(),
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json");
    s.push('\n');
    s
}

/// Write `summary.csv`, `events.csv`, `config.resolved` and, when recorded,
/// `current.csv` into `out_dir`. Returns the paths written.
pub fn write_result(result: &SimResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(out_dir)?;
    let sc = &result.config_echo;
    let digest = sc.digest();
    let mut written = Vec::new();

    let mut summary = scenario_notes(CsvTable::new(&digest, SUMMARY_COLUMNS), sc);
    summary.push(summary_row(result));
    let p = out_dir.join("summary.csv");
    summary.write(&p)?;
    written.push(p);

    let mut events = CsvTable::new(&digest, &["time_s", "node", "event", "packet"]);
    for e in &result.event_log {
        events.push(vec![
            fmt_num(e.event.time_s),
            match e.node {
                crate::node::Role::Transmitter => "tx".into(),
                crate::node::Role::Receiver => "rx".into(),
            },
            e.event.kind.as_str().into(),
            e.event.packet.map(|p| p.to_string()).unwrap_or_default(),
        ]);
    }
    let p = out_dir.join("events.csv");
    events.write(&p)?;
    written.push(p);

    if let Some(series) = &result.current_series {
        let mut cur = CsvTable::new(&digest, &["t_s", "current_ma"]);
        for &(t, i) in series {
            cur.push(vec![fmt_num(t), fmt_num(i)]);
        }
        let p = out_dir.join("current.csv");
        cur.write(&p)?;
        written.push(p);
    }

    let p = out_dir.join("config.resolved");
    write_file(&p, &resolved_config_text(sc))?;
    written.push(p);
    Ok(written)
}
