//! JSON report and per-round CSV dump.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{detection_verdict, mutual_information, AnalysisError, Tally};
use crate::conventions::Conventions;
use crate::harness::{ConfigEcho, SimConfig};
use crate::polarization::Bit;
use crate::protocol::RoundRecord;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: ConfigEcho,
    pub rounds: u64,
    pub aborted: u64,
    pub qber: f64,
    /// `None` when no strategy produced guesses.
    pub eve_accuracy: Option<f64>,
    pub mi_ab: f64,
    pub mi_ae: Option<f64>,
    pub detected: bool,
    pub conventions: Conventions,
}

impl SimReport {
    pub fn from_tally(
        config: &SimConfig,
        conventions: &Conventions,
        tally: &Tally,
    ) -> Result<Self, AnalysisError> {
        let qber = tally.qber()?;
        let verdict = detection_verdict(qber, config.threshold)?;
        let guessed = tally.eve.total() > 0;
        Ok(SimReport {
            config: config.echo(),
            rounds: tally.rounds,
            aborted: tally.aborted,
            qber,
            eve_accuracy: tally.eve_accuracy().ok(),
            mi_ab: mutual_information(&tally.key),
            mi_ae: guessed.then(|| mutual_information(&tally.eve)),
            detected: verdict.detected,
            conventions: conventions.clone(),
        })
    }

    pub fn to_json(&self) -> Result<String, ReportError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<(), ReportError> {
        let io = |source| ReportError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut f = File::create(path).map_err(io)?;
        f.write_all(self.to_json()?.as_bytes()).map_err(io)?;
        f.write_all(b"\n").map_err(io)
    }

    /// One line with rates rounded to 6 decimals.
    pub fn summary_line(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.6}"));
        format!(
            "protocol={} attack={} rounds={} aborted={} qber={:.6} eve_accuracy={} mi_ab={:.6} mi_ae={} detected={}",
            self.config.protocol,
            self.config.attack,
            self.rounds,
            self.aborted,
            self.qber,
            opt(self.eve_accuracy),
            self.mi_ab,
            opt(self.mi_ae),
            self.detected
        )
    }
}

pub const ROUNDS_CSV_HEADER: [&str; 7] = ["round", "k_alice", "k_bob", "s", "b", "l", "eve_guess"];

/// Per-round CSV; absent values are empty fields.
pub fn write_rounds_csv<W: Write>(records: &[RoundRecord], out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ROUNDS_CSV_HEADER)?;
    let cell = |b: Option<Bit>| b.map(|v| v.to_string()).unwrap_or_default();
    for r in records {
        w.write_record([
            r.round.to_string(),
            r.k_alice.to_string(),
            cell(r.k_bob),
            cell(r.s),
            cell(r.b),
            cell(r.l),
            cell(r.eve_guess),
        ])?;
    }
    w.flush().map_err(|source| ReportError::Io {
        path: "<csv>".into(),
        source,
    })?;
    Ok(())
}

pub fn write_rounds_csv_file(records: &[RoundRecord], path: &Path) -> Result<(), ReportError> {
    let f = File::create(path).map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_rounds_csv(records, BufWriter::new(f))
}
