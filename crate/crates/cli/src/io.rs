//! CSV readers and writers.
//!
//! Floats are written in Rust's shortest round-trip form, so a write/read
//! cycle reproduces every value bit for bit.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use chrono::{DateTime, SecondsFormat};
use vesselpower_core::baseline::SeaTrialPoint;
use vesselpower_core::harness::{SweepReport, TrialRecord};
use vesselpower_core::neural::EpochRecord;
use vesselpower_core::synth::GroundTruth;
use vesselpower_core::{Error, SeaTrialBaseline, VoyageRecord};

use crate::error::{CliError, Result};

pub const DATASET_HEADER: [&str; 7] = [
    "timestamp_utc",
    "power_kw",
    "stw_kn",
    "draft_m",
    "trim_m",
    "wind_speed_kn",
    "wind_dir_deg",
];
pub const SEA_TRIAL_HEADER: [&str; 4] = ["condition", "draft_m", "speed_kn", "power_kw"];
pub const GROUND_TRUTH_HEADER: [&str; 7] = ["row", "baseline_kw", "wind_kw", "trim_kw", "aging_kw", "noise_kw", "power_kw"];
pub const SWEEP_HEADER: [&str; 7] = [
    "direction_deg",
    "speed_kn",
    "baseline_kw",
    "pure_kw",
    "hybrid_kw",
    "nearest_train_dist",
    "nearest_test_dist",
];
pub const LOSS_HEADER: [&str; 3] = ["epoch", "train_loss", "val_loss"];

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::format(path, e)
}

/// Column positions by name; every name in `required` must be present.
fn columns(path: &Path, rdr: &mut csv::Reader<File>, required: &[&str]) -> Result<Vec<usize>> {
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?;
    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    required
        .iter()
        .map(|name| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| CliError::format(path, format!("missing column `{name}`")))
        })
        .collect()
}

pub fn format_timestamp(ts: i64) -> Option<String> {
    DateTime::from_timestamp(ts, 0).map(|t| t.to_rfc3339_opts(SecondsFormat::Secs, true))
}

pub fn parse_timestamp(s: &str) -> std::result::Result<i64, String> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.timestamp())
        .map_err(|e| format!("`{s}` is not an RFC 3339 timestamp: {e}"))
}

/// Reads voyage records in file order. Rows are numbered from 1 after the
/// header.
pub fn read_dataset(path: &Path) -> Result<Vec<VoyageRecord>> {
    let mut rdr = reader(path)?;
    let cols = columns(path, &mut rdr, &DATASET_HEADER)?;
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| csv_err(path, e))?;
        let ingest = |column: &str, reason: String| CliError::Ingest {
            path: path.to_path_buf(),
            row: row_no,
            column: column.to_string(),
            reason,
        };
        let field = |k: usize| row.get(cols[k]).unwrap_or("");
        let num = |k: usize| -> Result<f64> {
            let s = field(k);
            s.parse::<f64>()
                .map_err(|_| ingest(DATASET_HEADER[k], format!("`{s}` is not a number")))
        };
        let record = VoyageRecord {
            timestamp: parse_timestamp(field(0)).map_err(|r| ingest(DATASET_HEADER[0], r))?,
            power: num(1)?,
            speed: num(2)?,
            draft: num(3)?,
            trim: num(4)?,
            wind_speed: num(5)?,
            wind_dir: num(6)?,
        };
        match record.validate() {
            Ok(()) => out.push(record),
            Err(Error::Field { column, reason }) => return Err(ingest(column, reason)),
            Err(e) => return Err(e.into()),
        }
    }
    if out.is_empty() {
        return Err(CliError::format(path, "no data rows"));
    }
    Ok(out)
}

pub fn write_dataset(path: &Path, records: &[VoyageRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(DATASET_HEADER).map_err(|e| csv_err(path, e))?;
    for r in records {
        let ts = format_timestamp(r.timestamp)
            .ok_or_else(|| CliError::format(path, format!("timestamp {} out of range", r.timestamp)))?;
        w.write_record([
            ts,
            r.power.to_string(),
            r.speed.to_string(),
            r.draft.to_string(),
            r.trim.to_string(),
            r.wind_speed.to_string(),
            r.wind_dir.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_ground_truth(path: &Path, truth: &[GroundTruth]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(GROUND_TRUTH_HEADER).map_err(|e| csv_err(path, e))?;
    for (i, g) in truth.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            g.baseline_kw.to_string(),
            g.wind_kw.to_string(),
            g.trim_kw.to_string(),
            g.aging_kw.to_string(),
            g.noise_kw.to_string(),
            g.total().to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Sea-trial points of one draft condition.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialCondition {
    pub draft_m: f64,
    pub points: Vec<SeaTrialPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeaTrials {
    pub ballast: TrialCondition,
    pub laden: TrialCondition,
}

impl SeaTrials {
    pub fn fit(&self) -> Result<SeaTrialBaseline> {
        Ok(SeaTrialBaseline::fit(
            &self.ballast.points,
            self.ballast.draft_m,
            &self.laden.points,
            self.laden.draft_m,
        )?)
    }
}

pub fn read_sea_trials(path: &Path) -> Result<SeaTrials> {
    let mut rdr = reader(path)?;
    let cols = columns(path, &mut rdr, &SEA_TRIAL_HEADER)?;
    let mut ballast: Option<TrialCondition> = None;
    let mut laden: Option<TrialCondition> = None;
    for (i, row) in rdr.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| csv_err(path, e))?;
        let ingest = |k: usize, reason: String| CliError::Ingest {
            path: path.to_path_buf(),
            row: row_no,
            column: SEA_TRIAL_HEADER[k].to_string(),
            reason,
        };
        let field = |k: usize| row.get(cols[k]).unwrap_or("");
        let num = |k: usize| -> Result<f64> {
            let s = field(k);
            s.parse::<f64>().map_err(|_| ingest(k, format!("`{s}` is not a number")))
        };
        let slot = match field(0) {
            "ballast" => &mut ballast,
            "laden" => &mut laden,
            other => return Err(ingest(0, format!("`{other}` is neither `ballast` nor `laden`"))),
        };
        let draft = num(1)?;
        let point = SeaTrialPoint::new(num(2)?, num(3)?).map_err(|e| ingest(2, e.to_string()))?;
        match slot {
            Some(c) if c.draft_m != draft => {
                return Err(ingest(1, format!("draft {draft} differs from {} earlier in the file", c.draft_m)));
            }
            Some(c) => c.points.push(point),
            None => {
                *slot = Some(TrialCondition {
                    draft_m: draft,
                    points: vec![point],
                })
            }
        }
    }
    let need = |c: Option<TrialCondition>, name: &str| {
        c.ok_or_else(|| CliError::format(path, format!("no `{name}` rows")))
    };
    Ok(SeaTrials {
        ballast: need(ballast, "ballast")?,
        laden: need(laden, "laden")?,
    })
}

pub fn write_sea_trials(path: &Path, trials: &SeaTrials) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SEA_TRIAL_HEADER).map_err(|e| csv_err(path, e))?;
    for (name, c) in [("ballast", &trials.ballast), ("laden", &trials.laden)] {
        for p in &c.points {
            w.write_record([
                name.to_string(),
                c.draft_m.to_string(),
                p.speed.to_string(),
                p.power.to_string(),
            ])
            .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_loss_history(path: &Path, history: &[EpochRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(LOSS_HEADER).map_err(|e| csv_err(path, e))?;
    for h in history {
        w.write_record([h.epoch.to_string(), h.train.total.to_string(), h.val_loss.to_string()])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_sweep(path: &Path, report: &SweepReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SWEEP_HEADER).map_err(|e| csv_err(path, e))?;
    for r in &report.rows {
        w.write_record([
            r.direction_deg.to_string(),
            r.speed_kn.to_string(),
            r.baseline_kw.to_string(),
            r.pure_kw.to_string(),
            r.hybrid_kw.to_string(),
            r.nearest_train_dist.to_string(),
            r.nearest_test_dist.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// One row per trial in index order: the sampled values, then the score.
pub fn write_hpo_log<'a>(
    path: &Path,
    names: impl Iterator<Item = &'a str>,
    trials: &[TrialRecord],
) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["trial".to_string()];
    header.extend(names.map(str::to_string));
    header.push("test_rmse_kw".into());
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for t in trials {
        let mut row = vec![t.index.to_string()];
        row.extend(t.values.iter().map(f64::to_string));
        row.push(t.score.to_string());
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
