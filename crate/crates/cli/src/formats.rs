//! JSON files: baselines, models, split manifests and reports.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use vesselpower_core::baseline::PowerCurve;
use vesselpower_core::SeaTrialBaseline;

use crate::error::{CliError, Result};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(path, e))
}

/// Pretty-printed with a trailing newline. Floats use the shortest form
/// that parses back to the same bits.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::format(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    pub c: f64,
    pub n: f64,
    pub draft_m: f64,
}

/// `{"ballast": {"c", "n", "draft_m"}, "laden": {...}}`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineFile {
    pub ballast: CurveFile,
    pub laden: CurveFile,
}

impl From<&SeaTrialBaseline> for BaselineFile {
    fn from(b: &SeaTrialBaseline) -> Self {
        Self {
            ballast: CurveFile {
                c: b.ballast.c,
                n: b.ballast.n,
                draft_m: b.ballast_draft,
            },
            laden: CurveFile {
                c: b.laden.c,
                n: b.laden.n,
                draft_m: b.laden_draft,
            },
        }
    }
}

impl BaselineFile {
    pub fn to_baseline(&self) -> vesselpower_core::Result<SeaTrialBaseline> {
        SeaTrialBaseline::new(
            PowerCurve::new(self.ballast.c, self.ballast.n)?,
            self.ballast.draft_m,
            PowerCurve::new(self.laden.c, self.laden.n)?,
            self.laden.draft_m,
        )
    }
}

pub fn read_baseline(path: &Path) -> Result<SeaTrialBaseline> {
    let file: BaselineFile = read_json(path)?;
    file.to_baseline().map_err(|e| CliError::format(path, e))
}

pub fn write_baseline(path: &Path, b: &SeaTrialBaseline) -> Result<()> {
    write_json(path, &BaselineFile::from(b))
}
