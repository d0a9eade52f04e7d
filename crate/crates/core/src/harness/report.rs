use std::fmt;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::statistics::{DimensionEstimate, RegressionResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Not enough data to decide; does not fail a run.
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        })
    }
}

/// The outcome of one check, naming the property and the tolerance used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub property: String,
    pub tolerance: String,
    pub status: Status,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: &str, property: &str, tolerance: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.into(),
            property: property.into(),
            tolerance: tolerance.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            detail: detail.into(),
        }
    }

    pub fn skipped(name: &str, property: &str, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.into(),
            property: property.into(),
            tolerance: "-".into(),
            status: Status::Skipped,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: {} (tolerance {}) {}",
            self.status, self.name, self.property, self.tolerance, self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ExperimentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regression: Option<RegressionResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<DimensionEstimate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dimension_scan: Vec<DimensionEstimate>,
    pub verdicts: Vec<Verdict>,
    pub wall_seconds: f64,
}

impl RunReport {
    /// True unless some verdict failed.
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.status != Status::Fail)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}
