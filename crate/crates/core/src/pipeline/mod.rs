//! End-to-end drivers: single runs, geometry scans and the shot-budget
//! statistics harness, plus their file outputs.

mod config;
mod output;
mod run;
mod stats;

pub use config::{parse_mode, ConfigFile, GradientKind, Method, Overrides, PathList, RunConfig, Solver, VqeSettings};
pub use output::{read_report, write_error, write_report, write_scan, write_stats};
pub use run::{method_energy, run_prepared, run_scan, run_single, Prepared, ScanRow, TailOutcome};
pub use stats::{quantile, run_statistics, summarize, RawRecord, StatSummary, Stats, StatsOutput};

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Config,
    Hamio,
    Activesolver,
    Cbt,
    Tailor,
    Cc,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("serializable");
        f.write_str(s.as_str().expect("string"))
    }
}

/// Stage-tagged failure; serializes as the machine-readable error record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("{stage} stage failed ({kind}): {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub kind: String,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: Stage, kind: &str, message: String) -> Self {
        PipelineError {
            stage,
            kind: kind.to_string(),
            message,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

impl From<crate::hamio::HamError> for PipelineError {
    fn from(e: crate::hamio::HamError) -> Self {
        use crate::hamio::HamError::*;
        let kind = match &e {
            Parse { .. } => "parse",
            Io { .. } => "io",
            UnsupportedReference(_) => "unsupported_reference",
            Selection(_) => "selection",
            InvalidSpace(_) => "invalid_space",
        };
        PipelineError::new(Stage::Hamio, kind, e.to_string())
    }
}

impl From<crate::activesolver::SolverError> for PipelineError {
    fn from(e: crate::activesolver::SolverError) -> Self {
        use crate::activesolver::SolverError::*;
        let kind = match &e {
            DimensionCap { .. } => "dimension_cap",
            QubitCap { .. } => "qubit_cap",
            NotConverged(_) => "not_converged",
            Unsupported(_) => "unsupported",
        };
        PipelineError::new(Stage::Activesolver, kind, e.to_string())
    }
}

impl From<crate::cbt::CbtError> for PipelineError {
    fn from(e: crate::cbt::CbtError) -> Self {
        use crate::cbt::CbtError::*;
        let kind = match &e {
            InvalidBudget(_) => "invalid_budget",
            DegenerateReference { .. } => "degenerate_reference",
            DegenerateProjection => "degenerate_projection",
        };
        PipelineError::new(Stage::Cbt, kind, e.to_string())
    }
}

impl From<crate::tailor::TailorError> for PipelineError {
    fn from(e: crate::tailor::TailorError) -> Self {
        use crate::tailor::TailorError::*;
        let kind = match &e {
            Undefined { .. } => "tailoring_undefined",
            NotFinalized(_) => "not_finalized",
            WrongSector(_) => "wrong_sector",
            Mapping(_) => "mapping",
        };
        PipelineError::new(Stage::Tailor, kind, e.to_string())
    }
}

impl From<crate::cc::CcError> for PipelineError {
    fn from(e: crate::cc::CcError) -> Self {
        use crate::cc::CcError::*;
        let kind = match &e {
            Shape(..) => "shape",
            ContractViolation(_) => "contract_violation",
            Trace { .. } => "io",
        };
        PipelineError::new(Stage::Cc, kind, e.to_string())
    }
}
