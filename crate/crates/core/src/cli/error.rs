use serde_json::{json, Value};
use thiserror::Error;

use super::report::ReportError;
use crate::charts::ChartError;
use crate::curvature::CurvatureError;
use crate::fefferman::FeffermanError;
use crate::ke_ode::KeError;
use crate::monge_ampere::MaError;
use crate::obstruction::ObstructionError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Failures of a run, sorted by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config file, chart, or a task the chart does not support.
    #[error("{0}")]
    Config(String),
    /// No Kähler–Einstein solution exists; `report` carries the witness.
    #[error("{message}")]
    Infeasible { message: String, report: Value },
    /// A solver or residual check failed.
    #[error("{message}")]
    Numerical { message: String, report: Option<Value> },
}

impl CliError {
    pub fn config(msg: impl ToString) -> CliError {
        CliError::Config(msg.to_string())
    }

    pub fn numerical(msg: impl ToString) -> CliError {
        CliError::Numerical {
            message: msg.to_string(),
            report: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Infeasible { .. } => EXIT_INFEASIBLE,
            CliError::Numerical { .. } => EXIT_NUMERICAL,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Infeasible { .. } => "infeasible",
            CliError::Numerical { .. } => "numerical",
        }
    }

    /// The machine-readable form printed on stderr.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
            }
        });
        match self {
            CliError::Infeasible { report, .. } | CliError::Numerical { report: Some(report), .. } => {
                v["report"] = report.clone();
            }
            _ => {}
        }
        v
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::config(format!("i/o: {e}"))
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> CliError {
        CliError::config(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> CliError {
        CliError::config(format!("json: {e}"))
    }
}

impl From<ChartError> for CliError {
    fn from(e: ChartError) -> CliError {
        match e {
            ChartError::Jet(_) => CliError::numerical(e),
            _ => CliError::config(e),
        }
    }
}

impl From<CurvatureError> for CliError {
    fn from(e: CurvatureError) -> CliError {
        match e {
            CurvatureError::Chart(c) => c.into(),
            CurvatureError::NotConstantScalar { .. } | CurvatureError::InsufficientOrder { .. } => {
                CliError::config(e)
            }
            _ => CliError::numerical(e),
        }
    }
}

impl From<FeffermanError> for CliError {
    fn from(e: FeffermanError) -> CliError {
        match e {
            FeffermanError::Curvature(c) => c.into(),
            FeffermanError::Chart(c) => c.into(),
            FeffermanError::DerivativeShortfall { .. } | FeffermanError::SurfaceOnly(_) => CliError::config(e),
            _ => CliError::numerical(e),
        }
    }
}

impl From<ObstructionError> for CliError {
    fn from(e: ObstructionError) -> CliError {
        match e {
            ObstructionError::Curvature(c) => c.into(),
            ObstructionError::Chart(c) => c.into(),
            _ => CliError::config(e),
        }
    }
}

impl From<KeError> for CliError {
    fn from(e: KeError) -> CliError {
        match e {
            KeError::EmptyEigenvalues | KeError::DimensionMismatch { .. } | KeError::ReducedOutOfRange(_) => {
                CliError::config(e)
            }
            _ => CliError::numerical(e),
        }
    }
}

impl From<MaError> for CliError {
    fn from(e: MaError) -> CliError {
        match e {
            MaError::Chart(c) => c.into(),
            MaError::Curvature(c) => c.into(),
            MaError::Ke(k) => k.into(),
            MaError::DimensionMismatch { .. } | MaError::XOutOfRange(_) | MaError::EigenvalueSpread { .. } => {
                CliError::config(e)
            }
            _ => CliError::numerical(e),
        }
    }
}
