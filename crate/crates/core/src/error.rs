use thiserror::Error;

use crate::model::Diagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("system is invalid: {}", render_diagnostics(.0))]
    InvalidSystem(Vec<Diagnostic>),
    #[error("unknown definition `{0}`")]
    UnknownDef(String),
    #[error("unknown agent `{0}`")]
    AgentUnknown(String),
    #[error("parameter `{0}` has no value or bound")]
    ParamUnbound(String),
    #[error("parameter `{name}` = {value} is below its declared bound {bound}")]
    ParamBelowBound { name: String, value: i64, bound: i64 },
    #[error("agent sets differ")]
    AgentMismatch,
    #[error("instances must both be concrete or both be symbolic")]
    MixedSteps,
    #[error("operation requires a concrete step index")]
    SymbolicStep,
    #[error("invalid bound: {0}")]
    InvalidBound(String),
    #[error("profiles differ in shape")]
    ShapeMismatch,
    #[error("padding is not total: missing agent `{0}`")]
    InvalidPadding(String),
    #[error("edit at path depth {depth} does not match the realized path")]
    EditMismatch { depth: usize },
}

fn render_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
