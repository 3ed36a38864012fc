use thiserror::Error;

use crate::analysis::Violation;
use crate::dmuss::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("element {value} does not belong to a field of order {order}")]
    ForeignElement { value: u64, order: u64 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("{0}")]
    Usage(String),

    #[error("server {server} is not in the access set of user {user}")]
    AccessViolation { user: usize, server: usize },

    #[error("rate tuple is infeasible: {}", format_violations(.0))]
    Infeasible(Vec<Violation>),

    #[error("parameter search failed after {attempts} attempts: {}", .report.summary())]
    ParamSearchFailed {
        attempts: usize,
        report: Box<ValidationReport>,
    },
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
