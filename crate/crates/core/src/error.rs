use thiserror::Error;

use crate::market::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid market: {}", join(.0))]
    InvalidMarket(Vec<Violation>),

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("assignment belongs to firm #{found}, expected firm #{expected}")]
    ForeignAssignment { expected: usize, found: usize },

    #[error("situation does not involve worker #{0}")]
    ForeignSituation(usize),

    #[error("schedule has {found} shares but the market has {expected} acceptable assignments")]
    ShareCount { expected: usize, found: usize },

    #[error("schedule has a negative share at position {0}")]
    NegativeShare(usize),

    #[error("schedule violates the capacity of agent #{0}")]
    Infeasible(usize),

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("{what} is {got}, above the configured bound {bound}")]
    BoundExceeded { what: &'static str, got: usize, bound: usize },

    #[error("the market has no acceptable assignments")]
    NoAcceptableAssignments,

    #[error("no agent row admits an assignment column without that agent")]
    NoOffColumnRow,

    #[error("ordinal pivot impossible: the remaining columns are all agent columns")]
    OrdinalPivotBlocked,

    #[error("column {0} is not in the basis")]
    NotInBasis(usize),

    #[error("column {0} is already in the basis")]
    AlreadyInBasis(usize),

    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error("not a team market: {}", .0.join("; "))]
    NotTeamMarket(Vec<String>),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
