use thiserror::Error;

use crate::graph::InstanceViolation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed document: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("invalid {field}: {reason}")]
    Invariant { field: String, reason: String },

    #[error("infeasible instance: {}", format_violations(.0))]
    Infeasible(Vec<InstanceViolation>),

    #[error("invalid generator config: {0}")]
    Config(String),

    #[error("oracle limit: {0}")]
    OracleLimit(String),

    #[error("unreachable state at node {node}, subset {mask:#b}")]
    UnreachableState { node: usize, mask: u32 },

    #[error("flow on edge {from}->{to} which is not in the graph")]
    NonEdge { from: usize, to: usize },

    #[error("not a tree")]
    NotATree,

    #[error("graph is disconnected")]
    Disconnected,

    #[error("{0}")]
    Bench(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invariant(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invariant {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

fn format_violations(v: &[InstanceViolation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
