use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite cost at node {node}, mode {mode}")]
    NonFiniteCost { node: usize, mode: usize },

    #[error("value vector has {got} entries, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dependency graph has a cycle: {}", format_cycle(.witness))]
    Cycle { witness: Vec<usize> },

    #[error("bucket width {0} is not positive; use dijkstra_solve")]
    InvalidBucketWidth(f64),

    #[error("bucket index for value {value} exceeds 2^32 at width {width}")]
    BucketOverflow { value: f64, width: f64 },

    #[error("metadata required: {0}")]
    MissingMetadata(&'static str),

    #[error("vertex shortcut called on a cost not marked concave")]
    NotConcave,

    #[error("absorbing non-target state {node} (control {control})")]
    AbsorbingState { node: usize, control: usize },

    #[error("degenerate simplex {index}: {reason}")]
    DegenerateSimplex { index: usize, reason: String },

    #[error("interior node {node} borders the domain exterior without a boundary flag")]
    UnflaggedBoundary { node: usize },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn format_cycle(w: &[usize]) -> String {
    w.iter()
        .map(|i| format!("x{i}"))
        .collect::<Vec<_>>()
        .join(" -> ")
}

pub type Result<T> = std::result::Result<T, Error>;
