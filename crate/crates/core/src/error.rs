use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} is outside the supported range 1..={max}", max = crate::graph::MAX_DIMENSION)]
    InvalidDimension(u32),

    #[error("vertex {vertex} is out of range for a graph with {vertex_count} vertices")]
    VertexOutOfRange { vertex: u64, vertex_count: u64 },

    #[error("edge #{index} {{{a}, {b}}} is not an edge of the graph")]
    InvalidEdge { index: usize, a: u64, b: u64 },

    #[error("contract violation: {0}")]
    Contract(&'static str),

    #[error("internal invariant violated at t={t}: {what}")]
    Invariant { t: u64, what: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    #[error("threshold {0} is not tracked by the snapshot data")]
    MissingThreshold(u64),

    #[error("incomplete data: {what}; missing t = {}", format_gaps(.missing))]
    IncompleteData { what: String, missing: Vec<u64> },

    #[error("enumeration of {sequences} sequences exceeds the budget of {budget}")]
    BudgetExceeded { sequences: u128, budget: u128 },

    #[error("malformed snapshot data at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_gaps(missing: &[u64]) -> String {
    const SHOWN: usize = 16;
    let mut s = missing
        .iter()
        .take(SHOWN)
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(", ");
    if missing.len() > SHOWN {
        s.push_str(&format!(", ... ({} total)", missing.len()));
    }
    s
}
