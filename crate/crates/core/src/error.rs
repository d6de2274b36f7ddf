use thiserror::Error;

use crate::bigraph::Side;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{side} index {index} out of range (size {len})")]
    OutOfRange { side: Side, index: usize, len: usize },

    #[error("nothing to peel: graph has no edges")]
    NothingToPeel,

    #[error("exhaustive search refused: {nodes} nodes exceeds limit {limit}")]
    TooLarge { nodes: usize, limit: usize },

    #[error("cannot sample: {0} side is empty")]
    EmptySide(Side),

    #[error("cannot sample: graph has no edges")]
    NoEdges,

    #[error("second difference needs at least 3 scores, got {0}")]
    TooShort(usize),

    #[error("sampled subgraph {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}
