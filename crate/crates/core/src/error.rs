use thiserror::Error;

use crate::graph::VertexId;
use crate::measurement::MeasurementLog;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} is out of range for a graph of {n} vertices")]
    VertexOutOfRange { vertex: VertexId, n: usize },

    #[error("vertex {0} is not active")]
    InactiveVertex(VertexId),

    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),

    #[error("no path between {from} and {to}")]
    NoPath { from: VertexId, to: VertexId },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("graph is not a tree")]
    NotATree,

    #[error("invalid path: {0}")]
    InvalidPath(String),

    /// An X measurement was requested with a witness outside the target's
    /// neighborhood. Routing code never repairs this; it is a logic error.
    #[error("witness {witness} is not a neighbor of measured vertex {target}")]
    WitnessNotNeighbor { target: VertexId, witness: VertexId },

    #[error("capacity exceeded: {what} supports at most {limit}, got {got}")]
    Capacity {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    #[error("requested measurement outcome has probability {0:e}")]
    ZeroProbability(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid party set: {0}")]
    InvalidParties(String),

    #[error("topology generation failed after {attempts} attempts")]
    GenerationFailed { attempts: u32 },

    #[error("routing failed: {reason}")]
    RoutingFailed {
        reason: String,
        partial_log: MeasurementLog,
    },

    #[error("percent difference undefined for a zero baseline mean")]
    ZeroBaseline,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
