//! Measurement-based entanglement routing on graph-state models of quantum
//! networks.
//!
//! The crate covers the graph rewrites behind Pauli measurements, a small
//! state-vector oracle that checks them, topology generators, BFS DODAG
//! construction, the DODAG-X / X / repeater routing protocols, and the
//! benchmark sweeps that compare their measurement counts.

pub mod dodag;
pub mod error;
pub mod graph;
pub mod measurement;
pub mod oracle;
pub mod protocols;
pub mod sweep;
pub mod topology;

pub use dodag::{build_dodag, select_root, DodagTree, TreeJson};
pub use error::{Error, Result};
pub use graph::{Graph, GraphJson, OrderedPath, VertexId};
pub use measurement::{
    measure_x, measure_z, predict_endpoint_neighborhoods, Measurement, MeasurementLog,
};
pub use protocols::{
    dodag_x, dodag_x_nparty, intersections, repeater_protocol, x_protocol_pair, x_protocol_triplet,
    IntersectionMap, MeasurementCounts, PartySet, RoutingOutcome,
};
pub use topology::{generate, TopologySpec};
