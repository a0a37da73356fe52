//! Network topologies, transmission costs and a deterministic
//! message-passing simulator.

mod comm;
mod cost;
mod engine;
mod topology;

pub use comm::{comm_split, split_ranks, CommId, Communicator, WORLD};
pub use cost::{optimal_packet_size, pipelined_optimum, transfer_cost, CostModel, Ports, Switching};
pub(crate) use engine::Channel;
pub use engine::{
    CollRecord, Comm, Event, Payload, Proc, Received, SimReport, SimTrace, World, ANY, ANY_TAG, PROC_NULL,
};
pub use topology::{Topology, TopologyKind, TopologyMetrics, EXHAUSTIVE_BISECTION_LIMIT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("deadlock: blocked ranks {blocked:?}, wait-for edges {edges:?}")]
    Deadlock { blocked: Vec<usize>, edges: Vec<(usize, usize)> },
    #[error("unmatched message from {src} to {dst} (tag {tag}, {units} units)")]
    UnmatchedMessage { src: usize, dst: usize, tag: i64, units: u64 },
    #[error("rank {rank} out of range for communicator of size {size}")]
    InvalidRank { rank: usize, size: usize },
    #[error("domain error: {0}")]
    Domain(String),
}
