//! Simulator and statistics toolkit for the random interchange process on the
//! hypercube `Q_n`.
//!
//! Uniform random edges of `Q_n` are applied as transpositions. The resulting
//! permutation's cycles and the percolation clusters of the opened edges are tracked
//! together, every step is classified, and the [`stats`] module turns replica
//! outputs into estimates and bound checks. [`oracle`] holds the independent ground
//! truth used by the tests.

pub mod clusters;
pub mod cycles;
pub mod engine;
pub mod error;
pub mod format;
pub mod graph;
pub mod oracle;
mod size_index;
pub mod stats;

pub use clusters::ClusterState;
pub use cycles::{CycleChange, CycleState};
pub use engine::{
    derive_replica_seed, replay, run, run_replicas, EventCounts, EventKind, Histogram, Observer, Replica,
    RunConfig, RunHeader, RunOutcome, RunRecord, Snapshot, SnapshotSchedule, StepEvent, Threshold,
};
pub use error::{Error, Result};
pub use graph::{CompleteGraph, Edge, Hypercube, Topology, Vertex};
pub use oracle::{enumerate_exact, enumerate_exact_many, naive_cycle_decomposition, ExactDistribution, Observable};
pub use stats::{CheckReport, EstimateWithError, SpectrumEstimate, Verdict, WindowSpec};
