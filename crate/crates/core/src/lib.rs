//! Dispersion of anonymous mobile robots on port-labeled graphs.
//!
//! `k` robots start together at one node and must end on `k` distinct nodes,
//! each robot holding `O(log Δ)` bits. The crate contains the graph model, the
//! per-robot protocol, a synchronous simulator that records traces, and
//! checkers that verify recorded traces against an independent DFS oracle.

pub mod checkers;
pub mod engine;
pub mod graph;
pub mod robot;
pub mod trace;

pub use checkers::{oracle_dfs, run_all, Checker, OracleTrace, Verdict};
pub use engine::{run, run_election, ElectionReport, EngineFault, SimulationConfig};
pub use graph::{GraphSpec, NodeId, Port, PortLabeledGraph};
pub use trace::{Outcome, RunSummary, SimulationResult, TraceLevel};
