//! Deterministic discrete-event simulator for the election mechanism and
//! its host consensus engine: partial synchrony with GST and a post-GST
//! delivery bound, authenticated point-to-point channels, configurable
//! Byzantine and crash adversaries, and global invariant checkers.
//!
//! A run is a pure function of `(scenario, seed)`: one event queue ordered
//! by `(time, sequence)`, one seeded RNG, integer-microsecond time, no wall
//! clock and no threads inside a run. Independent runs fan out in parallel
//! through [`run_batch`].

pub mod batch;
pub mod config;
pub mod event;
pub mod network;
pub mod report;
pub mod rng;
pub mod world;

pub use batch::{run_batch, run_batch_sequential, Job};
pub use config::{
    ByzantineStrategy, ConfigError, FaultSpec, LatencyGroups, Mechanism, PreGstPolicy, Scenario,
};
pub use event::{EventKind, Injection, SimEvent};
pub use network::NetworkModel;
pub use report::{SimError, SimulationReport, Violation, ViolationKind};
pub use world::{run, run_with_injections};
