//! A basic non-chained HotStuff-style round engine.
//!
//! Each view runs one three-phase consensus round (prepare, precommit,
//! commit) plus a decide broadcast, under a leader chosen by a pluggable
//! [`ElectionProvider`]: either plain round-robin rotation or the
//! sliding-window reputation mechanism from `swle-core`. Under the latter,
//! commit votes and view-change messages carry signed election extensions,
//! and every proposal from view 2 onward embeds a leader certificate that
//! simultaneously proves the proposer's leadership and finalizes a future
//! view's election.
//!
//! Engines are single-threaded deterministic state machines: all
//! nondeterminism enters through the order of `(message, time)` inputs.

pub mod elector;
pub mod engine;
pub mod messages;
pub mod wire;

pub use elector::{
    ElectionProvider, LeadershipRejection, ProposeContext, RoundRobinElector, SwleElector,
};
pub use engine::{Action, EngineConfig, Observation, Outbound, Recipient, ReplicaEngine};
pub use messages::{
    Batch, DecideMsg, Digest, Message, Phase, PhaseAdvance, Proposal, QuorumCertificate, Vote,
    ViewChangeMsg,
};
