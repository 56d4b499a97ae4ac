//! Protocol-independent sliding-window leader election.
//!
//! This crate implements the election mechanism itself and nothing else: it
//! has no notion of networking, timers or a particular consensus protocol.
//! A consensus engine drives it by feeding in scoring events and vote
//! extensions and by asking it who leads a view.
//!
//! The moving parts:
//!
//! * [`ReputationMatrix`] — each replica's local score vector, updated by the
//!   five scoring rules ([`ScoreEvent`]). All arithmetic is done in integer
//!   units of `1/n` point so every replica replaying the same event sequence
//!   lands on bit-identical scores.
//! * [`LeaderList`] — a sliding window of `T_z + 2n` leader slots covering
//!   the current view onward. Elections settle future slots; gaps are filled
//!   with the round-robin initial leader.
//! * [`target_view`] — maps the view a vote is cast in to the future view
//!   whose election that vote participates in. Restricted to any aligned
//!   window of `n` source views it is a bijection onto an aligned window of
//!   `n` target views, so every future view is elected exactly once.
//! * [`generate_candidates`] / [`package_certificate`] /
//!   [`verify_certificate`] — candidate arrays carried in votes, and the
//!   `2f+1`-vote certificate that both finalizes an election and proves the
//!   packager's own leadership claim.

pub mod auth;
pub mod candidates;
pub mod certificate;
pub mod leader_list;
pub mod params;
pub mod score;
pub mod target;

pub use auth::{Authenticator, SimAuthenticator, Signature};
pub use candidates::generate_candidates;
pub use certificate::{package_certificate, verify_certificate, CertificateError, LeaderCertificate, VoteExtension};
pub use leader_list::{LeaderList, LeaderSlot, WindowError};
pub use params::{Alphas, Params, ParamsError};
pub use score::{ReputationMatrix, Score, ScoreEvent};
pub use target::{initial_leader, target_view, target_view_raw};

/// Replica identifier in `[0, n)`.
pub type ReplicaId = u32;

/// View number; views are numbered from 1.
pub type View = u64;
