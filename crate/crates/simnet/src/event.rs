use std::cmp::Ordering;

use consensus_engine::Message;
use swle_core::{ReplicaId, View};

/// Test-only faults fed straight to the global invariant checkers,
/// bypassing the engines and the authenticator.
#[derive(Debug, Clone)]
pub enum Injection {
    ConflictingFinalization {
        view: View,
        replica: ReplicaId,
        digest: u64,
    },
    ConflictingClaim { view: View, claimant: ReplicaId },
}

#[derive(Debug, Clone)]
pub enum EventKind {
    Deliver { to: ReplicaId, msg: Message },
    TimerFire { replica: ReplicaId, view: View },
    Inject(Injection),
}

/// A scheduled simulation event. Events are processed in `(time, seq)`
/// order; the sequence number is a total-order tiebreaker assigned at
/// scheduling time, so identical seeds replay identical event sequences.
#[derive(Debug, Clone)]
pub struct SimEvent {
    pub time_us: u64,
    pub seq: u64,
    pub kind: EventKind,
}

impl PartialEq for SimEvent {
    fn eq(&self, other: &Self) -> bool {
        self.time_us == other.time_us && self.seq == other.seq
    }
}

impl Eq for SimEvent {}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SimEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.time_us, self.seq).cmp(&(other.time_us, other.seq))
    }
}
