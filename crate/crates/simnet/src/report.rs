use std::collections::BTreeMap;

use metrics::{Summary, ViewRecord};
use thiserror::Error;

use swle_core::{ReplicaId, View};

use crate::config::{ConfigError, Mechanism};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// Two correct replicas finalized different payloads in one view.
    ConflictingFinalization,
    /// Two different proposers manifested verified leadership of one view.
    ConflictingClaim,
    /// A replica's leader window lost its elected-prefix shape.
    WindowPrefixBroken,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::ConflictingFinalization => "conflicting_finalization",
            ViolationKind::ConflictingClaim => "conflicting_claim",
            ViolationKind::WindowPrefixBroken => "window_prefix_broken",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub kind: ViolationKind,
    pub view: View,
    pub detail: String,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invariant violation at view {}: {} ({})", .violation.view, .violation.kind.as_str(), .violation.detail)]
    Violation {
        violation: Violation,
        /// Recent event log leading up to the violation.
        trace: Vec<String>,
    },
    #[error("simulation stalled: {0}")]
    Stalled(String),
}

/// Everything one simulation run produced.
#[derive(Debug, Clone)]
pub struct SimulationReport {
    pub mechanism: Mechanism,
    pub seed: u64,
    pub records: Vec<ViewRecord>,
    pub summary: Summary,
    pub sim_end_us: u64,
    pub v_c: Option<View>,
    /// Per finalized view, the senders of the first `2f+1` prepare votes as
    /// seen by that view's (correct) leader, in arrival order.
    pub promoters: BTreeMap<View, Vec<ReplicaId>>,
}

impl SimulationReport {
    pub fn per_view_csv(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        metrics::write_per_view_csv(&self.records, &mut buf).expect("vec write");
        buf
    }

    pub fn summary_json(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        metrics::write_summary_json(&self.summary, &mut buf).expect("vec write");
        buf
    }
}
