use swle_core::{ReplicaId, View};

/// What happened in one view, across all correct replicas of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewRecord {
    pub view: View,
    /// Final determined leader per correct replica, ordered by replica id.
    pub determined: Vec<ReplicaId>,
    /// Majority determination among correct replicas.
    pub leader: ReplicaId,
    /// All correct replicas determined the same leader.
    pub unified: bool,
    /// The majority-determined leader is a correct replica.
    pub leader_correct: bool,
    /// At least one correct replica finalized a payload in this view.
    pub finalized: bool,
    /// No correct replica finalized; the view ended by timeout.
    pub timed_out: bool,
    /// Earliest entry into the view among correct replicas.
    pub entry_us: u64,
    /// Time the `2f+1`-th correct replica finalized, when that many did.
    pub decide_us: Option<u64>,
    /// Operations committed by this view's payload (0 when none).
    pub ops: u32,
    /// When the finalized payload's operations entered the system.
    pub injected_at_us: Option<u64>,
    /// Some correct replica entered the view with its elected slot unset.
    pub entry_elected_missing: bool,
}

/// Majority determination and whether it was unanimous. Ties break to the
/// smallest replica id so the result is deterministic.
pub fn resolve_leader(determined: &[ReplicaId]) -> (ReplicaId, bool) {
    assert!(!determined.is_empty(), "no correct replicas recorded");
    let mut counts: Vec<(ReplicaId, usize)> = Vec::new();
    for &d in determined {
        match counts.iter_mut().find(|(id, _)| *id == d) {
            Some((_, c)) => *c += 1,
            None => counts.push((d, 1)),
        }
    }
    let max = counts.iter().map(|(_, c)| *c).max().unwrap();
    let leader = counts
        .iter()
        .filter(|(_, c)| *c == max)
        .map(|(id, _)| *id)
        .min()
        .unwrap();
    (leader, counts.len() == 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unanimous_determination_is_unified() {
        assert_eq!(resolve_leader(&[3, 3, 3]), (3, true));
    }

    #[test]
    fn split_determination_takes_majority() {
        assert_eq!(resolve_leader(&[2, 1, 2]), (2, false));
    }

    #[test]
    fn tie_breaks_to_lowest_id() {
        assert_eq!(resolve_leader(&[5, 1, 5, 1]), (1, false));
    }
}
