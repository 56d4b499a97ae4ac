use crate::params::Params;
use crate::score::{ReputationMatrix, ScoreEvent};
use crate::target::initial_leader;
use crate::{ReplicaId, View};

/// Candidate array for the election targeting `v_target`: the initial
/// leaders of views `v_target ..= v_target + n - 1`, in ascending view
/// order, keeping only those the local matrix deems eligible.
///
/// If nobody qualifies, the periodic normalization increment is applied to
/// the caller's matrix (persistently, this is the local fallback of the
/// generation algorithm) and the scan reruns; since the increment is
/// positive this terminates with a non-empty array. Initial leaders are a
/// pure function of the view, so `v_target` may point past the leader
/// window.
pub fn generate_candidates(
    matrix: &mut ReputationMatrix,
    v_target: View,
    params: &Params,
) -> Vec<ReplicaId> {
    loop {
        let mut candidates = Vec::with_capacity(params.n() as usize);
        for i in 0..u64::from(params.n()) {
            let candidate = initial_leader(v_target + i, params.n());
            if matrix.eligible(candidate, params) {
                candidates.push(candidate);
            }
        }
        if !candidates.is_empty() {
            return candidates;
        }
        matrix.apply_event(&ScoreEvent::Normalized, params);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::Score;

    fn params4() -> Params {
        Params::new(4).unwrap()
    }

    fn matrix_with_units(units: &[u64], params: &Params) -> ReputationMatrix {
        let mut m = ReputationMatrix::new(0, params);
        for (k, &u) in units.iter().enumerate() {
            set_units(&mut m, k as ReplicaId, u, params);
        }
        m
    }

    fn set_units(m: &mut ReputationMatrix, k: ReplicaId, units: u64, params: &Params) {
        // Drive the score to an exact value through public events.
        m.apply_event(&ScoreEvent::LeaderTimedOut { leader: k }, params); // clamp to 0
        for _ in 0..units {
            m.apply_event(
                &ScoreEvent::PromotersRewarded { promoters: vec![k] },
                params,
            );
        }
        assert_eq!(m.score(k), Score::from_units(units));
    }

    #[test]
    fn all_eligible_yields_rotation_from_target() {
        // Initial leaders of views 9..=12 at n=4: 1, 2, 3, 0.
        let p = params4();
        let mut m = ReputationMatrix::new(0, &p);
        assert_eq!(generate_candidates(&mut m, 9, &p), vec![1, 2, 3, 0]);
    }

    #[test]
    fn ineligible_replica_is_skipped() {
        let p = params4();
        let mut m = matrix_with_units(&[4, 4, 0, 4], &p);
        assert_eq!(generate_candidates(&mut m, 9, &p), vec![1, 3, 0]);
    }

    #[test]
    fn empty_result_triggers_local_normalization() {
        let p = params4();
        let mut m = matrix_with_units(&[0, 0, 0, 0], &p);
        assert_eq!(generate_candidates(&mut m, 9, &p), vec![1, 2, 3, 0]);
        // The fallback mutated the persistent matrix, not a copy.
        for k in 0..4 {
            assert_eq!(m.score(k), Score::from_units(4));
        }
    }

    #[test]
    fn output_is_duplicate_free_and_eligible() {
        let p = params4();
        let mut m = matrix_with_units(&[5, 0, 3, 17], &p);
        let c = generate_candidates(&mut m, 42, &p);
        let mut sorted = c.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), c.len());
        for &k in &c {
            assert!(m.eligible(k, &p));
        }
    }
}
