use crate::params::Params;
use crate::ReplicaId;

/// A non-negative reputation score counted in units of `1/n` point.
///
/// Updates clamp at zero, and everything is integer arithmetic: two replicas
/// applying the same event sequence always hold identical scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Score(u64);

impl Score {
    pub fn from_units(units: u64) -> Self {
        Score(units)
    }

    /// Initial score: one full point (`n` units).
    pub fn initial(params: &Params) -> Self {
        Score(params.alphas().normalize.unsigned_abs())
    }

    pub fn units(self) -> u64 {
        self.0
    }

    /// Score in points, for display only.
    pub fn points(self, params: &Params) -> f64 {
        self.0 as f64 / f64::from(params.n())
    }

    /// `max(score + delta, 0)` in units.
    pub fn apply(&mut self, delta: i64) {
        self.0 = if delta >= 0 {
            self.0.saturating_add(delta as u64)
        } else {
            self.0.saturating_sub(delta.unsigned_abs())
        };
    }
}

/// Scoring rule trigger, carrying the replicas the rule affects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScoreEvent {
    /// R1: a new view was entered; charged to its determined leader.
    ViewEntered { leader: ReplicaId },
    /// R2: a view timed out; charged to the leader determined at timeout time.
    LeaderTimedOut { leader: ReplicaId },
    /// R3: a proposal was finalized; rewards its leader.
    ProposalFinalized { leader: ReplicaId },
    /// R4: a view completed successfully under our own leadership; rewards
    /// the senders of the first `2f+1` valid first-phase votes.
    PromotersRewarded { promoters: Vec<ReplicaId> },
    /// R5: periodic normalization, rewards everybody.
    Normalized,
}

/// One replica's local view of everyone's reputation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReputationMatrix {
    owner: ReplicaId,
    scores: Vec<Score>,
}

impl ReputationMatrix {
    /// Fresh matrix with every entry at the initial one-point score.
    pub fn new(owner: ReplicaId, params: &Params) -> Self {
        ReputationMatrix {
            owner,
            scores: vec![Score::initial(params); params.n() as usize],
        }
    }

    pub fn owner(&self) -> ReplicaId {
        self.owner
    }

    pub fn score(&self, replica: ReplicaId) -> Score {
        self.scores[replica as usize]
    }

    pub fn scores(&self) -> &[Score] {
        &self.scores
    }

    /// Whether `replica` may appear in candidate arrays: score at least
    /// `|alpha_0|` (one point).
    pub fn eligible(&self, replica: ReplicaId, params: &Params) -> bool {
        self.scores[replica as usize].units() >= params.eligibility_units()
    }

    /// Apply one scoring rule with clamping at zero.
    pub fn apply_event(&mut self, event: &ScoreEvent, params: &Params) {
        let alphas = params.alphas();
        match event {
            ScoreEvent::ViewEntered { leader } => {
                self.scores[*leader as usize].apply(alphas.view_entry);
            }
            ScoreEvent::LeaderTimedOut { leader } => {
                self.scores[*leader as usize].apply(alphas.timeout);
            }
            ScoreEvent::ProposalFinalized { leader } => {
                self.scores[*leader as usize].apply(alphas.finalized);
            }
            ScoreEvent::PromotersRewarded { promoters } => {
                for p in promoters {
                    self.scores[*p as usize].apply(alphas.promoter);
                }
            }
            ScoreEvent::Normalized => {
                for s in &mut self.scores {
                    s.apply(alphas.normalize);
                }
            }
        }
    }
}
