use std::collections::BTreeSet;

use swle_core::{
    generate_candidates, initial_leader, package_certificate, target_view, verify_certificate,
    Authenticator, CertificateError, LeaderCertificate, LeaderList, Params, ReplicaId,
    ReputationMatrix, ScoreEvent, View, VoteExtension,
};

/// Why a proposal's leadership was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeadershipRejection {
    /// Certificate missing where required, present where forbidden, or
    /// failing verification.
    BadCert(CertificateError),
    MissingCert,
    UnexpectedCert,
    /// The proposer is not the determined leader of the view.
    IllegitimateProposer,
}

/// Everything the provider may consult when asked to produce the material
/// for a proposal in `view`: the election extensions collected from the
/// previous view's commit votes and view-change messages (already filtered
/// to those naming this replica), and how the previous view ended.
pub struct ProposeContext<'a> {
    pub view: View,
    pub prev_decided: bool,
    pub commit_extensions: &'a [VoteExtension],
    pub viewchange_extensions: &'a [VoteExtension],
    /// Distinct replicas from which any valid view-change for `view - 1`
    /// arrived, extensions or not.
    pub viewchange_voters: u32,
}

/// Leader election seam of the round engine. The engine reports view
/// lifecycle events and asks who leads; the provider owns all election
/// state. One provider instance per replica.
pub trait ElectionProvider {
    fn mechanism(&self) -> &'static str;

    /// Determined leader when entering `view`, before any leadership claim.
    fn entry_leader(&self, view: View) -> ReplicaId;

    /// Whether `view`'s elected slot is settled at this moment; `None` when
    /// the mechanism has no election state (round-robin).
    fn elected_slot_settled(&self, view: View) -> Option<bool>;

    /// View entered; `determined` is the entry-time leader.
    fn note_view_entered(&mut self, view: View, determined: ReplicaId);

    /// Extension to attach to this replica's commit vote or view-change
    /// message for `view`. `None` for mechanisms without extensions.
    fn vote_extension(&mut self, view: View, auth: &dyn Authenticator) -> Option<VoteExtension>;

    /// Additional recipient of commit votes for `view` (the next view's
    /// determined leader, who needs them to propose).
    fn commit_vote_collector(&self, view: View) -> Option<ReplicaId>;

    /// Certificate to embed when proposing in `cx.view`. `Ok(None)` means
    /// propose without one; `Err(())` means the vote set cannot be formed
    /// yet and the proposal must wait.
    #[allow(clippy::result_unit_err)]
    fn certificate_to_propose(
        &mut self,
        cx: &ProposeContext<'_>,
        auth: &dyn Authenticator,
    ) -> Result<Option<LeaderCertificate>, ()>;

    /// Validate a proposal's leadership, applying its election result on
    /// success, and return the leader the proposal manifests.
    fn validate_proposal(
        &mut self,
        view: View,
        proposer: ReplicaId,
        cert: Option<&LeaderCertificate>,
        auth: &dyn Authenticator,
    ) -> Result<ReplicaId, LeadershipRejection>;

    /// `view` timed out with `determined` as its leader at that moment.
    fn note_timeout(&mut self, view: View, determined: ReplicaId);

    /// A proposal by `leader` was finalized in `view`; applies its election
    /// result if this replica has not already done so.
    fn note_finalized(&mut self, view: View, leader: ReplicaId, cert: Option<&LeaderCertificate>);

    /// This replica led `view` to a decision; reward the senders of the
    /// first `2f+1` first-phase votes.
    fn note_promoters(&mut self, promoters: &[ReplicaId]);

    /// `view` is over (decided or timed out); slide any window state.
    fn note_view_completed(&mut self, view: View);

    /// Window invariant probe for the simulation harness.
    fn window_prefix_ok(&self) -> bool;
}

/// Plain rotation: the leader of `view` is `view mod n`. No scores, no
/// extensions, no certificates. After a timeout the next leader waits for a
/// quorum of view-change messages, mirroring the base protocol.
pub struct RoundRobinElector {
    params: Params,
}

impl RoundRobinElector {
    pub fn new(params: Params) -> Self {
        RoundRobinElector { params }
    }
}

impl ElectionProvider for RoundRobinElector {
    fn mechanism(&self) -> &'static str {
        "roundrobin"
    }

    fn entry_leader(&self, view: View) -> ReplicaId {
        initial_leader(view, self.params.n())
    }

    fn elected_slot_settled(&self, _view: View) -> Option<bool> {
        None
    }

    fn note_view_entered(&mut self, _view: View, _determined: ReplicaId) {}

    fn vote_extension(&mut self, _view: View, _auth: &dyn Authenticator) -> Option<VoteExtension> {
        None
    }

    fn commit_vote_collector(&self, _view: View) -> Option<ReplicaId> {
        None
    }

    fn certificate_to_propose(
        &mut self,
        cx: &ProposeContext<'_>,
        _auth: &dyn Authenticator,
    ) -> Result<Option<LeaderCertificate>, ()> {
        if cx.view == 1 || cx.prev_decided || cx.viewchange_voters >= self.params.quorum() {
            Ok(None)
        } else {
            Err(())
        }
    }

    fn validate_proposal(
        &mut self,
        view: View,
        proposer: ReplicaId,
        cert: Option<&LeaderCertificate>,
        _auth: &dyn Authenticator,
    ) -> Result<ReplicaId, LeadershipRejection> {
        if cert.is_some() {
            return Err(LeadershipRejection::UnexpectedCert);
        }
        let leader = initial_leader(view, self.params.n());
        if proposer != leader {
            return Err(LeadershipRejection::IllegitimateProposer);
        }
        Ok(leader)
    }

    fn note_timeout(&mut self, _view: View, _determined: ReplicaId) {}

    fn note_finalized(
        &mut self,
        _view: View,
        _leader: ReplicaId,
        _cert: Option<&LeaderCertificate>,
    ) {
    }

    fn note_promoters(&mut self, _promoters: &[ReplicaId]) {}

    fn note_view_completed(&mut self, _view: View) {}

    fn window_prefix_ok(&self) -> bool {
        true
    }
}

/// Sliding-window reputation-based election state for one replica.
pub struct SwleElector {
    id: ReplicaId,
    params: Params,
    matrix: ReputationMatrix,
    window: LeaderList,
    /// Election targets whose certificate this replica already applied, so a
    /// decide does not re-apply what proposal validation applied.
    applied_targets: BTreeSet<View>,
}

impl SwleElector {
    pub fn new(id: ReplicaId, params: Params) -> Self {
        SwleElector {
            id,
            matrix: ReputationMatrix::new(id, &params),
            window: LeaderList::bootstrap(&params),
            params,
            applied_targets: BTreeSet::new(),
        }
    }

    pub fn matrix(&self) -> &ReputationMatrix {
        &self.matrix
    }

    pub fn window(&self) -> &LeaderList {
        &self.window
    }

    fn apply_cert_once(&mut self, cert: &LeaderCertificate) {
        if self.applied_targets.contains(&cert.target_view) {
            return;
        }
        if self.window.apply_certificate(cert).is_ok() {
            self.applied_targets.insert(cert.target_view);
        }
    }

    /// First `2f+1` extensions (arrival order) naming this replica, if that
    /// many exist.
    fn quorum_of<'a>(&self, pool: &'a [VoteExtension]) -> Option<Vec<VoteExtension>> {
        let quorum = self.params.quorum() as usize;
        let matching: Vec<&'a VoteExtension> = pool
            .iter()
            .filter(|e| e.determined_leader == self.id)
            .take(quorum)
            .collect();
        (matching.len() == quorum).then(|| matching.into_iter().cloned().collect())
    }
}

impl ElectionProvider for SwleElector {
    fn mechanism(&self) -> &'static str {
        "swle"
    }

    fn entry_leader(&self, view: View) -> ReplicaId {
        self.window.determine_leader(view, None)
    }

    fn elected_slot_settled(&self, view: View) -> Option<bool> {
        Some(self.window.elected_leader(view).is_some())
    }

    fn note_view_entered(&mut self, view: View, determined: ReplicaId) {
        if self.params.normalization_due(view) {
            self.matrix.apply_event(&ScoreEvent::Normalized, &self.params);
        }
        self.matrix
            .apply_event(&ScoreEvent::ViewEntered { leader: determined }, &self.params);
    }

    fn vote_extension(&mut self, view: View, auth: &dyn Authenticator) -> Option<VoteExtension> {
        let target = target_view(view, &self.params);
        let candidates = generate_candidates(&mut self.matrix, target, &self.params);
        let next_leader = self.window.determine_leader(view + 1, None);
        Some(VoteExtension::new_signed(
            view,
            next_leader,
            target,
            candidates,
            self.id,
            auth,
        ))
    }

    fn commit_vote_collector(&self, view: View) -> Option<ReplicaId> {
        Some(self.window.determine_leader(view + 1, None))
    }

    fn certificate_to_propose(
        &mut self,
        cx: &ProposeContext<'_>,
        auth: &dyn Authenticator,
    ) -> Result<Option<LeaderCertificate>, ()> {
        if cx.view == 1 {
            return Ok(None); // bootstrap: no prior votes exist
        }
        // Certificates come from a homogeneous message kind: all commit
        // votes or all view-change messages, never a mixture.
        let votes = self
            .quorum_of(cx.commit_extensions)
            .or_else(|| self.quorum_of(cx.viewchange_extensions))
            .ok_or(())?;
        let target = target_view(cx.view - 1, &self.params);
        match package_certificate(votes, target, &self.params, auth) {
            Ok(cert) => Ok(Some(cert)),
            Err(_) => Err(()), // pool entries are pre-validated; treat as not ready
        }
    }

    fn validate_proposal(
        &mut self,
        view: View,
        proposer: ReplicaId,
        cert: Option<&LeaderCertificate>,
        auth: &dyn Authenticator,
    ) -> Result<ReplicaId, LeadershipRejection> {
        if view == 1 {
            if cert.is_some() {
                return Err(LeadershipRejection::UnexpectedCert);
            }
            let leader = self.window.determine_leader(1, None);
            if proposer != leader {
                return Err(LeadershipRejection::IllegitimateProposer);
            }
            return Ok(leader);
        }
        let cert = cert.ok_or(LeadershipRejection::MissingCert)?;
        verify_certificate(cert, proposer, view, &self.params, auth)
            .map_err(LeadershipRejection::BadCert)?;
        // A verified certificate is a proven leadership claim: it outranks
        // the elected and initial leaders of the view.
        self.apply_cert_once(cert);
        Ok(proposer)
    }

    fn note_timeout(&mut self, _view: View, determined: ReplicaId) {
        self.matrix.apply_event(
            &ScoreEvent::LeaderTimedOut {
                leader: determined,
            },
            &self.params,
        );
    }

    fn note_finalized(&mut self, _view: View, leader: ReplicaId, cert: Option<&LeaderCertificate>) {
        self.matrix
            .apply_event(&ScoreEvent::ProposalFinalized { leader }, &self.params);
        if let Some(cert) = cert {
            self.apply_cert_once(cert);
        }
    }

    fn note_promoters(&mut self, promoters: &[ReplicaId]) {
        self.matrix.apply_event(
            &ScoreEvent::PromotersRewarded {
                promoters: promoters.to_vec(),
            },
            &self.params,
        );
    }

    fn note_view_completed(&mut self, view: View) {
        self.window
            .advance_window(view, &self.params)
            .expect("views complete in order");
        let base = self.window.base_view();
        self.applied_targets = self.applied_targets.split_off(&base);
    }

    fn window_prefix_ok(&self) -> bool {
        self.window.prefix_filled()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use swle_core::SimAuthenticator;

    #[test]
    fn swle_entry_leader_follows_window() {
        let params = Params::new(4).unwrap();
        let e = SwleElector::new(0, params);
        assert_eq!(e.entry_leader(1), 1);
        assert_eq!(e.entry_leader(5), 1);
        assert_eq!(e.elected_slot_settled(1), Some(true));
        assert_eq!(e.elected_slot_settled(9), Some(false));
    }

    #[test]
    fn normalization_fires_before_entry_charge() {
        // At a normalization view the determined leader nets the entry
        // charge against the normalization bonus.
        let params = Params::new(4).unwrap().with_theta(10).unwrap();
        let mut e = SwleElector::new(0, params.clone());
        e.note_view_entered(10, 2);
        assert_eq!(e.matrix().score(2).units(), 4); // 4 + 4 - 4
        assert_eq!(e.matrix().score(1).units(), 8); // 4 + 4
    }

    #[test]
    fn extension_names_next_view_leader_and_target() {
        let params = Params::new(4).unwrap();
        let auth = SimAuthenticator;
        let mut e = SwleElector::new(3, params);
        let ext = e.vote_extension(1, &auth).unwrap();
        assert_eq!(ext.view, 1);
        assert_eq!(ext.determined_leader, 2); // leader of view 2
        assert_eq!(ext.target_view, 9);
        assert_eq!(ext.voter, 3);
        assert!(ext.verify_signature(&auth));
    }

    #[test]
    fn round_robin_waits_for_viewchange_quorum_after_timeout() {
        let params = Params::new(4).unwrap();
        let auth = SimAuthenticator;
        let mut e = RoundRobinElector::new(params);
        let cx = |prev_decided, vc: u32| ProposeContext {
            view: 5,
            prev_decided,
            commit_extensions: &[],
            viewchange_extensions: &[],
            viewchange_voters: vc,
        };
        assert_eq!(e.certificate_to_propose(&cx(true, 0), &auth), Ok(None));
        assert_eq!(e.certificate_to_propose(&cx(false, 2), &auth), Err(()));
        assert_eq!(e.certificate_to_propose(&cx(false, 3), &auth), Ok(None));
    }

    #[test]
    fn swle_requires_quorum_of_matching_extensions() {
        let params = Params::new(4).unwrap();
        let auth = SimAuthenticator;
        let mut e = SwleElector::new(2, params.clone());
        let ext = |voter: ReplicaId| {
            VoteExtension::new_signed(1, 2, 9, vec![1, 2, 3, 0], voter, &auth)
        };
        // Only 2f matching messages: the vote set cannot be formed.
        let pool = vec![ext(0), ext(1)];
        let cx = ProposeContext {
            view: 2,
            prev_decided: true,
            commit_extensions: &pool,
            viewchange_extensions: &[],
            viewchange_voters: 0,
        };
        assert_eq!(e.certificate_to_propose(&cx, &auth), Err(()));

        let pool = vec![ext(0), ext(1), ext(3)];
        let cx = ProposeContext {
            view: 2,
            prev_decided: true,
            commit_extensions: &pool,
            viewchange_extensions: &[],
            viewchange_voters: 0,
        };
        let cert = e.certificate_to_propose(&cx, &auth).unwrap().unwrap();
        assert_eq!(cert.target_view, 9);
        assert_eq!(cert.claimant(), Some(2));
        // Everyone initially eligible: the target's own initial leader wins.
        assert_eq!(cert.elected, Some(1));
    }

    #[test]
    fn proven_claim_is_applied_and_outranks() {
        let params = Params::new(4).unwrap();
        let auth = SimAuthenticator;
        let mut packager = SwleElector::new(2, params.clone());
        let pool: Vec<VoteExtension> = (0..3)
            .map(|voter| VoteExtension::new_signed(1, 2, 9, vec![1, 2, 3, 0], voter, &auth))
            .collect();
        let cx = ProposeContext {
            view: 2,
            prev_decided: true,
            commit_extensions: &pool,
            viewchange_extensions: &[],
            viewchange_voters: 0,
        };
        let cert = packager.certificate_to_propose(&cx, &auth).unwrap().unwrap();

        let mut verifier = SwleElector::new(0, params);
        assert_eq!(verifier.elected_slot_settled(9), Some(false));
        let manifested = verifier.validate_proposal(2, 2, Some(&cert), &auth).unwrap();
        assert_eq!(manifested, 2);
        // Applying the certificate settled the election for view 9.
        assert_eq!(verifier.window().elected_leader(9), Some(1));

        // Same certificate claimed by the wrong proposer is rejected.
        let err = verifier.validate_proposal(2, 3, Some(&cert), &auth).unwrap_err();
        assert!(matches!(
            err,
            LeadershipRejection::BadCert(CertificateError::WrongClaimant)
        ));
    }
}
