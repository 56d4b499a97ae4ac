use thiserror::Error;

use crate::auth::{Authenticator, Signature};
use crate::params::Params;
use crate::target::{initial_leader, target_view_raw};
use crate::{ReplicaId, View};

/// Rejection reasons for leader certificates and their vote sets.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum CertificateError {
    #[error("malformed vote set: {0}")]
    MalformedVoteSet(&'static str),
    #[error("vote extension signature check failed")]
    BadSignature,
    #[error("votes do not name the proposer as determined leader")]
    WrongClaimant,
    #[error("certificate target does not match the proposal view")]
    WrongTarget,
    #[error("recomputed selection disagrees with the certificate")]
    SelectionMismatch,
}

/// Election fields a replica attaches to its votes for view `view`.
///
/// `determined_leader` names the sender's determined leader for `view + 1`
/// (the view the resulting certificate-bearing proposal opens) and
/// `candidates` is the sender's candidate array for `target_view`. The
/// signature covers all preceding fields, so extensions stand on their own
/// inside a certificate regardless of which message carried them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteExtension {
    pub view: View,
    pub determined_leader: ReplicaId,
    pub target_view: View,
    pub candidates: Vec<ReplicaId>,
    pub voter: ReplicaId,
    pub signature: Signature,
}

impl VoteExtension {
    pub fn new_signed(
        view: View,
        determined_leader: ReplicaId,
        target_view: View,
        candidates: Vec<ReplicaId>,
        voter: ReplicaId,
        auth: &dyn Authenticator,
    ) -> Self {
        let mut ext = VoteExtension {
            view,
            determined_leader,
            target_view,
            candidates,
            voter,
            signature: Signature(0),
        };
        ext.signature = auth.sign(voter, &ext.signing_bytes());
        ext
    }

    /// Canonical byte layout signed by the voter: tag `0x01`, then
    /// little-endian `view: u64`, `determined_leader: u32`,
    /// `target_view: u64`, candidate count `u32` followed by each candidate
    /// as `u32`, and `voter: u32`.
    pub fn signing_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(29 + 4 * self.candidates.len());
        out.push(0x01);
        out.extend_from_slice(&self.view.to_le_bytes());
        out.extend_from_slice(&self.determined_leader.to_le_bytes());
        out.extend_from_slice(&self.target_view.to_le_bytes());
        out.extend_from_slice(&(self.candidates.len() as u32).to_le_bytes());
        for c in &self.candidates {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out.extend_from_slice(&self.voter.to_le_bytes());
        out
    }

    pub fn verify_signature(&self, auth: &dyn Authenticator) -> bool {
        auth.verify(self.voter, &self.signing_bytes(), &self.signature)
    }
}

/// Election result for `target_view` plus the `2f+1` signed vote extensions
/// proving it. The same vote set simultaneously proves the packager's claim
/// to lead the view after the votes' view, since every extension names it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeaderCertificate {
    pub target_view: View,
    /// `None` when no candidate reached `f+1` mentions, in which case the
    /// target view falls back to its initial leader.
    pub elected: Option<ReplicaId>,
    pub votes: Vec<VoteExtension>,
}

impl LeaderCertificate {
    /// Votes' common view (the view they were cast in).
    pub fn vote_view(&self) -> Option<View> {
        self.votes.first().map(|v| v.view)
    }

    /// The leadership claimant every extension names.
    pub fn claimant(&self) -> Option<ReplicaId> {
        self.votes.first().map(|v| v.determined_leader)
    }
}

/// Structural validity shared by packaging and verification: cardinality,
/// distinct voters, consistent (view, target, determined leader), and
/// well-formed candidate arrays.
fn check_vote_set(
    votes: &[VoteExtension],
    v_target: View,
    params: &Params,
) -> Result<(), CertificateError> {
    use CertificateError::MalformedVoteSet as Malformed;
    if votes.len() != params.quorum() as usize {
        return Err(Malformed("wrong cardinality"));
    }
    let first = &votes[0];
    let mut voters = Vec::with_capacity(votes.len());
    for v in votes {
        if v.voter >= params.n() {
            return Err(Malformed("unknown voter"));
        }
        if voters.contains(&v.voter) {
            return Err(Malformed("duplicate voter"));
        }
        voters.push(v.voter);
        if v.view != first.view {
            return Err(Malformed("mixed views"));
        }
        if v.target_view != v_target {
            return Err(Malformed("mixed or wrong target views"));
        }
        if v.determined_leader != first.determined_leader {
            return Err(Malformed("mixed determined leaders"));
        }
        if v.determined_leader >= params.n() {
            return Err(Malformed("determined leader out of range"));
        }
        if v.candidates.is_empty() || v.candidates.len() > params.n() as usize {
            return Err(Malformed("bad candidate array length"));
        }
        let mut seen = vec![false; params.n() as usize];
        for &c in &v.candidates {
            if c >= params.n() {
                return Err(Malformed("candidate out of range"));
            }
            if seen[c as usize] {
                return Err(Malformed("duplicate candidate"));
            }
            seen[c as usize] = true;
        }
    }
    Ok(())
}

fn check_signatures(
    votes: &[VoteExtension],
    auth: &dyn Authenticator,
) -> Result<(), CertificateError> {
    for v in votes {
        if !v.verify_signature(auth) {
            return Err(CertificateError::BadSignature);
        }
    }
    Ok(())
}

/// Deterministic winner selection: candidates mentioned by at least `f+1`
/// votes qualify, and among those the one whose next turn in the initial
/// rotation (first view `>= v_target` with that initial leader) comes
/// soonest wins. Distinct candidates have distinct next turns, so there are
/// no ties. `None` when nobody qualifies.
fn select_winner(votes: &[VoteExtension], v_target: View, params: &Params) -> Option<ReplicaId> {
    let mut count = vec![0u32; params.n() as usize];
    for v in votes {
        for &c in &v.candidates {
            count[c as usize] += 1;
        }
    }
    let threshold = params.f() + 1;
    (0..u64::from(params.n()))
        .map(|i| initial_leader(v_target + i, params.n()))
        .find(|&c| count[c as usize] >= threshold)
}

/// Package `2f+1` matching vote extensions into a leader certificate for
/// `v_target`. The caller must not propose with a set this rejects.
pub fn package_certificate(
    votes: Vec<VoteExtension>,
    v_target: View,
    params: &Params,
    auth: &dyn Authenticator,
) -> Result<LeaderCertificate, CertificateError> {
    check_vote_set(&votes, v_target, params)?;
    check_signatures(&votes, auth)
        .map_err(|_| CertificateError::MalformedVoteSet("bad signature"))?;
    let elected = select_winner(&votes, v_target, params);
    let mut votes = votes;
    votes.sort_by_key(|v| v.voter);
    Ok(LeaderCertificate {
        target_view: v_target,
        elected,
        votes,
    })
}

/// Verify a certificate embedded in a proposal for `proposal_view` by
/// `proposer`: the vote set must be valid and correctly signed, every vote
/// must name the proposer as its determined leader, the votes must come from
/// the view directly before the proposal and target that view's election
/// target, and rerunning the selection must reproduce the recorded outcome.
pub fn verify_certificate(
    cert: &LeaderCertificate,
    proposer: ReplicaId,
    proposal_view: View,
    params: &Params,
    auth: &dyn Authenticator,
) -> Result<(), CertificateError> {
    check_vote_set(&cert.votes, cert.target_view, params)?;
    check_signatures(&cert.votes, auth)?;
    if cert.votes.iter().any(|v| v.determined_leader != proposer) {
        return Err(CertificateError::WrongClaimant);
    }
    let vote_view = cert.votes[0].view;
    if vote_view + 1 != proposal_view
        || cert.target_view != target_view_raw(vote_view, params.n(), params.window_core())
    {
        return Err(CertificateError::WrongTarget);
    }
    if select_winner(&cert.votes, cert.target_view, params) != cert.elected {
        return Err(CertificateError::SelectionMismatch);
    }
    Ok(())
}
