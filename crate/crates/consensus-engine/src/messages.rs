use swle_core::auth::{fnv1a64, Authenticator, Signature};
use swle_core::{LeaderCertificate, Params, ReplicaId, View, VoteExtension};

use crate::wire::{self, Writer};

/// Digest of a proposal payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Digest(pub u64);

/// Consensus phase of a vote or quorum certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    Prepare,
    Precommit,
    Commit,
}

impl Phase {
    pub fn as_u8(self) -> u8 {
        match self {
            Phase::Prepare => 0,
            Phase::Precommit => 1,
            Phase::Commit => 2,
        }
    }
}

/// A batch of opaque client operations. The simulator only tracks counts and
/// sizes; `injected_at_us` stamps when the operations entered the system and
/// feeds the latency metric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    pub proposer: ReplicaId,
    pub seq: u64,
    pub op_count: u32,
    pub op_bytes: u32,
    pub injected_at_us: u64,
}

impl Batch {
    pub fn digest(&self) -> Digest {
        let mut w = Writer::tagged(wire::TAG_BATCH);
        w.u32(self.proposer)
            .u64(self.seq)
            .u32(self.op_count)
            .u32(self.op_bytes)
            .u64(self.injected_at_us);
        Digest(fnv1a64(&w.finish()))
    }
}

/// `2f+1` distinct signed votes for one phase of one proposal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuorumCertificate {
    pub view: View,
    pub phase: Phase,
    pub digest: Digest,
    pub signers: Vec<(ReplicaId, Signature)>,
}

impl QuorumCertificate {
    /// Check cardinality, signer distinctness and every vote signature.
    pub fn verify(&self, params: &Params, auth: &dyn Authenticator) -> bool {
        if self.signers.len() != params.quorum() as usize {
            return false;
        }
        let mut seen = vec![false; params.n() as usize];
        for (voter, sig) in &self.signers {
            if *voter >= params.n() || seen[*voter as usize] {
                return false;
            }
            seen[*voter as usize] = true;
            let bytes = vote_signing_bytes(self.view, self.phase, self.digest, *voter);
            if !auth.verify(*voter, &bytes, sig) {
                return false;
            }
        }
        true
    }

    /// Bytes other messages embed when they reference this certificate.
    fn encode_into(&self, w: &mut Writer) {
        w.u8(wire::TAG_QC)
            .u64(self.view)
            .u8(self.phase.as_u8())
            .u64(self.digest.0)
            .u32(self.signers.len() as u32);
        for (voter, sig) in &self.signers {
            w.u32(*voter).u64(sig.0);
        }
    }
}

/// The view's leader proposal. `justify` carries the proposer's highest known
/// prepare-phase certificate; `leader_cert` is mandatory from view 2 onward
/// under the sliding-window mechanism and absent under round-robin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proposal {
    pub view: View,
    pub batch: Batch,
    pub justify: Option<QuorumCertificate>,
    pub leader_cert: Option<LeaderCertificate>,
    pub proposer: ReplicaId,
    pub signature: Signature,
}

impl Proposal {
    pub fn digest(&self) -> Digest {
        self.batch.digest()
    }

    pub fn signing_bytes(&self) -> Vec<u8> {
        let mut w = Writer::tagged(wire::TAG_PROPOSAL);
        w.u64(self.view).u32(self.proposer).u64(self.digest().0);
        w.opt(self.justify.as_ref(), |w, qc| qc.encode_into(w));
        w.opt(self.leader_cert.as_ref(), |w, cert| {
            w.u64(cert.target_view);
            w.opt(cert.elected.as_ref(), |w, e| {
                w.u32(*e);
            });
            w.u32(cert.votes.len() as u32);
            for v in &cert.votes {
                w.u32(v.voter).u64(v.signature.0);
            }
        });
        w.finish()
    }

    pub fn sign(&mut self, auth: &dyn Authenticator) {
        self.signature = auth.sign(self.proposer, &self.signing_bytes());
    }

    pub fn verify_signature(&self, auth: &dyn Authenticator) -> bool {
        auth.verify(self.proposer, &self.signing_bytes(), &self.signature)
    }
}

fn vote_signing_bytes(view: View, phase: Phase, digest: Digest, voter: ReplicaId) -> Vec<u8> {
    let mut w = Writer::tagged(wire::TAG_VOTE);
    w.u64(view).u8(phase.as_u8()).u64(digest.0).u32(voter);
    w.finish()
}

/// A phase vote for a proposal. The election extension rides only on commit
/// votes (and view-change messages); it is signed separately so certificates
/// can carry it standalone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vote {
    pub view: View,
    pub phase: Phase,
    pub digest: Digest,
    pub voter: ReplicaId,
    pub extension: Option<VoteExtension>,
    pub signature: Signature,
}

impl Vote {
    pub fn new_signed(
        view: View,
        phase: Phase,
        digest: Digest,
        voter: ReplicaId,
        extension: Option<VoteExtension>,
        auth: &dyn Authenticator,
    ) -> Self {
        let signature = auth.sign(voter, &vote_signing_bytes(view, phase, digest, voter));
        Vote {
            view,
            phase,
            digest,
            voter,
            extension,
            signature,
        }
    }

    pub fn verify_signature(&self, auth: &dyn Authenticator) -> bool {
        auth.verify(
            self.voter,
            &vote_signing_bytes(self.view, self.phase, self.digest, self.voter),
            &self.signature,
        )
    }
}

/// Leader announcement that a phase reached quorum; instructs replicas to
/// vote in the next phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseAdvance {
    pub qc: QuorumCertificate,
}

/// Leader announcement of a commit-phase quorum. Carries the proposal so
/// replicas that missed it can still finalize and apply its election result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecideMsg {
    pub proposal: Proposal,
    pub qc: QuorumCertificate,
}

/// Broadcast when a view times out; asks everyone to move to `from_view + 1`
/// and hands the new leader a prepare certificate plus an election extension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewChangeMsg {
    pub from_view: View,
    pub high_prepare: Option<QuorumCertificate>,
    pub extension: Option<VoteExtension>,
    pub voter: ReplicaId,
    pub signature: Signature,
}

impl ViewChangeMsg {
    pub fn signing_bytes(&self) -> Vec<u8> {
        let mut w = Writer::tagged(wire::TAG_VIEW_CHANGE);
        w.u64(self.from_view).u32(self.voter);
        w.opt(self.high_prepare.as_ref(), |w, qc| qc.encode_into(w));
        w.opt(self.extension.as_ref(), |w, ext| {
            w.u64(ext.signature.0);
        });
        w.finish()
    }

    pub fn sign(&mut self, auth: &dyn Authenticator) {
        self.signature = auth.sign(self.voter, &self.signing_bytes());
    }

    pub fn verify_signature(&self, auth: &dyn Authenticator) -> bool {
        auth.verify(self.voter, &self.signing_bytes(), &self.signature)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Proposal(Proposal),
    Vote(Vote),
    PhaseAdvance(PhaseAdvance),
    Decide(DecideMsg),
    ViewChange(ViewChangeMsg),
}

impl Message {
    /// View the message belongs to, used for buffering ahead-of-view traffic.
    pub fn view(&self) -> View {
        match self {
            Message::Proposal(p) => p.view,
            Message::Vote(v) => v.view,
            Message::PhaseAdvance(m) => m.qc.view,
            Message::Decide(d) => d.proposal.view,
            Message::ViewChange(vc) => vc.from_view,
        }
    }
}
