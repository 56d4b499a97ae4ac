use std::collections::{BTreeMap, BTreeSet, VecDeque};

use swle_core::auth::Signature;
use swle_core::{target_view, Params, ReplicaId, SimAuthenticator, View, VoteExtension};

use crate::elector::{ElectionProvider, ProposeContext};
use crate::messages::{
    Batch, DecideMsg, Digest, Message, Phase, PhaseAdvance, Proposal, QuorumCertificate, Vote,
    ViewChangeMsg,
};

/// Per-replica engine knobs.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub timeout_us: u64,
    pub batch_size: u32,
    pub payload_bytes: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recipient {
    All,
    One(ReplicaId),
}

#[derive(Debug, Clone)]
pub struct Outbound {
    pub to: Recipient,
    pub msg: Message,
}

/// Facts the engine reports to whoever is driving it; the simulation harness
/// turns these into per-view records and invariant checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Observation {
    EnteredView {
        view: View,
        determined: ReplicaId,
        /// Whether the elected slot was settled at entry; `None` under
        /// mechanisms without election state.
        elected_settled: Option<bool>,
    },
    /// A verified leadership claim replaced the entry-time determination.
    DeterminationSwitched { view: View, claimant: ReplicaId },
    /// A proposal passed full validation (for views >= 2 this implies a
    /// verified leadership certificate naming the proposer).
    AcceptedProposal { view: View, proposer: ReplicaId },
    Finalized {
        view: View,
        leader: ReplicaId,
        digest: Digest,
        op_count: u32,
        injected_at_us: u64,
    },
    TimedOut { view: View, determined: ReplicaId },
    /// Emitted by a view's leader on success: the senders of the first
    /// `2f+1` prepare votes, in arrival order.
    PromotersRewarded { view: View, promoters: Vec<ReplicaId> },
}

#[derive(Debug, Clone)]
pub enum Action {
    Send(Outbound),
    /// Ask the driver to fire `on_timer(view)` after `delay_us`.
    Timer { view: View, delay_us: u64 },
    Observe(Observation),
}

#[derive(Default)]
struct ExtPool {
    voters: BTreeSet<ReplicaId>,
    exts: Vec<VoteExtension>, // arrival order
}

impl ExtPool {
    fn insert(&mut self, ext: VoteExtension) -> bool {
        if self.voters.insert(ext.voter) {
            self.exts.push(ext);
            true
        } else {
            false
        }
    }
}

struct VoteSet {
    voters: Vec<ReplicaId>, // arrival order, distinct
    sigs: Vec<(ReplicaId, Signature)>,
    fired: bool,
}

impl VoteSet {
    fn new() -> Self {
        VoteSet {
            voters: Vec::new(),
            sigs: Vec::new(),
            fired: false,
        }
    }
}

struct Round {
    determined: ReplicaId,
    proposal: Option<Proposal>,
    proposed: bool,
    sent: [bool; 3],
    votes: [VoteSet; 3],
    finalized: bool,
}

impl Round {
    fn new(determined: ReplicaId) -> Self {
        Round {
            determined,
            proposal: None,
            proposed: false,
            sent: [false; 3],
            votes: [VoteSet::new(), VoteSet::new(), VoteSet::new()],
            finalized: false,
        }
    }
}

/// One replica's deterministic consensus state machine: a three-phase
/// non-chained round per view (prepare, precommit, commit, then a decide
/// broadcast), driven entirely by `(message, time)` and `(timer, time)`
/// inputs. Leader election is delegated to the [`ElectionProvider`].
pub struct ReplicaEngine {
    id: ReplicaId,
    params: Params,
    config: EngineConfig,
    auth: SimAuthenticator,
    elector: Box<dyn ElectionProvider>,
    view: View,
    prev_decided: bool,
    round: Round,
    locked: Option<QuorumCertificate>,
    high_prepare: Option<QuorumCertificate>,
    commit_exts: BTreeMap<View, ExtPool>,
    vc_exts: BTreeMap<View, ExtPool>,
    vc_voters: BTreeMap<View, BTreeSet<ReplicaId>>,
    pending: BTreeMap<View, Vec<Message>>,
    inbox: VecDeque<Message>,
    actions: Vec<Action>,
    batch_seq: u64,
    started: bool,
}

impl ReplicaEngine {
    pub fn new(
        id: ReplicaId,
        params: Params,
        config: EngineConfig,
        elector: Box<dyn ElectionProvider>,
    ) -> Self {
        ReplicaEngine {
            id,
            params,
            config,
            auth: SimAuthenticator,
            elector,
            view: 0,
            prev_decided: true,
            round: Round::new(0),
            locked: None,
            high_prepare: None,
            commit_exts: BTreeMap::new(),
            vc_exts: BTreeMap::new(),
            vc_voters: BTreeMap::new(),
            pending: BTreeMap::new(),
            inbox: VecDeque::new(),
            actions: Vec::new(),
            batch_seq: 0,
            started: false,
        }
    }

    pub fn id(&self) -> ReplicaId {
        self.id
    }

    pub fn current_view(&self) -> View {
        self.view
    }

    pub fn mechanism(&self) -> &'static str {
        self.elector.mechanism()
    }

    pub fn window_prefix_ok(&self) -> bool {
        self.elector.window_prefix_ok()
    }

    /// Enter view 1. Must be called exactly once before any input.
    pub fn start(&mut self, now_us: u64) -> Vec<Action> {
        assert!(!self.started, "engine already started");
        self.started = true;
        self.enter_view(1, now_us);
        self.run_inbox(now_us);
        std::mem::take(&mut self.actions)
    }

    pub fn on_message(&mut self, msg: Message, now_us: u64) -> Vec<Action> {
        self.inbox.push_back(msg);
        self.run_inbox(now_us);
        std::mem::take(&mut self.actions)
    }

    pub fn on_timer(&mut self, view: View, now_us: u64) -> Vec<Action> {
        self.handle_timeout(view, now_us);
        self.run_inbox(now_us);
        std::mem::take(&mut self.actions)
    }

    fn run_inbox(&mut self, now_us: u64) {
        self.promote_pending();
        while let Some(msg) = self.inbox.pop_front() {
            self.handle(msg, now_us);
            self.promote_pending();
        }
    }

    fn promote_pending(&mut self) {
        if let Some(msgs) = self.pending.remove(&self.view) {
            self.inbox.extend(msgs);
        }
    }

    fn observe(&mut self, obs: Observation) {
        self.actions.push(Action::Observe(obs));
    }

    fn broadcast(&mut self, msg: Message) {
        self.actions.push(Action::Send(Outbound {
            to: Recipient::All,
            msg: msg.clone(),
        }));
        self.inbox.push_back(msg); // local effects of our own broadcast
    }

    fn send_to(&mut self, to: ReplicaId, msg: Message) {
        if to == self.id {
            self.inbox.push_back(msg);
        } else {
            self.actions.push(Action::Send(Outbound {
                to: Recipient::One(to),
                msg,
            }));
        }
    }

    fn handle(&mut self, msg: Message, now_us: u64) {
        // View changes and commit-vote extensions are useful up to one view
        // ahead of the view they were cast in, so they bypass the staleness
        // gate that protects the round state.
        if let Message::ViewChange(vc) = msg {
            self.handle_view_change(vc, now_us);
            return;
        }
        if let Message::Vote(vt) = &msg {
            self.maybe_pool_extension(vt, now_us);
        }
        let v = msg.view();
        if v > self.view {
            self.pending.entry(v).or_default().push(msg);
            return;
        }
        if v < self.view {
            return;
        }
        match msg {
            Message::Proposal(p) => self.handle_proposal(p, now_us),
            Message::Vote(vt) => self.handle_vote(vt),
            Message::PhaseAdvance(m) => self.handle_phase_advance(m, now_us),
            Message::Decide(d) => self.handle_decide(d, now_us),
            Message::ViewChange(_) => unreachable!(),
        }
    }

    fn enter_view(&mut self, view: View, now_us: u64) {
        self.view = view;
        let determined = self.elector.entry_leader(view);
        self.elector.note_view_entered(view, determined);
        let elected_settled = self.elector.elected_slot_settled(view);
        self.round = Round::new(determined);
        self.observe(Observation::EnteredView {
            view,
            determined,
            elected_settled,
        });
        self.actions.push(Action::Timer {
            view,
            delay_us: self.config.timeout_us,
        });
        if determined == self.id {
            self.try_propose(now_us);
        }
    }

    fn complete_view(&mut self, decided: bool, now_us: u64) {
        let v = self.view;
        self.elector.note_view_completed(v);
        self.prev_decided = decided;
        // Material from views below v is no longer usable.
        self.commit_exts = self.commit_exts.split_off(&v);
        self.vc_exts = self.vc_exts.split_off(&v);
        self.vc_voters = self.vc_voters.split_off(&v);
        self.pending = self.pending.split_off(&(v + 1));
        self.enter_view(v + 1, now_us);
    }

    fn try_propose(&mut self, now_us: u64) {
        if self.round.proposed || self.round.finalized || self.round.determined != self.id {
            return;
        }
        let empty_pool = ExtPool::default();
        let prev = self.view.saturating_sub(1);
        let commit_pool = self.commit_exts.get(&prev).unwrap_or(&empty_pool);
        let vc_pool = self.vc_exts.get(&prev).unwrap_or(&empty_pool);
        let vc_voters = self.vc_voters.get(&prev).map_or(0, |s| s.len() as u32);
        let cx = ProposeContext {
            view: self.view,
            prev_decided: self.prev_decided,
            commit_extensions: &commit_pool.exts,
            viewchange_extensions: &vc_pool.exts,
            viewchange_voters: vc_voters,
        };
        let Ok(cert) = self.elector.certificate_to_propose(&cx, &self.auth) else {
            return; // vote set not formed; stay silent and let the view time out
        };
        self.batch_seq += 1;
        let batch = Batch {
            proposer: self.id,
            seq: self.batch_seq,
            op_count: self.config.batch_size,
            op_bytes: self.config.payload_bytes,
            injected_at_us: now_us,
        };
        let mut proposal = Proposal {
            view: self.view,
            batch,
            justify: self.high_prepare.clone(),
            leader_cert: cert,
            proposer: self.id,
            signature: Signature(0),
        };
        proposal.sign(&self.auth);
        self.round.proposed = true;
        self.broadcast(Message::Proposal(proposal));
    }

    fn handle_proposal(&mut self, p: Proposal, _now_us: u64) {
        if self.round.proposal.is_some() || p.proposer >= self.params.n() {
            return;
        }
        if !p.verify_signature(&self.auth) {
            return;
        }
        if let Some(qc) = &p.justify {
            if qc.phase != Phase::Prepare || !qc.verify(&self.params, &self.auth) {
                return;
            }
            let qc = qc.clone();
            self.absorb_prepare_qc(qc);
        }
        // Lock rule: the proposal must re-propose the locked payload or
        // justify with a prepare certificate at least as fresh as the lock.
        if let Some(lock) = &self.locked {
            let justify_view = p.justify.as_ref().map_or(0, |qc| qc.view);
            if justify_view < lock.view && p.digest() != lock.digest {
                return;
            }
        }
        let claim =
            match self
                .elector
                .validate_proposal(p.view, p.proposer, p.leader_cert.as_ref(), &self.auth)
            {
                Ok(claim) => claim,
                Err(_) => return,
            };
        if claim != self.round.determined {
            self.round.determined = claim;
            self.observe(Observation::DeterminationSwitched {
                view: p.view,
                claimant: claim,
            });
        }
        self.observe(Observation::AcceptedProposal {
            view: p.view,
            proposer: p.proposer,
        });
        let digest = p.digest();
        let proposer = p.proposer;
        self.round.proposal = Some(p);
        self.send_phase_vote(Phase::Prepare, digest, proposer);
    }

    fn send_phase_vote(&mut self, phase: Phase, digest: Digest, proposer: ReplicaId) {
        if self.round.sent[phase.as_u8() as usize] {
            return;
        }
        self.round.sent[phase.as_u8() as usize] = true;
        let extension = if phase == Phase::Commit {
            self.elector.vote_extension(self.view, &self.auth)
        } else {
            None
        };
        let vote = Vote::new_signed(self.view, phase, digest, self.id, extension, &self.auth);
        // Commit votes also go to the next view's determined leader, who
        // needs a quorum of their extensions to propose.
        if phase == Phase::Commit {
            if let Some(collector) = self.elector.commit_vote_collector(self.view) {
                if collector != proposer {
                    self.send_to(collector, Message::Vote(vote.clone()));
                }
            }
        }
        self.send_to(proposer, Message::Vote(vote));
    }

    /// Bank commit-vote extensions naming us; they are the raw material for
    /// our own proposal in the vote's view + 1.
    fn maybe_pool_extension(&mut self, vt: &Vote, now_us: u64) {
        let Some(ext) = &vt.extension else { return };
        if vt.phase != Phase::Commit || vt.view + 1 < self.view {
            return;
        }
        if ext.determined_leader != self.id || ext.voter != vt.voter {
            return;
        }
        if !self.extension_valid(ext, vt.view) {
            return;
        }
        if self
            .commit_exts
            .entry(vt.view)
            .or_default()
            .insert(ext.clone())
        {
            self.maybe_retry_propose(now_us);
        }
    }

    fn extension_valid(&self, ext: &VoteExtension, cast_view: View) -> bool {
        let n = self.params.n();
        if ext.view != cast_view || ext.voter >= n || ext.determined_leader >= n {
            return false;
        }
        if ext.candidates.is_empty() || ext.candidates.len() > n as usize {
            return false;
        }
        let mut seen = vec![false; n as usize];
        for &c in &ext.candidates {
            if c >= n || seen[c as usize] {
                return false;
            }
            seen[c as usize] = true;
        }
        ext.target_view == target_view(cast_view, &self.params)
            && ext.verify_signature(&self.auth)
    }

    fn maybe_retry_propose(&mut self, now_us: u64) {
        if self.view >= 2 && !self.round.proposed && self.round.determined == self.id {
            self.try_propose(now_us);
        }
    }

    fn handle_vote(&mut self, vt: Vote) {
        let Some(proposal) = &self.round.proposal else {
            return;
        };
        if proposal.proposer != self.id {
            return; // only the view's leader aggregates
        }
        if vt.digest != proposal.digest() || vt.voter >= self.params.n() {
            return;
        }
        if !vt.verify_signature(&self.auth) {
            return;
        }
        let digest = proposal.digest();
        let idx = vt.phase.as_u8() as usize;
        let set = &mut self.round.votes[idx];
        if set.fired || set.voters.contains(&vt.voter) {
            return;
        }
        set.voters.push(vt.voter);
        set.sigs.push((vt.voter, vt.signature));
        if set.voters.len() < self.params.quorum() as usize {
            return;
        }
        set.fired = true;
        let qc = QuorumCertificate {
            view: self.view,
            phase: vt.phase,
            digest,
            signers: set.sigs.clone(),
        };
        match vt.phase {
            Phase::Prepare => {
                self.absorb_prepare_qc(qc.clone());
                self.broadcast(Message::PhaseAdvance(PhaseAdvance { qc }));
            }
            Phase::Precommit => {
                self.broadcast(Message::PhaseAdvance(PhaseAdvance { qc }));
            }
            Phase::Commit => {
                let quorum = self.params.quorum() as usize;
                let promoters: Vec<ReplicaId> = self.round.votes[Phase::Prepare.as_u8() as usize]
                    .voters
                    .iter()
                    .take(quorum)
                    .copied()
                    .collect();
                self.elector.note_promoters(&promoters);
                self.observe(Observation::PromotersRewarded {
                    view: self.view,
                    promoters,
                });
                let decide = DecideMsg {
                    proposal: self.round.proposal.clone().expect("proposal present"),
                    qc,
                };
                self.broadcast(Message::Decide(decide));
            }
        }
    }

    fn handle_phase_advance(&mut self, m: PhaseAdvance, _now_us: u64) {
        let Some(proposal) = &self.round.proposal else {
            return; // never validated the proposal, cannot vote on it
        };
        let digest = proposal.digest();
        let proposer = proposal.proposer;
        if m.qc.digest != digest || !m.qc.verify(&self.params, &self.auth) {
            return;
        }
        match m.qc.phase {
            Phase::Prepare => {
                self.absorb_prepare_qc(m.qc);
                self.send_phase_vote(Phase::Precommit, digest, proposer);
            }
            Phase::Precommit => {
                let fresher = self.locked.as_ref().is_none_or(|l| m.qc.view > l.view);
                if fresher {
                    self.locked = Some(m.qc);
                }
                self.send_phase_vote(Phase::Commit, digest, proposer);
            }
            Phase::Commit => {} // finalization travels in Decide
        }
    }

    fn handle_decide(&mut self, d: DecideMsg, now_us: u64) {
        if self.round.finalized {
            return;
        }
        if d.qc.phase != Phase::Commit
            || d.qc.view != self.view
            || d.qc.digest != d.proposal.digest()
            || !d.qc.verify(&self.params, &self.auth)
            || !d.proposal.verify_signature(&self.auth)
        {
            return;
        }
        // If we never accepted the proposal ourselves (it may still be in
        // flight), validate it now so the election result it carries lands
        // in our window; the commit quorum already vouches for legitimacy.
        let seen = self.round.proposal.as_ref().map(|p| p.digest()) == Some(d.qc.digest);
        if !seen {
            if let Ok(claim) = self.elector.validate_proposal(
                self.view,
                d.proposal.proposer,
                d.proposal.leader_cert.as_ref(),
                &self.auth,
            ) {
                if claim != self.round.determined {
                    self.round.determined = claim;
                    self.observe(Observation::DeterminationSwitched {
                        view: self.view,
                        claimant: claim,
                    });
                }
            }
        }
        self.round.finalized = true;
        self.elector
            .note_finalized(self.view, d.proposal.proposer, d.proposal.leader_cert.as_ref());
        self.observe(Observation::Finalized {
            view: self.view,
            leader: d.proposal.proposer,
            digest: d.proposal.digest(),
            op_count: d.proposal.batch.op_count,
            injected_at_us: d.proposal.batch.injected_at_us,
        });
        self.complete_view(true, now_us);
    }

    fn handle_view_change(&mut self, vc: ViewChangeMsg, now_us: u64) {
        if vc.voter >= self.params.n() || vc.from_view + 1 < self.view {
            return;
        }
        if !vc.verify_signature(&self.auth) {
            return;
        }
        if let Some(qc) = &vc.high_prepare {
            if qc.phase != Phase::Prepare || !qc.verify(&self.params, &self.auth) {
                return;
            }
            let qc = qc.clone();
            self.absorb_prepare_qc(qc);
        }
        self.vc_voters
            .entry(vc.from_view)
            .or_default()
            .insert(vc.voter);
        if let Some(ext) = &vc.extension {
            if ext.determined_leader == self.id
                && ext.voter == vc.voter
                && self.extension_valid(ext, vc.from_view)
            {
                self.vc_exts
                    .entry(vc.from_view)
                    .or_default()
                    .insert(ext.clone());
            }
        }
        self.maybe_retry_propose(now_us);
    }

    fn handle_timeout(&mut self, view: View, now_us: u64) {
        if view != self.view || self.round.finalized || !self.started {
            return;
        }
        let determined = self.round.determined;
        self.elector.note_timeout(view, determined);
        self.observe(Observation::TimedOut { view, determined });
        // Extension built after the timeout charge, so its candidate array
        // already reflects the failed leadership.
        let extension = self.elector.vote_extension(view, &self.auth);
        let mut vc = ViewChangeMsg {
            from_view: view,
            high_prepare: self.high_prepare.clone(),
            extension,
            voter: self.id,
            signature: Signature(0),
        };
        vc.sign(&self.auth);
        self.broadcast(Message::ViewChange(vc));
        self.complete_view(false, now_us);
    }

    fn absorb_prepare_qc(&mut self, qc: QuorumCertificate) {
        if self.high_prepare.as_ref().is_none_or(|h| qc.view > h.view) {
            self.high_prepare = Some(qc);
        }
    }
}
