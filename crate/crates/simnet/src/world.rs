use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use consensus_engine::{
    Action, ElectionProvider, EngineConfig, Message, Observation, Recipient, ReplicaEngine,
    RoundRobinElector, SwleElector,
};
use metrics::{resolve_leader, Summary, ViewRecord};
use swle_core::{Params, ReplicaId, View};

use crate::config::{ByzantineStrategy, FaultSpec, Mechanism, Scenario};
use crate::event::{EventKind, Injection, SimEvent};
use crate::network::NetworkModel;
use crate::report::{SimError, SimulationReport, Violation, ViolationKind};
use crate::rng::SimRng;

/// Message handling cost charged before a correct replica's outbound
/// traffic leaves it. Reputation-building adversaries respond instantly.
const PROC_BASE_US: u64 = 150;
const PROC_JITTER_US: u64 = 50;

const TRACE_CAPACITY: usize = 200;

/// Run one scenario under `seed` (overriding the seed in the config).
pub fn run(scenario: &Scenario, seed: u64) -> Result<SimulationReport, SimError> {
    run_with_injections(scenario, seed, Vec::new())
}

/// [`run`], plus externally scheduled checker injections for negative
/// tests (forged records that bypass engines and authenticator).
pub fn run_with_injections(
    scenario: &Scenario,
    seed: u64,
    injections: Vec<(u64, Injection)>,
) -> Result<SimulationReport, SimError> {
    scenario.validate()?;
    let mut world = World::new(scenario, seed)?;
    for (time_us, injection) in injections {
        world.schedule(time_us, EventKind::Inject(injection));
    }
    world.start();
    world.run_loop()?;
    Ok(world.into_report())
}

#[derive(Default)]
struct ViewAgg {
    entries: BTreeMap<ReplicaId, u64>,
    determined: BTreeMap<ReplicaId, ReplicaId>,
    elected_missing: bool,
    finalized_at: BTreeMap<ReplicaId, u64>,
    payload: Option<(u32, u64)>,
    completed: BTreeSet<ReplicaId>,
}

struct TraceEntry {
    time_us: u64,
    what: &'static str,
    replica: u64,
    view: u64,
}

struct World<'a> {
    scenario: &'a Scenario,
    params: Params,
    seed: u64,
    engines: Vec<ReplicaEngine>,
    faults: Vec<FaultSpec>,
    faulty: BTreeSet<ReplicaId>,
    dead: Vec<bool>,
    correct: Vec<ReplicaId>,
    net: NetworkModel,
    rng: SimRng,
    queue: BinaryHeap<Reverse<SimEvent>>,
    seq: u64,
    clock: u64,
    aggs: BTreeMap<View, ViewAgg>,
    records: Vec<ViewRecord>,
    finalized_digest: BTreeMap<View, u64>,
    claimant: BTreeMap<View, ReplicaId>,
    promoters: BTreeMap<View, Vec<ReplicaId>>,
    trace: VecDeque<TraceEntry>,
    violation: Option<Violation>,
}

impl<'a> World<'a> {
    fn new(scenario: &'a Scenario, seed: u64) -> Result<Self, SimError> {
        let params = scenario.params()?;
        let net = NetworkModel::from_scenario(scenario)?;
        let engine_config = EngineConfig {
            timeout_us: scenario.timeout_us(),
            batch_size: scenario.batch_size,
            payload_bytes: scenario.payload_bytes,
        };
        let mut engines = Vec::with_capacity(scenario.n as usize);
        let mut faults = Vec::with_capacity(scenario.n as usize);
        let mut correct = Vec::new();
        for id in 0..scenario.n {
            let elector: Box<dyn ElectionProvider> = match scenario.mechanism {
                Mechanism::Swle => Box::new(SwleElector::new(id, params.clone())),
                Mechanism::Roundrobin => Box::new(RoundRobinElector::new(params.clone())),
            };
            engines.push(ReplicaEngine::new(
                id,
                params.clone(),
                engine_config.clone(),
                elector,
            ));
            let fault = scenario.fault_of(id);
            if !fault.is_faulty() {
                correct.push(id);
            }
            faults.push(fault);
        }
        Ok(World {
            faulty: scenario.faulty_set(),
            scenario,
            params,
            seed,
            engines,
            faults,
            dead: vec![false; scenario.n as usize],
            correct,
            net,
            rng: SimRng::new(seed),
            queue: BinaryHeap::new(),
            seq: 0,
            clock: 0,
            aggs: BTreeMap::new(),
            records: Vec::with_capacity(scenario.views as usize),
            finalized_digest: BTreeMap::new(),
            claimant: BTreeMap::new(),
            promoters: BTreeMap::new(),
            trace: VecDeque::with_capacity(TRACE_CAPACITY),
            violation: None,
        })
    }

    fn schedule(&mut self, time_us: u64, kind: EventKind) {
        let seq = self.seq;
        self.seq += 1;
        self.queue.push(Reverse(SimEvent { time_us, seq, kind }));
    }

    fn start(&mut self) {
        for id in 0..self.engines.len() as ReplicaId {
            match self.faults[id as usize] {
                FaultSpec::Byzantine {
                    strategy: ByzantineStrategy::Mute,
                    ..
                } => {
                    self.dead[id as usize] = true;
                }
                FaultSpec::Crash { from_view, .. } if from_view <= 1 => {
                    self.dead[id as usize] = true;
                }
                _ => {
                    let actions = self.engines[id as usize].start(0);
                    self.absorb(id, 0, actions);
                }
            }
        }
    }

    fn run_loop(&mut self) -> Result<(), SimError> {
        let budget: u64 = (self.scenario.views + 100)
            .saturating_mul(u64::from(self.scenario.n))
            .saturating_mul(2_000);
        let mut processed = 0u64;
        while let Some(Reverse(event)) = self.queue.pop() {
            if self.violation.is_some() || self.records.len() as u64 >= self.scenario.views {
                break;
            }
            processed += 1;
            if processed > budget {
                return Err(SimError::Stalled(format!(
                    "event budget of {budget} exhausted at simulated time {} us",
                    self.clock
                )));
            }
            debug_assert!(event.time_us >= self.clock, "time went backwards");
            self.clock = event.time_us;
            match event.kind {
                EventKind::Deliver { to, msg } => {
                    if self.dead[to as usize] {
                        continue;
                    }
                    self.push_trace("deliver", u64::from(to), msg.view());
                    let actions = self.engines[to as usize].on_message(msg, self.clock);
                    self.absorb(to, self.clock, actions);
                }
                EventKind::TimerFire { replica, view } => {
                    if self.dead[replica as usize] {
                        continue;
                    }
                    self.push_trace("timer", u64::from(replica), view);
                    let actions = self.engines[replica as usize].on_timer(view, self.clock);
                    self.absorb(replica, self.clock, actions);
                }
                EventKind::Inject(injection) => {
                    self.push_trace("inject", 0, 0);
                    self.apply_injection(injection);
                }
            }
        }
        if let Some(violation) = self.violation.take() {
            return Err(SimError::Violation {
                violation,
                trace: self.format_trace(),
            });
        }
        if (self.records.len() as u64) < self.scenario.views {
            return Err(SimError::Stalled(format!(
                "event queue drained with only {} of {} views recorded",
                self.records.len(),
                self.scenario.views
            )));
        }
        Ok(())
    }

    fn into_report(mut self) -> SimulationReport {
        self.records.sort_by_key(|r| r.view);
        let v_c = match self.scenario.mechanism {
            Mechanism::Roundrobin => None,
            Mechanism::Swle => {
                let gst_view = self
                    .records
                    .iter()
                    .find(|r| r.entry_us >= self.scenario.gst_us())
                    .map(|r| r.view);
                gst_view.map(|g| {
                    let last_missing = self
                        .records
                        .iter()
                        .filter(|r| r.entry_elected_missing)
                        .map(|r| r.view)
                        .max()
                        .unwrap_or(0);
                    g.max(last_missing)
                })
            }
        };
        let summary = Summary::build(
            self.scenario.mechanism.as_str(),
            &self.params,
            self.seed,
            &self.records,
            &self.faulty,
            self.clock,
            v_c,
            0,
        );
        SimulationReport {
            mechanism: self.scenario.mechanism,
            seed: self.seed,
            records: self.records,
            summary,
            sim_end_us: self.clock,
            v_c,
            promoters: self.promoters,
        }
    }

    fn push_trace(&mut self, what: &'static str, replica: u64, view: u64) {
        if self.trace.len() == TRACE_CAPACITY {
            self.trace.pop_front();
        }
        self.trace.push_back(TraceEntry {
            time_us: self.clock,
            what,
            replica,
            view,
        });
    }

    fn format_trace(&self) -> Vec<String> {
        self.trace
            .iter()
            .map(|t| format!("t={}us {} replica={} view={}", t.time_us, t.what, t.replica, t.view))
            .collect()
    }

    fn absorb(&mut self, from: ReplicaId, now: u64, actions: Vec<Action>) {
        for action in actions {
            match action {
                Action::Send(out) => {
                    if !self.emission_allowed(from, &out.msg) {
                        continue;
                    }
                    let t_send = now + self.proc_delay(from);
                    match out.to {
                        Recipient::All => {
                            for to in 0..self.engines.len() as ReplicaId {
                                if to != from {
                                    self.schedule_delivery(from, to, t_send, out.msg.clone());
                                }
                            }
                        }
                        Recipient::One(to) => self.schedule_delivery(from, to, t_send, out.msg),
                    }
                }
                Action::Timer { view, delay_us } => {
                    if let FaultSpec::Crash { from_view, .. } = self.faults[from as usize] {
                        if view >= from_view {
                            continue;
                        }
                    }
                    self.schedule(
                        now + delay_us,
                        EventKind::TimerFire {
                            replica: from,
                            view,
                        },
                    );
                }
                Action::Observe(obs) => {
                    if !self.faults[from as usize].is_faulty() {
                        self.note_observation(from, now, obs);
                    }
                }
            }
        }
        if let FaultSpec::Crash { from_view, .. } = self.faults[from as usize] {
            if self.engines[from as usize].current_view() >= from_view {
                self.dead[from as usize] = true;
            }
        }
    }

    fn emission_allowed(&self, from: ReplicaId, msg: &Message) -> bool {
        match self.faults[from as usize] {
            FaultSpec::Correct { .. } => true,
            FaultSpec::Crash { from_view, .. } => msg.view() < from_view,
            FaultSpec::Byzantine { strategy, .. } => match strategy {
                ByzantineStrategy::Mute => false,
                ByzantineStrategy::SilentLeader | ByzantineStrategy::ReputationBuilder => {
                    !matches!(msg, Message::Proposal(_))
                }
            },
        }
    }

    fn proc_delay(&mut self, from: ReplicaId) -> u64 {
        match self.faults[from as usize] {
            FaultSpec::Byzantine {
                strategy: ByzantineStrategy::ReputationBuilder,
                ..
            } => 0,
            _ => PROC_BASE_US + self.rng.range(0, PROC_JITTER_US + 1),
        }
    }

    fn schedule_delivery(&mut self, from: ReplicaId, to: ReplicaId, t_send: u64, msg: Message) {
        if self.dead[to as usize] {
            return;
        }
        let delay = self.net.delay(from, to, t_send, &mut self.rng);
        if t_send >= self.net.gst_us() {
            let both_correct = !self.faults[from as usize].is_faulty()
                && !self.faults[to as usize].is_faulty();
            debug_assert!(
                !both_correct || delay <= self.net.delta_us(),
                "post-GST delivery bound breached"
            );
        }
        self.schedule(t_send + delay, EventKind::Deliver { to, msg });
    }

    fn apply_injection(&mut self, injection: Injection) {
        match injection {
            Injection::ConflictingFinalization { view, digest, .. } => {
                self.check_finalization(view, digest);
            }
            Injection::ConflictingClaim { view, claimant } => {
                self.check_claim(view, claimant);
            }
        }
    }

    fn check_finalization(&mut self, view: View, digest: u64) {
        match self.finalized_digest.get(&view) {
            Some(&existing) if existing != digest => {
                self.violation.get_or_insert(Violation {
                    kind: ViolationKind::ConflictingFinalization,
                    view,
                    detail: format!("payload {existing:#x} vs {digest:#x}"),
                });
            }
            Some(_) => {}
            None => {
                self.finalized_digest.insert(view, digest);
            }
        }
    }

    fn check_claim(&mut self, view: View, claimant: ReplicaId) {
        match self.claimant.get(&view) {
            Some(&existing) if existing != claimant => {
                self.violation.get_or_insert(Violation {
                    kind: ViolationKind::ConflictingClaim,
                    view,
                    detail: format!("leadership manifested by {existing} and {claimant}"),
                });
            }
            Some(_) => {}
            None => {
                self.claimant.insert(view, claimant);
            }
        }
    }

    fn note_observation(&mut self, replica: ReplicaId, now: u64, obs: Observation) {
        match obs {
            Observation::EnteredView {
                view,
                determined,
                elected_settled,
            } => {
                let agg = self.aggs.entry(view).or_default();
                agg.entries.insert(replica, now);
                agg.determined.insert(replica, determined);
                if elected_settled == Some(false) {
                    agg.elected_missing = true;
                }
            }
            Observation::DeterminationSwitched { view, claimant } => {
                self.aggs
                    .entry(view)
                    .or_default()
                    .determined
                    .insert(replica, claimant);
            }
            Observation::AcceptedProposal { view, proposer } => {
                self.check_claim(view, proposer);
            }
            Observation::Finalized {
                view,
                leader,
                digest,
                op_count,
                injected_at_us,
            } => {
                self.check_finalization(view, digest.0);
                self.check_claim(view, leader);
                let agg = self.aggs.entry(view).or_default();
                agg.finalized_at.insert(replica, now);
                agg.payload.get_or_insert((op_count, injected_at_us));
                self.complete(view, replica);
            }
            Observation::TimedOut { view, .. } => {
                self.complete(view, replica);
            }
            Observation::PromotersRewarded { view, promoters } => {
                self.promoters.entry(view).or_insert(promoters);
            }
        }
    }

    fn complete(&mut self, view: View, replica: ReplicaId) {
        let agg = self.aggs.entry(view).or_default();
        agg.completed.insert(replica);
        if agg.completed.len() == self.correct.len() {
            self.flush(view);
        }
    }

    fn flush(&mut self, view: View) {
        let agg = self.aggs.remove(&view).expect("aggregation exists");
        if view > self.scenario.views {
            return;
        }
        let determined: Vec<ReplicaId> = self
            .correct
            .iter()
            .map(|r| *agg.determined.get(r).expect("every correct replica entered"))
            .collect();
        let (leader, unified) = resolve_leader(&determined);
        let finalized = !agg.finalized_at.is_empty();
        let mut decide_us = None;
        if agg.finalized_at.len() >= self.params.quorum() as usize {
            let mut times: Vec<u64> = agg.finalized_at.values().copied().collect();
            times.sort_unstable();
            decide_us = Some(times[self.params.quorum() as usize - 1]);
        }
        let entry_us = agg.entries.values().copied().min().unwrap_or(0);
        let (ops, injected) = agg.payload.unzip();
        self.records.push(ViewRecord {
            view,
            determined,
            leader,
            unified,
            leader_correct: !self.faulty.contains(&leader),
            finalized,
            timed_out: !finalized,
            entry_us,
            decide_us,
            ops: ops.unwrap_or(0),
            injected_at_us: injected,
            entry_elected_missing: agg.elected_missing,
        });
        for &r in &self.correct {
            if !self.engines[r as usize].window_prefix_ok() {
                self.violation.get_or_insert(Violation {
                    kind: ViolationKind::WindowPrefixBroken,
                    view,
                    detail: format!("replica {r} window lost its elected prefix"),
                });
            }
        }
    }
}
