//! Acceptance suite: one test per release criterion, each printing its own
//! pass/fail line through the harness. The simulation-backed criteria share
//! one batch of runs (five scenario presets, twenty seeds each for the
//! sliding-window mechanism, plus round-robin baselines).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use consensus_engine::{ElectionProvider, SwleElector};
use simnet::{run_batch, Job, Mechanism, Scenario, SimulationReport};
use swle_core::{
    package_certificate, target_view_raw, verify_certificate, Params, ReplicaId,
    ReputationMatrix, ScoreEvent, SimAuthenticator, View, VoteExtension,
};

const SCENARIOS: [&str; 5] = ["case1", "case2", "case3", "fault_free", "adversarial_pre_gst"];
const SWLE_SEEDS: u64 = 20;
const RR_SEEDS: u64 = 5;

fn preset(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../presets")
        .join(format!("{name}.json"));
    Scenario::from_path(&path).unwrap_or_else(|e| panic!("loading preset {name}: {e}"))
}

struct Batches {
    swle: BTreeMap<&'static str, Vec<SimulationReport>>,
    rr: BTreeMap<&'static str, Vec<SimulationReport>>,
    elapsed: Duration,
}

fn batches() -> &'static Batches {
    static BATCHES: OnceLock<Batches> = OnceLock::new();
    BATCHES.get_or_init(|| {
        let mut jobs = Vec::new();
        for name in SCENARIOS {
            let scenario = preset(name);
            assert_eq!(scenario.mechanism, Mechanism::Swle, "presets default to swle");
            for seed in 1..=SWLE_SEEDS {
                jobs.push(Job {
                    scenario: scenario.clone(),
                    seed,
                });
            }
            if name != "adversarial_pre_gst" {
                let mut rr = scenario.clone();
                rr.mechanism = Mechanism::Roundrobin;
                let rr_seeds = if name == "case3" { 3 } else { RR_SEEDS };
                for seed in 1..=rr_seeds {
                    jobs.push(Job {
                        scenario: rr.clone(),
                        seed,
                    });
                }
            }
        }
        let started = Instant::now();
        let results = run_batch(&jobs);
        let elapsed = started.elapsed();
        let mut swle: BTreeMap<&'static str, Vec<SimulationReport>> = BTreeMap::new();
        let mut rr: BTreeMap<&'static str, Vec<SimulationReport>> = BTreeMap::new();
        for (job, result) in jobs.iter().zip(results) {
            let report = result.unwrap_or_else(|e| {
                panic!(
                    "{} {} seed {} aborted: {e}",
                    job.scenario.out_dir.as_deref().unwrap_or("?"),
                    job.scenario.mechanism,
                    job.seed
                )
            });
            let name = SCENARIOS
                .iter()
                .find(|n| job.scenario.out_dir.as_deref() == Some(&format!("out/{n}")))
                .expect("job matches a preset");
            match job.scenario.mechanism {
                Mechanism::Swle => swle.entry(name).or_default().push(report),
                Mechanism::Roundrobin => rr.entry(name).or_default().push(report),
            }
        }
        Batches { swle, rr, elapsed }
    })
}

/// Pooled percentage of views led by faulty replicas across a report set.
fn pooled_faulty_pct(reports: &[SimulationReport], faulty: &[ReplicaId]) -> f64 {
    let mut led = 0usize;
    let mut total = 0usize;
    for r in reports {
        led += r
            .records
            .iter()
            .filter(|v| faulty.contains(&v.leader))
            .count();
        total += r.records.len();
    }
    100.0 * led as f64 / total as f64
}

fn mean_throughput(reports: &[SimulationReport], seeds: u64) -> f64 {
    let take = seeds as usize;
    reports[..take]
        .iter()
        .map(|r| r.summary.throughput_avg)
        .sum::<f64>()
        / take as f64
}

/// Criterion 1: over every aligned source window the target-view mapping is
/// a bijection onto the following aligned target window, exhaustively for
/// n in {4, 7, 10, 16, 100} and x in [0, 3n], in under five seconds.
#[test]
fn criterion_01_target_view_bijection() {
    let started = Instant::now();
    for n in [4u32, 7, 10, 16, 100] {
        let params = Params::new(n).unwrap();
        let t_z = params.window_core();
        let n64 = u64::from(n);
        for x in 0..=u64::from(3 * n) {
            let lo = n64 * (x + 1) + 1 + t_z;
            let mut seen = vec![false; n as usize];
            for v in (n64 * x + 1)..=(n64 * (x + 1)) {
                let t = target_view_raw(v, n, t_z);
                assert!(
                    t >= lo && t < lo + n64,
                    "n={n} x={x} v={v}: target {t} outside window"
                );
                let slot = (t - lo) as usize;
                assert!(!seen[slot], "n={n} x={x}: target {t} hit twice");
                seen[slot] = true;
            }
            assert!(seen.iter().all(|&s| s), "n={n} x={x}: window not covered");
        }
    }
    assert!(
        started.elapsed() < Duration::from_secs(5),
        "bijection check exceeded its runtime budget"
    );
}

/// Criterion 2: the election gap bound target - (v+1) >= T_z holds over
/// 100_000 random (v, n, T_f) triples.
#[test]
fn criterion_02_target_gap_bound() {
    let mut rng = simnet::rng::SimRng::new(0x9a5f);
    for _ in 0..100_000 {
        let v = rng.range(1, 1_000_000);
        let n = rng.range(1, 300) as u32;
        let t_f = rng.range(1, 1_000);
        let t_z = t_f.div_ceil(u64::from(n)) * u64::from(n);
        let t = target_view_raw(v, n, t_z);
        assert!(
            t >= v + 1 + t_z,
            "gap bound violated: v={v} n={n} t_f={t_f} target={t}"
        );
    }
}

/// Criterion 3: fixed scoring-event sequences reproduce hand-computed
/// integer-unit scores exactly, including clamping at zero and the
/// periodic normalization rule.
#[test]
fn criterion_03_scoring_exactness() {
    // n = 4: one point is 4 units.
    let p4 = Params::new(4).unwrap();
    let mut m = ReputationMatrix::new(0, &p4);
    let sequence = [
        ScoreEvent::ViewEntered { leader: 1 },                        // 1: 4 -> 0
        ScoreEvent::ProposalFinalized { leader: 1 },                  // 1: 0 -> 4
        ScoreEvent::ViewEntered { leader: 2 },                        // 2: 4 -> 0
        ScoreEvent::LeaderTimedOut { leader: 2 },                     // 2: clamp at 0
        ScoreEvent::PromotersRewarded { promoters: vec![0, 1, 3] },   // +1 unit each
        ScoreEvent::ViewEntered { leader: 3 },                        // 3: 5 -> 1
        ScoreEvent::Normalized,                                       // +4 units all
    ];
    for e in &sequence {
        m.apply_event(e, &p4);
    }
    let units: Vec<u64> = m.scores().iter().map(|s| s.units()).collect();
    assert_eq!(units, vec![9, 9, 4, 5]);

    // Clamp: 0.5 points (2 units) minus the timeout penalty floors at zero.
    let mut m = ReputationMatrix::new(0, &p4);
    m.apply_event(&ScoreEvent::ViewEntered { leader: 3 }, &p4); // 4 -> 0
    m.apply_event(&ScoreEvent::PromotersRewarded { promoters: vec![3, 3] }, &p4);
    m.apply_event(&ScoreEvent::PromotersRewarded { promoters: vec![3] }, &p4);
    m.apply_event(&ScoreEvent::PromotersRewarded { promoters: vec![3] }, &p4);
    assert_eq!(m.score(3).units(), 4); // rebuilt to 1 point unit by unit
    m.apply_event(&ScoreEvent::LeaderTimedOut { leader: 3 }, &p4);
    assert_eq!(m.score(3).units(), 0);

    // n = 16: the timeout penalty is n^2 = 256 units; replaying the same
    // sequence on two matrices stays bit-identical.
    let p16 = Params::new(16).unwrap();
    let mut a = ReputationMatrix::new(0, &p16);
    let mut b = ReputationMatrix::new(5, &p16);
    let seq16 = [
        ScoreEvent::Normalized,                    // everyone 16 -> 32
        ScoreEvent::ViewEntered { leader: 7 },     // 7: 32 -> 16
        ScoreEvent::LeaderTimedOut { leader: 7 },  // 7: 16 - 256 clamps to 0
        ScoreEvent::ProposalFinalized { leader: 9 }, // 9: 32 -> 48
    ];
    for e in &seq16 {
        a.apply_event(e, &p16);
        b.apply_event(e, &p16);
    }
    assert_eq!(a.scores(), b.scores());
    assert_eq!(a.score(7).units(), 0);
    assert_eq!(a.score(9).units(), 48);
    assert_eq!(a.score(0).units(), 32);

    // R5 period: the rule fires exactly when the entered view is a multiple
    // of theta, and it lands before the entry charge.
    assert_eq!(p16.theta(), 300);
    assert!(p16.normalization_due(300));
    assert!(!p16.normalization_due(301));
    assert!(p16.normalization_due(600));
    let mut elector = SwleElector::new(0, p16.clone());
    elector.note_view_entered(300, 12);
    // Leader 12 nets the normalization bonus against the entry charge.
    assert_eq!(elector.matrix().score(12).units(), 16);
    assert_eq!(elector.matrix().score(0).units(), 32);
}

/// Criterion 4: ten thousand randomized well-formed vote sets package into
/// certificates that verify; independent verifications agree; mutating any
/// field causes rejection.
#[test]
fn criterion_04_certificate_roundtrip_and_determinism() {
    let auth = SimAuthenticator;
    let mut rng = simnet::rng::SimRng::new(0xce57);
    for i in 0..10_000u64 {
        let n = [4u32, 7, 16][(i % 3) as usize];
        let params = Params::new(n).unwrap();
        let v: View = rng.range(1, 5_000);
        let target = target_view_raw(v, n, params.window_core());
        let claimant = rng.range(0, u64::from(n)) as ReplicaId;
        let mut votes = Vec::new();
        for voter in 0..params.quorum() {
            let mut candidates: Vec<ReplicaId> =
                (0..n).filter(|_| !rng.next_u64().is_multiple_of(3)).collect();
            if candidates.is_empty() {
                candidates.push(rng.range(0, u64::from(n)) as ReplicaId);
            }
            votes.push(VoteExtension::new_signed(
                v, claimant, target, candidates, voter, &auth,
            ));
        }
        let cert = package_certificate(votes.clone(), target, &params, &auth)
            .expect("well-formed set packages");
        verify_certificate(&cert, claimant, v + 1, &params, &auth).expect("round-trip verifies");

        // Two independent verifiers recompute the same winner: repackage
        // from reversed vote order and compare.
        let mut reversed = votes;
        reversed.reverse();
        let again = package_certificate(reversed, target, &params, &auth).unwrap();
        assert_eq!(cert.elected, again.elected);
        verify_certificate(&again, claimant, v + 1, &params, &auth).unwrap();

        // One mutation per iteration, cycling through every field class.
        let mut mutated = cert.clone();
        let mut proposer = claimant;
        let mut proposal_view = v + 1;
        match i % 7 {
            0 => mutated.elected = Some(mutated.elected.map_or(0, |e| (e + 1) % n)),
            1 => mutated.target_view += 1,
            2 => {
                mutated.votes.pop();
            }
            3 => {
                mutated.votes[0].signature =
                    swle_core::Signature(mutated.votes[0].signature.0 ^ 0x1)
            }
            4 => proposer = (proposer + 1) % n,
            5 => proposal_view += 1,
            _ => {
                let dup = mutated.votes[0].clone();
                let len = mutated.votes.len();
                mutated.votes[len - 1] = dup;
            }
        }
        assert!(
            verify_certificate(&mutated, proposer, proposal_view, &params, &auth).is_err(),
            "mutation {} accepted",
            i % 7
        );
    }
}

/// Criterion 5: across 20 seeds x {case1, case2, case3, fault-free,
/// adversarial pre-GST} at n=16 over 2000 views, no run aborts on a safety
/// or leadership-uniqueness violation, within the runtime budget.
#[test]
fn criterion_05_safety_and_uniqueness_under_simulation() {
    let b = batches();
    for name in SCENARIOS {
        let runs = &b.swle[name];
        assert_eq!(runs.len(), SWLE_SEEDS as usize, "{name}: missing runs");
        for r in runs {
            assert_eq!(r.records.len(), 2000, "{name}: horizon incomplete");
        }
    }
    // Round-robin baselines ran through the same checkers.
    for (name, runs) in &b.rr {
        for r in runs {
            assert_eq!(r.records.len(), 2000, "{name} baseline: horizon incomplete");
        }
    }
    assert!(
        b.elapsed < Duration::from_secs(600),
        "simulation batch took {:?}, over the 10 minute budget",
        b.elapsed
    );
}

/// Criterion 6: every post-GST run measures a finite recovery view after
/// which all view entries carry a settled elected leader; under adversarial
/// pre-GST targeting the recovery view trails GST by at most theta + 2n.
#[test]
fn criterion_06_timely_finalization_recovery() {
    let b = batches();
    let params = Params::new(16).unwrap();
    let bound = params.theta() + 2 * u64::from(params.n());
    for name in SCENARIOS {
        let scenario = preset(name);
        for r in &b.swle[name] {
            let v_c = r.v_c.unwrap_or_else(|| panic!("{name}: no recovery view measured"));
            assert!(
                r.records
                    .iter()
                    .filter(|rec| rec.view > v_c)
                    .all(|rec| !rec.entry_elected_missing),
                "{name} seed {}: unsettled elected slot after v_c={v_c}",
                r.seed
            );
            if name == "adversarial_pre_gst" {
                let gst_view = r
                    .records
                    .iter()
                    .find(|rec| rec.entry_us >= scenario.gst_us())
                    .map(|rec| rec.view)
                    .expect("horizon extends past GST");
                assert!(
                    v_c >= gst_view && v_c - gst_view <= bound,
                    "seed {}: v_c={v_c} exceeds GST view {gst_view} + {bound}",
                    r.seed
                );
            }
        }
    }
}

/// Criterion 7: faulty-leader frequency. Case 1: the reputation mechanism
/// keeps the faulty replica under 3% of views vs 5-8% for round-robin.
/// Case 2 (three Byzantine replicas): under 10% vs 16-21%.
#[test]
fn criterion_07_faulty_leader_frequency() {
    let b = batches();
    let case1_swle = pooled_faulty_pct(&b.swle["case1"], &[0]);
    let case1_rr = pooled_faulty_pct(&b.rr["case1"], &[0]);
    assert!(case1_swle < 3.0, "case1 swle rate {case1_swle:.2}%");
    assert!(
        (5.0..=8.0).contains(&case1_rr),
        "case1 roundrobin rate {case1_rr:.2}%"
    );

    let case2_swle = pooled_faulty_pct(&b.swle["case2"], &[0, 1, 2]);
    let case2_rr = pooled_faulty_pct(&b.rr["case2"], &[0, 1, 2]);
    assert!(case2_swle < 10.0, "case2 swle rate {case2_swle:.2}%");
    assert!(
        (16.0..=21.0).contains(&case2_rr),
        "case2 roundrobin rate {case2_rr:.2}%"
    );
}

/// Criterion 8: throughput ratio. Case 1 average throughput of the
/// reputation mechanism is at least 3x round-robin; fault-free the two
/// mechanisms are within 5% of each other.
#[test]
fn criterion_08_throughput_ratio() {
    let b = batches();
    let ratio = mean_throughput(&b.swle["case1"], RR_SEEDS)
        / mean_throughput(&b.rr["case1"], RR_SEEDS);
    assert!(ratio >= 3.0, "case1 throughput ratio {ratio:.2}");

    let ff = mean_throughput(&b.swle["fault_free"], RR_SEEDS)
        / mean_throughput(&b.rr["fault_free"], RR_SEEDS);
    assert!(
        (0.95..=1.05).contains(&ff),
        "fault-free throughput ratio {ff:.3}"
    );
}

/// Criterion 9: election quality. In cases 1 and 2 every post-recovery
/// window of n views holds between 2f+1 and n unified-correct views on
/// average, and the report carries the theoretical ceiling (about 15.47
/// for this setup) alongside.
#[test]
fn criterion_09_gamma_guarantee_bracket() {
    let b = batches();
    for name in ["case1", "case2"] {
        for r in &b.swle[name] {
            let g = r
                .summary
                .gamma_report
                .as_ref()
                .unwrap_or_else(|| panic!("{name} seed {}: no gamma report", r.seed));
            assert_eq!(g.window_len, 16);
            assert_eq!(g.gamma_t, 11.0);
            assert!(
                g.mean_c >= g.gamma_t && g.mean_c <= 16.0,
                "{name} seed {}: mean C {:.3} outside [11, 16]",
                r.seed,
                g.mean_c
            );
            assert!(
                (g.sup - (16.0 - (16.0 / 300.0 * 5.0) * 2.0)).abs() < 1e-9,
                "sup mismatch: {}",
                g.sup
            );
            assert!((g.sup - 15.47).abs() < 0.01);
        }
    }
}

/// Criterion 10: a (config, seed) pair rerun yields byte-identical CSV and
/// JSON outputs.
#[test]
fn criterion_10_byte_identical_reruns() {
    let b = batches();
    for name in ["case1", "fault_free"] {
        let first = &b.swle[name][0];
        let again = simnet::run(&preset(name), first.seed).unwrap();
        assert_eq!(first.per_view_csv(), again.per_view_csv(), "{name} CSV differs");
        assert_eq!(
            first.summary_json(),
            again.summary_json(),
            "{name} JSON differs"
        );
    }
}

/// Crash faults (case 3): the reputation mechanism hands crashed replicas
/// far fewer views than rotation does.
#[test]
fn case3_crash_led_views_below_round_robin() {
    let b = batches();
    let swle = pooled_faulty_pct(&b.swle["case3"], &[0, 1, 2]);
    let rr = pooled_faulty_pct(&b.rr["case3"], &[0, 1, 2]);
    assert!(swle < rr, "swle {swle:.2}% vs roundrobin {rr:.2}%");
    assert!(
        (16.0..=21.0).contains(&rr),
        "case3 roundrobin rate {rr:.2}%"
    );
}

/// Fault-free at n=4 the two mechanisms' instantaneous series agree within
/// 5% on mean throughput.
#[test]
fn fault_free_series_stay_within_five_percent() {
    let mut scenario = preset("quickstart");
    scenario.faults.clear();
    scenario.views = 300;
    let swle = simnet::run(&scenario, 21).unwrap();
    scenario.mechanism = Mechanism::Roundrobin;
    let rr = simnet::run(&scenario, 21).unwrap();
    let mean = |r: &SimulationReport| {
        let s = metrics::instantaneous_series(&r.records, 1_000_000);
        s.points.iter().map(|p| p.ops_per_sec).sum::<f64>() / s.points.len() as f64
    };
    let a = mean(&swle);
    let b = mean(&rr);
    let diff = (a - b).abs() / b;
    assert!(diff < 0.05, "series means differ by {:.1}%", diff * 100.0);
}
