use std::collections::BTreeSet;
use std::io::{self, Write};

use serde::Serialize;

use swle_core::{Params, ReplicaId, View};

use crate::gamma::{gamma_windows, GammaReport};
use crate::records::ViewRecord;
use crate::series::instantaneous_series;

/// Percentage of views whose majority-determined leader is faulty, and the
/// percentage of views that timed out, over one run's records.
pub fn faulty_leader_rate(
    records: &[ViewRecord],
    faulty: &BTreeSet<ReplicaId>,
) -> (f64, f64) {
    let total = records.len().max(1) as f64;
    let faulty_led = records.iter().filter(|r| faulty.contains(&r.leader)).count();
    let timed_out = records.iter().filter(|r| r.timed_out).count();
    (
        100.0 * faulty_led as f64 / total,
        100.0 * timed_out as f64 / total,
    )
}

/// Run summary serialized as the JSON report. Throughput is in operations
/// per second, latency in simulated microseconds, rates in percent.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub mechanism: String,
    pub n: u32,
    pub f: u32,
    pub seed: u64,
    pub views: u64,
    pub throughput_avg: f64,
    pub latency_avg: Option<f64>,
    pub faulty_leader_pct: f64,
    pub timeout_pct: f64,
    pub gamma_report: Option<GammaReport>,
    pub v_c: Option<View>,
    pub total_ops: u64,
    pub sim_duration_us: u64,
    pub violations: u64,
}

impl Summary {
    /// Aggregate a run. `v_c` is the measured recovery view of mechanisms
    /// that track election state; the gamma report is attached whenever a
    /// full window fits after it.
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        mechanism: &str,
        params: &Params,
        seed: u64,
        records: &[ViewRecord],
        faulty: &BTreeSet<ReplicaId>,
        sim_duration_us: u64,
        v_c: Option<View>,
        violations: u64,
    ) -> Summary {
        let series = instantaneous_series(records, 1_000_000);
        let (faulty_leader_pct, timeout_pct) = faulty_leader_rate(records, faulty);
        let gamma_report =
            v_c.and_then(|vc| gamma_windows(records, params, vc).ok());
        Summary {
            mechanism: mechanism.to_string(),
            n: params.n(),
            f: params.f(),
            seed,
            views: records.len() as u64,
            throughput_avg: series.total_ops as f64 / (sim_duration_us.max(1) as f64 / 1e6),
            latency_avg: series.latency_avg_us,
            faulty_leader_pct,
            timeout_pct,
            gamma_report,
            v_c,
            total_ops: series.total_ops,
            sim_duration_us,
            violations,
        }
    }
}

/// Per-view CSV log. Booleans are written as `0`/`1`; a view that never
/// reached a quorum decide leaves `decide_us` empty.
pub fn write_per_view_csv(records: &[ViewRecord], out: &mut impl Write) -> io::Result<()> {
    writeln!(
        out,
        "view,leader,unified,leader_correct,finalized,timed_out,entry_us,decide_us,ops"
    )?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.view,
            r.leader,
            u8::from(r.unified),
            u8::from(r.leader_correct),
            u8::from(r.finalized),
            u8::from(r.timed_out),
            r.entry_us,
            r.decide_us.map_or(String::new(), |d| d.to_string()),
            r.ops,
        )?;
    }
    Ok(())
}

pub fn write_summary_json(summary: &Summary, out: &mut impl Write) -> io::Result<()> {
    let text = serde_json::to_string_pretty(summary).expect("summary serializes");
    out.write_all(text.as_bytes())?;
    out.write_all(b"\n")
}
