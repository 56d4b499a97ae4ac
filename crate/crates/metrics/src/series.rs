use crate::records::ViewRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub window_start_us: u64,
    pub ops_per_sec: f64,
    /// Mean commit latency of the window's finalizations; `None` when the
    /// window finalized nothing.
    pub mean_latency_us: Option<f64>,
}

/// Throughput/latency sampled over consecutive time windows.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub window_us: u64,
    pub points: Vec<SeriesPoint>,
    pub total_ops: u64,
    /// Mean latency across every finalization in the run; `None` when
    /// nothing finalized.
    pub latency_avg_us: Option<f64>,
}

/// Bucket finalizations into `window_us`-wide windows by decide time. Views
/// without a recorded quorum decide time are excluded. Latency is measured
/// from operation injection to the `2f+1`-th correct finalization.
pub fn instantaneous_series(records: &[ViewRecord], window_us: u64) -> Series {
    assert!(window_us > 0);
    let mut events: Vec<(u64, u32, u64)> = records
        .iter()
        .filter_map(|r| {
            let decide = r.decide_us?;
            let injected = r.injected_at_us?;
            Some((decide, r.ops, decide.saturating_sub(injected)))
        })
        .collect();
    events.sort_unstable();

    let mut points = Vec::new();
    let mut total_ops = 0u64;
    let mut lat_sum = 0u128;
    let mut lat_n = 0u64;
    if let Some(&(last, _, _)) = events.last() {
        let windows = last / window_us + 1;
        let mut it = events.iter().peekable();
        for w in 0..windows {
            let end = (w + 1) * window_us;
            let mut ops = 0u64;
            let mut sum = 0u128;
            let mut n = 0u64;
            while let Some(&&(t, o, l)) = it.peek() {
                if t >= end {
                    break;
                }
                ops += u64::from(o);
                sum += u128::from(l);
                n += 1;
                it.next();
            }
            total_ops += ops;
            lat_sum += sum;
            lat_n += n;
            points.push(SeriesPoint {
                window_start_us: w * window_us,
                ops_per_sec: ops as f64 / (window_us as f64 / 1e6),
                mean_latency_us: (n > 0).then(|| sum as f64 / n as f64),
            });
        }
    }
    Series {
        window_us,
        points,
        total_ops,
        latency_avg_us: (lat_n > 0).then(|| lat_sum as f64 / lat_n as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(view: u64, decide_us: Option<u64>, ops: u32, injected: Option<u64>) -> ViewRecord {
        ViewRecord {
            view,
            determined: vec![0],
            leader: 0,
            unified: true,
            leader_correct: true,
            finalized: decide_us.is_some(),
            timed_out: decide_us.is_none(),
            entry_us: 0,
            decide_us,
            ops,
            injected_at_us: injected,
            entry_elected_missing: false,
        }
    }

    #[test]
    fn one_window_of_400_ops_in_100ms_is_4000_ops_per_sec() {
        let records = vec![record(1, Some(50_000), 400, Some(10_000))];
        let s = instantaneous_series(&records, 100_000);
        assert_eq!(s.points.len(), 1);
        assert!((s.points[0].ops_per_sec - 4000.0).abs() < 1e-9);
        assert_eq!(s.points[0].mean_latency_us, Some(40_000.0));
        assert_eq!(s.total_ops, 400);
    }

    #[test]
    fn zero_finalizations_yield_empty_series_and_no_latency() {
        let records = vec![record(1, None, 0, None), record(2, None, 0, None)];
        let s = instantaneous_series(&records, 100_000);
        assert!(s.points.is_empty());
        assert_eq!(s.latency_avg_us, None);
        assert_eq!(s.total_ops, 0);
    }

    #[test]
    fn windows_partition_by_decide_time() {
        let records = vec![
            record(1, Some(20_000), 100, Some(0)),
            record(2, Some(120_000), 300, Some(100_000)),
            record(3, None, 0, None),
        ];
        let s = instantaneous_series(&records, 100_000);
        assert_eq!(s.points.len(), 2);
        assert!((s.points[0].ops_per_sec - 1000.0).abs() < 1e-9);
        assert!((s.points[1].ops_per_sec - 3000.0).abs() < 1e-9);
        assert_eq!(s.latency_avg_us, Some(20_000.0));
    }
}
