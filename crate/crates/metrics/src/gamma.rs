use serde::Serialize;

use swle_core::{Params, View};

use crate::records::ViewRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaError {
    /// Not a single full window of views fits after the measured recovery
    /// view.
    InsufficientHorizon,
}

/// Election-quality statistics over consecutive `n`-view windows after the
/// measured recovery view `v_c`: per-window counts of views whose leader was
/// unified across correct replicas and itself correct, their mean, and the
/// theoretical bracket `[gamma * T, sup]` that mean is expected to fall in.
#[derive(Debug, Clone, Serialize)]
pub struct GammaReport {
    pub window_len: u32,
    pub v_c: View,
    pub windows: Vec<u32>,
    pub mean_c: f64,
    pub gamma: f64,
    pub gamma_t: f64,
    pub sup: f64,
}

/// `sup = n - (n/Θ · f)(1 + T_z/n)`: the best-case expected unified-correct
/// count per window, discounted by how often each faulty replica can reclaim
/// leadership per normalization period.
pub fn sup_bound(params: &Params) -> f64 {
    let n = f64::from(params.n());
    let f = f64::from(params.f());
    let t_z = params.window_core() as f64;
    let theta = params.theta() as f64;
    n - (n / theta * f) * (1.0 + t_z / n)
}

/// Partition the views after `v_c` into consecutive `n`-view windows and
/// count unified-correct views in each.
pub fn gamma_windows(
    records: &[ViewRecord],
    params: &Params,
    v_c: View,
) -> Result<GammaReport, GammaError> {
    let n = params.n();
    let mut windows = Vec::new();
    let mut current = 0u32;
    let mut in_window = 0u32;
    for r in records.iter().filter(|r| r.view > v_c) {
        if r.unified && r.leader_correct {
            current += 1;
        }
        in_window += 1;
        if in_window == n {
            windows.push(current);
            current = 0;
            in_window = 0;
        }
    }
    if windows.is_empty() {
        return Err(GammaError::InsufficientHorizon);
    }
    let mean_c = f64::from(windows.iter().sum::<u32>()) / windows.len() as f64;
    Ok(GammaReport {
        window_len: n,
        v_c,
        mean_c,
        gamma: f64::from(params.quorum()) / f64::from(n),
        gamma_t: f64::from(params.quorum()),
        sup: sup_bound(params),
        windows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(view: u64, unified: bool, leader_correct: bool) -> ViewRecord {
        ViewRecord {
            view,
            determined: vec![0],
            leader: 0,
            unified,
            leader_correct,
            finalized: true,
            timed_out: false,
            entry_us: view * 1000,
            decide_us: Some(view * 1000 + 10),
            ops: 1,
            injected_at_us: Some(view * 1000),
            entry_elected_missing: false,
        }
    }

    /// Direct evaluation of the bracket formulas for the evaluation setup:
    /// n=16, f=5, Θ=300, T_z=16 give γT = 11 and sup ≈ 15.47.
    #[test]
    fn bracket_for_sixteen_replicas() {
        let params = Params::new(16).unwrap();
        assert_eq!(params.theta(), 300);
        assert_eq!(params.window_core(), 16);
        let sup = sup_bound(&params);
        // Independent recomputation: 16 - (16/300 * 5) * (1 + 16/16).
        let expected = 16.0 - (16.0 / 300.0 * 5.0) * 2.0;
        assert!((sup - expected).abs() < 1e-12);
        assert!((sup - 15.4667).abs() < 0.01);

        let records: Vec<ViewRecord> = (1..=64).map(|v| record(v, true, true)).collect();
        let report = gamma_windows(&records, &params, 0).unwrap();
        assert_eq!(report.gamma_t, 11.0);
        assert!((report.gamma - 11.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn fault_free_windows_count_everything() {
        let params = Params::new(4).unwrap();
        let records: Vec<ViewRecord> = (1..=12).map(|v| record(v, true, true)).collect();
        let report = gamma_windows(&records, &params, 0).unwrap();
        assert_eq!(report.windows, vec![4, 4, 4]);
        assert_eq!(report.mean_c, 4.0);
    }

    #[test]
    fn faulty_led_views_reduce_the_count() {
        let params = Params::new(4).unwrap();
        let mut records: Vec<ViewRecord> = (1..=8).map(|v| record(v, true, true)).collect();
        records[2] = record(3, true, false); // faulty leader
        records[5] = record(6, false, true); // split determination
        let report = gamma_windows(&records, &params, 0).unwrap();
        assert_eq!(report.windows, vec![3, 3]);
    }

    #[test]
    fn windows_start_after_recovery_view() {
        let params = Params::new(4).unwrap();
        let records: Vec<ViewRecord> = (1..=12).map(|v| record(v, v > 4, true)).collect();
        let report = gamma_windows(&records, &params, 4).unwrap();
        assert_eq!(report.windows, vec![4, 4]);
    }

    #[test]
    fn too_short_a_horizon_is_an_error() {
        let params = Params::new(4).unwrap();
        let records: Vec<ViewRecord> = (1..=3).map(|v| record(v, true, true)).collect();
        assert_eq!(
            gamma_windows(&records, &params, 0).unwrap_err(),
            GammaError::InsufficientHorizon
        );
    }
}
