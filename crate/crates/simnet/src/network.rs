use std::collections::BTreeSet;

use swle_core::ReplicaId;

use crate::config::{ConfigError, PreGstPolicy, Scenario};
use crate::rng::SimRng;

enum PreGst {
    /// Uniform random delay up to the bound (at least the link latency).
    Random { max_us: u64 },
    /// Hold back messages sent by the victim set.
    Targeted { victims: BTreeSet<ReplicaId>, delay_us: u64 },
}

/// Partial-synchrony link model: before GST the configured pre-GST policy
/// applies; from GST on, every correct-to-correct message arrives within
/// `base + jitter <= delta` of its send time.
pub struct NetworkModel {
    gst_us: u64,
    delta_us: u64,
    base_us: Vec<Vec<u64>>,
    jitter_us: u64,
    pre_gst: PreGst,
}

impl NetworkModel {
    pub fn from_scenario(scenario: &Scenario) -> Result<Self, ConfigError> {
        let (base_us, jitter_us) = scenario.latency()?;
        let pre_gst = match &scenario.pre_gst {
            Some(PreGstPolicy::Random { max_delay_ms }) => PreGst::Random {
                max_us: max_delay_ms * 1_000,
            },
            Some(PreGstPolicy::Targeted { victims, delay_ms }) => PreGst::Targeted {
                victims: victims.iter().copied().collect(),
                delay_us: delay_ms * 1_000,
            },
            // Chaotic-by-default before GST: delays up to four timeouts.
            None => PreGst::Random {
                max_us: scenario.timeout_us() * 4,
            },
        };
        Ok(NetworkModel {
            gst_us: scenario.gst_us(),
            delta_us: scenario.delta_us(),
            base_us,
            jitter_us,
            pre_gst,
        })
    }

    pub fn gst_us(&self) -> u64 {
        self.gst_us
    }

    pub fn delta_us(&self) -> u64 {
        self.delta_us
    }

    /// One-way delivery delay for a message sent at `send_us`.
    pub fn delay(&self, from: ReplicaId, to: ReplicaId, send_us: u64, rng: &mut SimRng) -> u64 {
        let base = self.base_us[from as usize][to as usize];
        let jitter = if self.jitter_us > 0 {
            rng.range(0, self.jitter_us + 1)
        } else {
            0
        };
        let normal = base + jitter;
        debug_assert!(normal <= self.delta_us);
        if send_us >= self.gst_us {
            return normal;
        }
        match &self.pre_gst {
            PreGst::Random { max_us } => {
                let hi = (*max_us).max(normal + 1);
                rng.range(normal, hi)
            }
            PreGst::Targeted { victims, delay_us } => {
                if victims.contains(&from) {
                    normal + delay_us
                } else {
                    normal
                }
            }
        }
    }
}
