use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;
use thiserror::Error;

use swle_core::{Params, ReplicaId, View};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config rejected: {0}")]
    Invalid(String),
    #[error("config io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    Swle,
    Roundrobin,
}

impl Mechanism {
    pub fn as_str(self) -> &'static str {
        match self {
            Mechanism::Swle => "swle",
            Mechanism::Roundrobin => "roundrobin",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mechanism {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "swle" => Ok(Mechanism::Swle),
            "roundrobin" => Ok(Mechanism::Roundrobin),
            other => Err(format!("unknown mechanism {other:?} (swle|roundrobin)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ByzantineStrategy {
    /// Behaves correctly except it never proposes when it leads.
    SilentLeader,
    /// Votes with zero processing delay to farm participation rewards, and
    /// never proposes when it leads.
    ReputationBuilder,
    /// Emits nothing at all.
    Mute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FaultSpec {
    Correct { replica: ReplicaId },
    Crash { replica: ReplicaId, from_view: View },
    Byzantine {
        replica: ReplicaId,
        strategy: ByzantineStrategy,
    },
}

impl FaultSpec {
    pub fn replica(&self) -> ReplicaId {
        match self {
            FaultSpec::Correct { replica }
            | FaultSpec::Crash { replica, .. }
            | FaultSpec::Byzantine { replica, .. } => *replica,
        }
    }

    pub fn is_faulty(&self) -> bool {
        !matches!(self, FaultSpec::Correct { .. })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyGroups {
    /// Group id per replica, length n.
    pub assignments: Vec<u32>,
    /// One-way delay between replicas sharing a group, microseconds.
    pub intra_us: u64,
    /// One-way base delay between groups, microseconds (square matrix).
    pub inter_us: Vec<Vec<u64>>,
    /// Uniform random addend on every link, microseconds.
    #[serde(default)]
    pub jitter_us: u64,
}

/// Delivery policy for messages sent before GST.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum PreGstPolicy {
    /// Delays drawn uniformly up to the given bound.
    Random { max_delay_ms: u64 },
    /// Messages from the chosen correct victims are held back by a fixed
    /// delay; everyone else sees normal latency.
    Targeted { victims: Vec<ReplicaId>, delay_ms: u64 },
}

/// One simulation scenario. Unknown keys are rejected.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub n: u32,
    pub f: u32,
    pub views: u64,
    pub seed: u64,
    pub gst_ms: u64,
    pub delta_ms: u64,
    pub timeout_ms: u64,
    pub batch_size: u32,
    pub payload_bytes: u32,
    pub mechanism: Mechanism,
    #[serde(default)]
    pub faults: Vec<FaultSpec>,
    /// Full n-by-n one-way latency matrix in microseconds. Mutually
    /// exclusive with `latency_groups`; omitting both selects the default
    /// four-region geography.
    #[serde(default)]
    pub latency_matrix: Option<Vec<Vec<u64>>>,
    #[serde(default)]
    pub latency_groups: Option<LatencyGroups>,
    #[serde(default)]
    pub theta_override: Option<u64>,
    #[serde(default)]
    pub t_f: Option<u64>,
    #[serde(default)]
    pub pre_gst: Option<PreGstPolicy>,
    /// Where the CLI writes this scenario's reports.
    #[serde(default)]
    pub out_dir: Option<String>,
}

/// Default geography: four regions, 2 ms inside a region, 10-30 ms between
/// regions.
pub const DEFAULT_INTRA_US: u64 = 2_000;
pub const DEFAULT_INTER_MS: [[u64; 4]; 4] = [
    [0, 10, 20, 30],
    [10, 0, 14, 24],
    [20, 14, 0, 12],
    [30, 24, 12, 0],
];
pub const DEFAULT_JITTER_US: u64 = 500;

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let scenario: Scenario =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn params(&self) -> Result<Params, ConfigError> {
        let invalid = |e| ConfigError::Invalid(format!("{e}"));
        let mut params = match self.t_f {
            Some(t_f) => Params::with_latency_bound(self.n, t_f).map_err(invalid)?,
            None => Params::new(self.n).map_err(invalid)?,
        };
        if let Some(theta) = self.theta_override {
            params = params.with_theta(theta).map_err(invalid)?;
        }
        Ok(params)
    }

    pub fn gst_us(&self) -> u64 {
        self.gst_ms * 1_000
    }

    pub fn delta_us(&self) -> u64 {
        self.delta_ms * 1_000
    }

    pub fn timeout_us(&self) -> u64 {
        self.timeout_ms * 1_000
    }

    /// Replicas with a non-correct fault spec.
    pub fn faulty_set(&self) -> BTreeSet<ReplicaId> {
        self.faults
            .iter()
            .filter(|f| f.is_faulty())
            .map(|f| f.replica())
            .collect()
    }

    pub fn fault_of(&self, replica: ReplicaId) -> FaultSpec {
        self.faults
            .iter()
            .find(|f| f.replica() == replica)
            .copied()
            .unwrap_or(FaultSpec::Correct { replica })
    }

    /// Effective n-by-n one-way base latency matrix in microseconds, plus
    /// the jitter bound.
    pub fn latency(&self) -> Result<(Vec<Vec<u64>>, u64), ConfigError> {
        let n = self.n as usize;
        if let Some(matrix) = &self.latency_matrix {
            return Ok((matrix.clone(), 0));
        }
        let groups = match &self.latency_groups {
            Some(g) => g.clone(),
            None => LatencyGroups {
                assignments: (0..self.n).map(|i| i * 4 / self.n).collect(),
                intra_us: DEFAULT_INTRA_US,
                inter_us: DEFAULT_INTER_MS
                    .iter()
                    .map(|row| row.iter().map(|ms| ms * 1_000).collect())
                    .collect(),
                jitter_us: DEFAULT_JITTER_US,
            },
        };
        let mut matrix = vec![vec![0u64; n]; n];
        for (i, row) in matrix.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                if i == j {
                    continue;
                }
                let gi = groups.assignments[i] as usize;
                let gj = groups.assignments[j] as usize;
                *cell = if gi == gj {
                    groups.intra_us
                } else {
                    groups.inter_us[gi][gj]
                };
            }
        }
        Ok((matrix, groups.jitter_us))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: String| Err(ConfigError::Invalid(msg));
        if self.n < 4 || self.n % 3 != 1 {
            return fail(format!("n must be 3f+1 with f >= 1, got {}", self.n));
        }
        if self.f != (self.n - 1) / 3 {
            return fail(format!("f must equal (n-1)/3 = {}, got {}", (self.n - 1) / 3, self.f));
        }
        if self.views == 0 {
            return fail("views must be positive".into());
        }
        if self.timeout_ms == 0 || self.delta_ms == 0 {
            return fail("timeout_ms and delta_ms must be positive".into());
        }
        if self.batch_size == 0 {
            return fail("batch_size must be positive".into());
        }
        if self.delta_us() >= self.timeout_us() {
            return fail("delta_ms must be below timeout_ms or no view can ever decide".into());
        }
        self.params()?;

        let mut seen = BTreeSet::new();
        for fault in &self.faults {
            let r = fault.replica();
            if r >= self.n {
                return fail(format!("fault spec names replica {r} outside 0..{}", self.n));
            }
            if !seen.insert(r) {
                return fail(format!("replica {r} appears in multiple fault specs"));
            }
        }
        let faulty = self.faulty_set().len() as u32;
        if faulty > self.f {
            return fail(format!("{faulty} faulty replicas exceed the bound f = {}", self.f));
        }

        if self.latency_matrix.is_some() && self.latency_groups.is_some() {
            return fail("latency_matrix and latency_groups are mutually exclusive".into());
        }
        if let Some(m) = &self.latency_matrix {
            if m.len() != self.n as usize || m.iter().any(|row| row.len() != self.n as usize) {
                return fail("latency_matrix must be n x n".into());
            }
        }
        if let Some(g) = &self.latency_groups {
            if g.assignments.len() != self.n as usize {
                return fail("latency_groups.assignments must list every replica".into());
            }
            let groups = g.inter_us.len();
            if groups == 0 || g.inter_us.iter().any(|row| row.len() != groups) {
                return fail("latency_groups.inter_us must be a square matrix".into());
            }
            if g.assignments.iter().any(|&a| a as usize >= groups) {
                return fail("latency_groups.assignments references an unknown group".into());
            }
        }
        let (matrix, jitter) = self.latency()?;
        let max_link = matrix.iter().flatten().copied().max().unwrap_or(0);
        if max_link + jitter > self.delta_us() {
            return fail(format!(
                "slowest link ({} us + {} us jitter) exceeds delta_ms; post-GST delivery bound \
                 would not hold",
                max_link, jitter
            ));
        }

        if let Some(PreGstPolicy::Targeted { victims, .. }) = &self.pre_gst {
            let faulty = self.faulty_set();
            for v in victims {
                if *v >= self.n {
                    return fail(format!("pre-GST victim {v} outside 0..{}", self.n));
                }
                if faulty.contains(v) {
                    return fail(format!("pre-GST victim {v} must be a correct replica"));
                }
            }
        }
        Ok(())
    }
}
