use thiserror::Error;

use crate::View;

/// Default normalization period floor, in views.
const THETA_FLOOR: u64 = 300;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParamsError {
    #[error("replica count must satisfy n = 3f + 1 with f >= 1, got n = {0}")]
    BadReplicaCount(u32),
    #[error("assumed decision latency bound T_f must be positive")]
    BadLatencyBound,
    #[error("normalization period must be at least n, got {theta} < {n}")]
    BadTheta { theta: u64, n: u32 },
    #[error("normalization increment must be positive")]
    BadAlphas,
}

/// Scoring rule increments, in score units (one reputation point = `n` units).
///
/// The defaults encode, for rules R1..R5 respectively: -1 point on view
/// entry, -n points on timeout, +1 point on finalization, +1/n point per
/// promoter, +1 point on periodic normalization. Since 1/n point is exactly
/// one unit, every increment is an integer and score arithmetic stays exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphas {
    /// R1: charged to the determined leader when a view is entered.
    pub view_entry: i64,
    /// R2: charged to the determined leader when a view times out.
    pub timeout: i64,
    /// R3: awarded to the leader of a finalized proposal.
    pub finalized: i64,
    /// R4: awarded to each consensus-promoting voter, applied by the
    /// successful leader only.
    pub promoter: i64,
    /// R5: awarded to every replica once per normalization period.
    pub normalize: i64,
}

impl Alphas {
    /// Default rule increments for a system of `n` replicas.
    pub fn defaults(n: u32) -> Self {
        let n = i64::from(n);
        Alphas {
            view_entry: -n,
            timeout: -(n * n),
            finalized: n,
            promoter: 1,
            normalize: n,
        }
    }
}

/// Static election parameters shared by all replicas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Params {
    n: u32,
    f: u32,
    t_f: u64,
    t_z: u64,
    theta: u64,
    alphas: Alphas,
}

impl Params {
    /// Parameters for `n = 3f + 1` replicas with the default decision-latency
    /// bound `T_f = n - 1` (hence `T_z = n`) and `Θ = max(300, 10n)`.
    pub fn new(n: u32) -> Result<Self, ParamsError> {
        Self::with_latency_bound(n, u64::from(n).saturating_sub(1))
    }

    /// Parameters with an explicit decision-latency bound `T_f` (in views).
    pub fn with_latency_bound(n: u32, t_f: u64) -> Result<Self, ParamsError> {
        if n < 4 || n % 3 != 1 {
            return Err(ParamsError::BadReplicaCount(n));
        }
        if t_f == 0 {
            return Err(ParamsError::BadLatencyBound);
        }
        let f = (n - 1) / 3;
        let t_z = t_f.div_ceil(u64::from(n)) * u64::from(n);
        let theta = THETA_FLOOR.max(10 * u64::from(n));
        Ok(Params {
            n,
            f,
            t_f,
            t_z,
            theta,
            alphas: Alphas::defaults(n),
        })
    }

    /// Override the normalization period. Must be at least `n`.
    pub fn with_theta(mut self, theta: u64) -> Result<Self, ParamsError> {
        if theta < u64::from(self.n) {
            return Err(ParamsError::BadTheta { theta, n: self.n });
        }
        self.theta = theta;
        Ok(self)
    }

    /// Override the per-rule increments. The normalization increment must be
    /// positive or candidate generation could loop forever on an all-zero
    /// matrix.
    pub fn with_alphas(mut self, alphas: Alphas) -> Result<Self, ParamsError> {
        if alphas.normalize <= 0 {
            return Err(ParamsError::BadAlphas);
        }
        self.alphas = alphas;
        Ok(self)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn f(&self) -> u32 {
        self.f
    }

    /// Quorum size `2f + 1`.
    pub fn quorum(&self) -> u32 {
        2 * self.f + 1
    }

    /// Assumed decision-latency bound, in views.
    pub fn latency_bound(&self) -> u64 {
        self.t_f
    }

    /// Sliding window core size `T_z = ceil(T_f / n) * n`.
    pub fn window_core(&self) -> u64 {
        self.t_z
    }

    /// Total leader-list length `T_z + 2n`.
    pub fn window_len(&self) -> u64 {
        self.t_z + 2 * u64::from(self.n)
    }

    /// Normalization period Θ, in views.
    pub fn theta(&self) -> u64 {
        self.theta
    }

    /// True when entering `v` triggers the periodic normalization rule.
    pub fn normalization_due(&self, v: View) -> bool {
        v.is_multiple_of(self.theta)
    }

    pub fn alphas(&self) -> &Alphas {
        &self.alphas
    }

    /// Leadership-eligibility threshold in score units: `|alpha_0|`.
    pub fn eligibility_units(&self) -> u64 {
        self.alphas.view_entry.unsigned_abs()
    }
}
