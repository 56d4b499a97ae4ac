use std::collections::VecDeque;

use thiserror::Error;

use crate::certificate::LeaderCertificate;
use crate::params::Params;
use crate::target::initial_leader;
use crate::{ReplicaId, View};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WindowError {
    #[error("view {view} not covered by window [{base}, {end}]")]
    OutOfWindow { view: View, base: View, end: View },
    #[error("completed view {got} is not the window base {base}")]
    OutOfOrderCompletion { got: View, base: View },
}

/// Leader bookkeeping for one view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeaderSlot {
    pub view: View,
    pub initial_leader: ReplicaId,
    pub elected_leader: Option<ReplicaId>,
}

/// Sliding window of `T_z + 2n` leader slots covering
/// `[base_view, base_view + T_z + 2n - 1]`.
///
/// The slots with a settled elected leader always form a prefix of the
/// window: election results land via [`LeaderList::apply_certificate`], which
/// back-fills any gap below its target with initial leaders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeaderList {
    n: u32,
    base_view: View,
    slots: VecDeque<LeaderSlot>,
}

impl LeaderList {
    /// Window at system start: base view 1, views `1 ..= T_z + n` elected to
    /// their initial leaders, the remaining `n` slots unelected.
    pub fn bootstrap(params: &Params) -> Self {
        let n = params.n();
        let prefix = params.window_core() + u64::from(n);
        let slots = (1..=params.window_len())
            .map(|view| LeaderSlot {
                view,
                initial_leader: initial_leader(view, n),
                elected_leader: (view <= prefix).then(|| initial_leader(view, n)),
            })
            .collect();
        let list = LeaderList {
            n,
            base_view: 1,
            slots,
        };
        debug_assert!(list.prefix_filled());
        list
    }

    pub fn base_view(&self) -> View {
        self.base_view
    }

    /// Highest covered view.
    pub fn end_view(&self) -> View {
        self.base_view + self.slots.len() as u64 - 1
    }

    pub fn covers(&self, view: View) -> bool {
        view >= self.base_view && view <= self.end_view()
    }

    pub fn slot(&self, view: View) -> Option<&LeaderSlot> {
        self.covers(view)
            .then(|| &self.slots[(view - self.base_view) as usize])
    }

    /// Elected leader of a covered view (`None` if not yet elected).
    ///
    /// Panics if `view` is outside the window.
    pub fn elected_leader(&self, view: View) -> Option<ReplicaId> {
        self.slot(view)
            .unwrap_or_else(|| panic!("view {view} outside window"))
            .elected_leader
    }

    /// The leader a replica acts on for `view`: a proven claim outranks the
    /// elected leader, which outranks the initial leader.
    ///
    /// Panics if `view` is outside the window.
    pub fn determine_leader(&self, view: View, proven_claim: Option<ReplicaId>) -> ReplicaId {
        let slot = self
            .slot(view)
            .unwrap_or_else(|| panic!("view {view} outside window"));
        proven_claim
            .or(slot.elected_leader)
            .unwrap_or(slot.initial_leader)
    }

    /// Record an election outcome: the target slot takes the certificate's
    /// elected leader (its initial leader when the election returned no
    /// winner), then any unelected views below the target are back-filled
    /// with their initial leaders.
    pub fn apply_certificate(&mut self, cert: &LeaderCertificate) -> Result<(), WindowError> {
        let target = cert.target_view;
        if !self.covers(target) {
            return Err(WindowError::OutOfWindow {
                view: target,
                base: self.base_view,
                end: self.end_view(),
            });
        }
        let idx = (target - self.base_view) as usize;
        self.slots[idx].elected_leader =
            Some(cert.elected.unwrap_or(self.slots[idx].initial_leader));
        for i in (0..idx).rev() {
            if self.slots[i].elected_leader.is_some() {
                break;
            }
            self.slots[i].elected_leader = Some(self.slots[i].initial_leader);
        }
        debug_assert!(self.prefix_filled());
        Ok(())
    }

    /// Slide the window past a completed view: drop its slot and append a
    /// fresh unelected slot for `completed + T_z + 2n`.
    pub fn advance_window(&mut self, completed: View, params: &Params) -> Result<(), WindowError> {
        if completed != self.base_view {
            return Err(WindowError::OutOfOrderCompletion {
                got: completed,
                base: self.base_view,
            });
        }
        self.slots.pop_front();
        let new_view = completed + params.window_len();
        self.slots.push_back(LeaderSlot {
            view: new_view,
            initial_leader: initial_leader(new_view, self.n),
            elected_leader: None,
        });
        self.base_view += 1;
        debug_assert!(self.prefix_filled());
        Ok(())
    }

    /// True when the elected slots form a prefix of the window: no unelected
    /// view is followed by an elected one.
    pub fn prefix_filled(&self) -> bool {
        let mut gap_seen = false;
        for slot in &self.slots {
            match slot.elected_leader {
                None => gap_seen = true,
                Some(_) if gap_seen => return false,
                Some(_) => {}
            }
        }
        true
    }
}
