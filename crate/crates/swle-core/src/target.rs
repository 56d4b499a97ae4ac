use crate::params::Params;
use crate::{ReplicaId, View};

/// Round-robin initial leader of `view`: `view mod n`.
pub fn initial_leader(view: View, n: u32) -> ReplicaId {
    (view % u64::from(n)) as ReplicaId
}

/// The future view whose election the votes of view `v` settle.
///
/// Writing `v = nx + r` with `r` in `1..=n` and `a = x mod n`
/// (equivalently `a = floor((v-1)/n) mod n`):
///
/// * if `r + a <= n` (i.e. `v + a <= ceil(v/n) * n`): `v + n + T_z + a`
/// * otherwise:                                       `v + T_z + a`
///
/// Restricted to a source window `{nx+1, ..., n(x+1)}` this maps bijectively
/// onto the target window `{n(x+1)+1+T_z, ..., n(x+2)+T_z}`, so each view's
/// election is initiated exactly once, and the gap to the target always
/// satisfies `target - (v+1) >= T_z`.
///
/// Panics if `v < 1`; views are numbered from 1.
pub fn target_view(v: View, params: &Params) -> View {
    target_view_raw(v, params.n(), params.window_core())
}

/// [`target_view`] on raw `(n, T_z)` instead of [`Params`]; the formula does
/// not depend on `n` having the `3f + 1` shape.
pub fn target_view_raw(v: View, n: u32, t_z: u64) -> View {
    assert!(v >= 1, "views are numbered from 1");
    let n = u64::from(n);
    let a = ((v - 1) / n) % n;
    if v + a <= v.div_ceil(n) * n {
        v + n + t_z + a
    } else {
        v + t_z + a
    }
}
