//! Automaton strategies driven by the public signal. Actions toward a pair
//! that is neither linked nor selected are forced to zero.

use super::monitor::{CpPhase, IcPhase, IcState};
use crate::graph::Network;

/// Per-pair action context: whether the pair was selected this period and
/// whether the link currently exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionContext {
    pub selected: bool,
    pub linked: bool,
}

impl ActionContext {
    /// A nonzero action is admissible only when the pair is selected or linked.
    pub fn admissible(self) -> bool {
        self.selected || self.linked
    }
}

/// Grim-style cooperation strategy toward a fixed target network: consent
/// exactly when the pair belongs to the target, the signal shows the
/// cooperation phase, and acting on the pair is possible.
pub fn strategy_sc(target: &Network, phase: CpPhase, ctx: ActionContext, pair: (usize, usize)) -> bool {
    ctx.admissible() && phase.is_cooperation() && target.has_link(pair.0, pair.1)
}

/// Incomplete-information strategy. `plan_admissible` reports whether the
/// plan is admissible for the current non-solitary set; when it is not, the
/// strategy prescribes zero everywhere. `reward_net`/`target_net` are the
/// plan networks for the current non-solitary set.
pub fn strategy_sic(
    state: &IcState,
    plan_admissible: bool,
    reward_net: &Network,
    target_net: &Network,
    ctx: ActionContext,
    pair: (usize, usize),
) -> bool {
    if !ctx.admissible() || !plan_admissible {
        return false;
    }
    let (i, j) = pair;
    if !state.is_member(i) || !state.is_member(j) {
        return false;
    }
    match state.phase {
        IcPhase::X0 => true,
        IcPhase::X1 | IcPhase::Transition => reward_net.has_link(i, j),
        IcPhase::ExploitCoop => target_net.has_link(i, j),
        IcPhase::ExploitPunish => false,
    }
}
