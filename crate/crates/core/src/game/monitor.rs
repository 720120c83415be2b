//! Public-signal automata. The complete-information monitor emits a
//! cooperation or punishment phase against a fixed target network; the
//! incomplete-information monitor runs experimentation, transition, and
//! exploitation phases over a shrinking set of non-solitary agents.

use super::GameError;
use crate::graph::Network;

/// Complete-information monitor state: cooperation, or punishment with the
/// number of punishment signals already emitted (always below K).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpPhase {
    Cooperation,
    Punishment { elapsed: usize },
}

impl CpPhase {
    pub fn is_cooperation(self) -> bool {
        matches!(self, CpPhase::Cooperation)
    }

    pub fn label(self) -> &'static str {
        match self {
            CpPhase::Cooperation => "C",
            CpPhase::Punishment { .. } => "P",
        }
    }
}

/// One-step update of the cooperation/punishment automaton. Punishment lasts
/// exactly `k` signals and then resets to cooperation regardless of play.
pub fn monitor_update_cp(prev: CpPhase, detected_deviation: bool, k: usize) -> CpPhase {
    debug_assert!(k >= 1);
    match prev {
        CpPhase::Cooperation => {
            if detected_deviation {
                CpPhase::Punishment { elapsed: 0 }
            } else {
                CpPhase::Cooperation
            }
        }
        CpPhase::Punishment { elapsed } => {
            if elapsed + 1 >= k {
                CpPhase::Cooperation
            } else {
                CpPhase::Punishment { elapsed: elapsed + 1 }
            }
        }
    }
}

/// Deviation detection from observable consequences of one period: a link
/// outside the target is present, a target link that existed has vanished,
/// or the selected pair belongs to the target but its link is absent.
pub fn detect_deviation(
    target: &Network,
    g_prev: &Network,
    pair: (usize, usize),
    g_now: &Network,
) -> Result<bool, GameError> {
    let n = target.n();
    if g_prev.n() != n || g_now.n() != n {
        return Err(GameError::Consistency("network sizes disagree".into()));
    }
    // reachability: g_now may only differ from g_prev by removals plus the pair
    for i in 0..n {
        for (w, (&now, &prev)) in g_now.row(i).iter().zip(g_prev.row(i)).enumerate() {
            let mut appeared = now & !prev;
            while appeared != 0 {
                let j = w * 64 + appeared.trailing_zeros() as usize;
                appeared &= appeared - 1;
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                if (a, b) != (pair.0.min(pair.1), pair.0.max(pair.1)) {
                    return Err(GameError::Consistency(format!(
                        "link ({a}, {b}) appeared without being selected"
                    )));
                }
            }
        }
    }
    for i in 0..n {
        for (w, ((&now, &prev), &tgt)) in
            g_now.row(i).iter().zip(g_prev.row(i)).zip(target.row(i)).enumerate()
        {
            // a present link outside the target
            if now & !tgt != 0 {
                return Ok(true);
            }
            // a target link present yesterday and gone today
            if tgt & prev & !now != 0 {
                return Ok(true);
            }
            let _ = w;
        }
    }
    let (a, b) = pair;
    if target.has_link(a, b) && !g_now.has_link(a, b) {
        return Ok(true);
    }
    Ok(false)
}

/// Phases of the incomplete-information monitor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IcPhase {
    /// experimentation while types are still unknown
    X0,
    /// experimentation with complete information (no rule enters this state;
    /// it is handled for completeness)
    X1,
    /// transition: hold the reward network for J consecutive periods
    Transition,
    /// exploitation, cooperating on the long-run target
    ExploitCoop,
    /// exploitation, punishing for K periods
    ExploitPunish,
}

impl IcPhase {
    pub fn label(self) -> &'static str {
        match self {
            IcPhase::X0 => "X0",
            IcPhase::X1 => "X1",
            IcPhase::Transition => "T",
            IcPhase::ExploitCoop => "EC",
            IcPhase::ExploitPunish => "EP",
        }
    }
}

/// Incomplete-information monitor state: phase, the bitmask of non-solitary
/// agents, and the phase-local counter (transition matches or punishment
/// signals). The non-solitary set never grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IcState {
    pub phase: IcPhase,
    pub members: u64,
    pub counter: usize,
}

impl IcState {
    pub fn initial(n: usize) -> Self {
        assert!(n <= 64);
        let members = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        IcState { phase: IcPhase::X0, members, counter: 0 }
    }

    pub fn is_member(&self, i: usize) -> bool {
        self.members >> i & 1 == 1
    }

    pub fn member_count(&self) -> usize {
        self.members.count_ones() as usize
    }
}

/// Everything the incomplete-information monitor observes in one period.
/// `reward_net` and `target_net` are the plan's networks for the current
/// non-solitary set; `info_complete` reports whether every agent in a given
/// mask knows every other member's type after this period's updates.
pub struct IcPeriodContext<'a> {
    pub g_prev: &'a Network,
    pub g_now: &'a Network,
    pub pair: (usize, usize),
    pub reward_net: &'a Network,
    pub target_net: &'a Network,
    pub info_complete: &'a dyn Fn(u64) -> bool,
    pub j_transition: usize,
    pub k_punish: usize,
}

/// Members that failed to form or maintain a required link when it was
/// possible (the selected pair, or an existing link). Failures are charged
/// to both endpoints: the public history cannot identify which side refused.
fn failed_required(members: u64, required: &Network, ctx: &IcPeriodContext) -> u64 {
    let n = required.n();
    let mut failed = 0u64;
    for i in 0..n {
        if members >> i & 1 == 0 {
            continue;
        }
        for j in (i + 1)..n {
            if members >> j & 1 == 0 || !required.has_link(i, j) {
                continue;
            }
            let possible =
                ctx.g_prev.has_link(i, j) || (ctx.pair.0.min(ctx.pair.1), ctx.pair.0.max(ctx.pair.1)) == (i, j);
            if possible && !ctx.g_now.has_link(i, j) {
                failed |= 1 << i;
                failed |= 1 << j;
            }
        }
    }
    failed
}

/// Members holding a link that crosses the non-solitary boundary.
fn linked_outside(members: u64, g_now: &Network) -> u64 {
    let n = g_now.n();
    let mut out = 0u64;
    for i in 0..n {
        if members >> i & 1 == 0 {
            continue;
        }
        if g_now.neighbors(i).any(|j| members >> j & 1 == 0) {
            out |= 1 << i;
        }
    }
    out
}

/// Exact topology test: within the member set the realized network equals
/// `want`, and no member holds a link to the outside.
fn topology_matches(members: u64, g_now: &Network, want: &Network) -> bool {
    let n = g_now.n();
    for i in 0..n {
        let i_in = members >> i & 1 == 1;
        for j in (i + 1)..n {
            let j_in = members >> j & 1 == 1;
            if i_in && j_in {
                if g_now.has_link(i, j) != want.has_link(i, j) {
                    return false;
                }
            } else if (i_in || j_in) && g_now.has_link(i, j) {
                return false;
            }
        }
    }
    true
}

/// One-step update of the incomplete-information monitor.
pub fn monitor_update_ic(prev: &IcState, ctx: &IcPeriodContext) -> IcState {
    let members = prev.members;
    match prev.phase {
        IcPhase::X0 => {
            // the experimentation requirement is the clique on the members
            let clique = {
                let n = ctx.g_now.n();
                let mut g = Network::empty(n);
                for i in 0..n {
                    if members >> i & 1 == 0 {
                        continue;
                    }
                    for j in (i + 1)..n {
                        if members >> j & 1 == 1 {
                            g.add_link(i, j);
                        }
                    }
                }
                g
            };
            let remaining = members & !failed_required(members, &clique, ctx);
            if (ctx.info_complete)(remaining) {
                IcState { phase: IcPhase::Transition, members: remaining, counter: 0 }
            } else {
                IcState { phase: IcPhase::X0, members: remaining, counter: 0 }
            }
        }
        IcPhase::X1 => {
            let bad = failed_required(members, ctx.reward_net, ctx) | linked_outside(members, ctx.g_now);
            IcState { phase: IcPhase::Transition, members: members & !bad, counter: 0 }
        }
        IcPhase::Transition => {
            if topology_matches(members, ctx.g_now, ctx.reward_net) {
                let held = prev.counter + 1;
                if held >= ctx.j_transition {
                    IcState { phase: IcPhase::ExploitCoop, members, counter: 0 }
                } else {
                    IcState { phase: IcPhase::Transition, members, counter: held }
                }
            } else {
                let bad =
                    failed_required(members, ctx.reward_net, ctx) | linked_outside(members, ctx.g_now);
                IcState { phase: IcPhase::Transition, members: members & !bad, counter: 0 }
            }
        }
        IcPhase::ExploitCoop => {
            let bad = failed_required(members, ctx.target_net, ctx) | linked_outside(members, ctx.g_now);
            if bad == 0 {
                IcState { phase: IcPhase::ExploitCoop, members, counter: 0 }
            } else {
                IcState { phase: IcPhase::ExploitPunish, members, counter: 0 }
            }
        }
        IcPhase::ExploitPunish => {
            if prev.counter + 1 >= ctx.k_punish {
                IcState { phase: IcPhase::ExploitCoop, members, counter: 0 }
            } else {
                IcState { phase: IcPhase::ExploitPunish, members, counter: prev.counter + 1 }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cp_transitions() {
        let k = 3;
        assert_eq!(
            monitor_update_cp(CpPhase::Cooperation, true, k),
            CpPhase::Punishment { elapsed: 0 }
        );
        assert_eq!(monitor_update_cp(CpPhase::Cooperation, false, k), CpPhase::Cooperation);
        assert_eq!(
            monitor_update_cp(CpPhase::Punishment { elapsed: 0 }, true, k),
            CpPhase::Punishment { elapsed: 1 }
        );
        // after K consecutive punishment signals the phase resets
        assert_eq!(
            monitor_update_cp(CpPhase::Punishment { elapsed: k - 1 }, false, k),
            CpPhase::Cooperation
        );
    }

    #[test]
    fn detection_cases() {
        let target = Network::clique(3);
        let full = Network::clique(3);
        // target formed exactly, selected target pair consents
        assert!(!detect_deviation(&target, &full, (0, 1), &full).unwrap());
        // a target link present yesterday missing today
        let mut broken = full.clone();
        broken.remove_link(0, 2);
        assert!(detect_deviation(&target, &full, (0, 1), &broken).unwrap());
        // selected target pair fails to form
        let empty = Network::empty(3);
        assert!(detect_deviation(&target, &empty, (0, 1), &empty).unwrap());

        // non-target pair refusing to link is compliance
        let line_target = Network::from_links(3, &[(0, 1)]).unwrap();
        let g = Network::from_links(3, &[(0, 1)]).unwrap();
        assert!(!detect_deviation(&line_target, &g, (1, 2), &g).unwrap());
        // a present non-target link is a deviation
        let mut extra = g.clone();
        extra.add_link(1, 2);
        assert!(detect_deviation(&line_target, &g, (1, 2), &extra).unwrap());
    }

    #[test]
    fn detection_rejects_unreachable_transition() {
        let target = Network::clique(3);
        let empty = Network::empty(3);
        let mut g = Network::empty(3);
        g.add_link(0, 2);
        // link (0,2) cannot appear when the selected pair is (0,1)
        assert!(detect_deviation(&target, &empty, (0, 1), &g).is_err());
    }

    #[test]
    fn ic_initial_and_experimentation() {
        let st = IcState::initial(3);
        assert_eq!(st.phase, IcPhase::X0);
        assert_eq!(st.member_count(), 3);

        // all links formed and info complete: move to transition
        let empty = Network::empty(3);
        let mut now = Network::empty(3);
        now.add_link(0, 1);
        let reward = Network::clique(3);
        let complete = |_m: u64| true;
        let ctx = IcPeriodContext {
            g_prev: &empty,
            g_now: &now,
            pair: (0, 1),
            reward_net: &reward,
            target_net: &reward,
            info_complete: &complete,
            j_transition: 2,
            k_punish: 2,
        };
        let next = monitor_update_ic(&st, &ctx);
        assert_eq!(next.phase, IcPhase::Transition);
        assert_eq!(next.members, st.members);

        // info incomplete keeps the experimentation phase
        let incomplete = |_m: u64| false;
        let ctx = IcPeriodContext { info_complete: &incomplete, ..ctx };
        assert_eq!(monitor_update_ic(&st, &ctx).phase, IcPhase::X0);
    }

    #[test]
    fn ic_transition_counts_consecutive_matches() {
        let reward = Network::from_links(3, &[(0, 1), (1, 2)]).unwrap();
        let g = reward.clone();
        let complete = |_m: u64| true;
        let ctx = IcPeriodContext {
            g_prev: &g,
            g_now: &g,
            pair: (0, 1),
            reward_net: &reward,
            target_net: &reward,
            info_complete: &complete,
            j_transition: 2,
            k_punish: 2,
        };
        let st = IcState { phase: IcPhase::Transition, members: 0b111, counter: 0 };
        let st = monitor_update_ic(&st, &ctx);
        assert_eq!((st.phase, st.counter), (IcPhase::Transition, 1));
        let st = monitor_update_ic(&st, &ctx);
        assert_eq!(st.phase, IcPhase::ExploitCoop);
    }

    #[test]
    fn ic_exploitation_punishes_and_recovers() {
        let target = Network::from_links(3, &[(0, 1), (1, 2)]).unwrap();
        let mut broken = target.clone();
        broken.remove_link(0, 1);
        let complete = |_m: u64| true;
        let ctx = IcPeriodContext {
            g_prev: &target,
            g_now: &broken,
            pair: (0, 2),
            reward_net: &target,
            target_net: &target,
            info_complete: &complete,
            j_transition: 2,
            k_punish: 2,
        };
        let st = IcState { phase: IcPhase::ExploitCoop, members: 0b111, counter: 0 };
        let st = monitor_update_ic(&st, &ctx);
        assert_eq!(st.phase, IcPhase::ExploitPunish);
        // punishment lasts exactly k = 2 signals, then cooperation resumes
        let st = monitor_update_ic(&st, &ctx);
        assert_eq!((st.phase, st.counter), (IcPhase::ExploitPunish, 1));
        let st = monitor_update_ic(&st, &ctx);
        assert_eq!(st.phase, IcPhase::ExploitCoop);
    }

    #[test]
    fn ic_member_shrinkage_marks_both_endpoints() {
        // members {0,1,2}; required link (0,1) was possible and failed
        let reward = Network::from_links(3, &[(0, 1)]).unwrap();
        let prev = Network::from_links(3, &[(0, 1)]).unwrap();
        let now = Network::empty(3);
        let complete = |_m: u64| true;
        let ctx = IcPeriodContext {
            g_prev: &prev,
            g_now: &now,
            pair: (1, 2),
            reward_net: &reward,
            target_net: &reward,
            info_complete: &complete,
            j_transition: 5,
            k_punish: 2,
        };
        let st = IcState { phase: IcPhase::Transition, members: 0b111, counter: 1 };
        let next = monitor_update_ic(&st, &ctx);
        assert_eq!(next.members, 0b100);
        assert_eq!(next.counter, 0);
    }
}
