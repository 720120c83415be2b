//! Long-run plans for the incomplete-information strategy: a map from type
//! vectors to a target network (to be exploited forever) and a reward
//! network (a partial equilibrium network held during the transition phase),
//! plus the admissibility checks that make such a plan usable.

use super::GameError;
use crate::graph::{pair_count, pair_from_index, AgentId, Network};
use crate::payoff::{one_period_payoff, PayoffModel, PayoffParams, TypeVector};
use std::collections::BTreeMap;

/// Plan assigning to every realized type vector of a member set the target
/// network and the reward network.
#[derive(Debug, Clone)]
pub enum AdmissiblePlan {
    /// Star with a center of the designated type when at least two members
    /// carry it, otherwise a wheel over the members; the reward network
    /// equals the target (both are connected, so no singleton needs a
    /// separate reward).
    StarWheel { alpha_type: usize },
    /// Explicit tables keyed by the member type vector (members in ascending
    /// order). Only defined for the full population.
    Explicit { entries: BTreeMap<Vec<usize>, (Network, Network)> },
}

impl AdmissiblePlan {
    /// Target and reward networks on `n` agents for the given members with
    /// the given types (`member_types[k]` is the type of `members[k]`).
    /// `None` when the plan does not cover this member set.
    pub fn nets_for(
        &self,
        n: usize,
        members: &[AgentId],
        member_types: &[usize],
    ) -> Option<(Network, Network)> {
        debug_assert_eq!(members.len(), member_types.len());
        match self {
            AdmissiblePlan::StarWheel { alpha_type } => {
                let alphas: Vec<AgentId> = members
                    .iter()
                    .zip(member_types)
                    .filter(|(_, &t)| t == *alpha_type)
                    .map(|(&m, _)| m)
                    .collect();
                let g = if alphas.len() >= 2 {
                    let center = alphas[0];
                    let mut g = Network::empty(n);
                    for &m in members {
                        if m != center {
                            g.add_link(center, m);
                        }
                    }
                    g
                } else {
                    // wheel over the members in index order
                    let mut g = Network::empty(n);
                    if members.len() >= 2 {
                        for w in members.windows(2) {
                            g.add_link(w[0], w[1]);
                        }
                        if members.len() > 2 {
                            g.add_link(members[members.len() - 1], members[0]);
                        }
                    }
                    g
                };
                Some((g.clone(), g))
            }
            AdmissiblePlan::Explicit { entries } => {
                if members.len() != n || members.iter().enumerate().any(|(k, &m)| k != m) {
                    return None;
                }
                entries.get(member_types).cloned()
            }
        }
    }
}

/// A network is a partial equilibrium for the agent set when every agent in
/// the set earns a strictly positive payoff and no single-link severance by
/// one of them raises her one-period payoff.
pub fn is_partial_equilibrium(
    g: &Network,
    subset: &[AgentId],
    tv: &TypeVector,
    model: &PayoffModel,
) -> Result<bool, GameError> {
    for &i in subset {
        let u = one_period_payoff(model, tv, g, i)?;
        if !(u > 0.0) {
            return Ok(false);
        }
        let neighbors: Vec<usize> = g.neighbors(i).collect();
        for j in neighbors {
            let mut h = g.clone();
            h.remove_link(i, j);
            if one_period_payoff(model, tv, &h, i)? > u {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityViolation {
    pub member_types: Vec<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub counterexample: Option<AdmissibilityViolation>,
}

pub const ADMISSIBILITY_EXHAUSTIVE_LIMIT: usize = 8;

/// Verify a plan for a member set: for every type vector, (1) every
/// non-singleton in the target network earns a positive payoff, and (2) the
/// reward network is a partial equilibrium for the target's singletons.
/// Exhaustive over `num_types ^ |members|` assignments; members sets larger
/// than eight are rejected.
pub fn check_admissible(
    plan: &AdmissiblePlan,
    n: usize,
    members: &[AgentId],
    num_types: usize,
    params: &PayoffParams,
) -> Result<AdmissibilityReport, GameError> {
    if members.len() > ADMISSIBILITY_EXHAUSTIVE_LIMIT {
        return Err(GameError::SizeLimit {
            n: members.len(),
            max: ADMISSIBILITY_EXHAUSTIVE_LIMIT,
        });
    }
    let model = PayoffModel::connections(params.clone());
    let k = members.len();
    let mut assignment = vec![0usize; k];
    loop {
        if let Some(violation) = check_one_assignment(plan, n, members, &assignment, &model)? {
            return Ok(AdmissibilityReport { admissible: false, counterexample: Some(violation) });
        }
        // odometer over type assignments
        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(AdmissibilityReport { admissible: true, counterexample: None });
            }
            assignment[pos] += 1;
            if assignment[pos] < num_types {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}

fn check_one_assignment(
    plan: &AdmissiblePlan,
    n: usize,
    members: &[AgentId],
    member_types: &[usize],
    model: &PayoffModel,
) -> Result<Option<AdmissibilityViolation>, GameError> {
    let mut full_types = vec![0usize; n];
    let num_types = member_types.iter().max().copied().unwrap_or(0) + 1;
    for (&m, &t) in members.iter().zip(member_types) {
        full_types[m] = t;
    }
    let tv = TypeVector::new(full_types, num_types).map_err(GameError::Payoff)?;
    let Some((target, reward)) = plan.nets_for(n, members, member_types) else {
        return Ok(Some(AdmissibilityViolation {
            member_types: member_types.to_vec(),
            reason: "plan undefined for this member set".into(),
        }));
    };
    let mut singletons = Vec::new();
    for &m in members {
        if target.degree(m) == 0 {
            singletons.push(m);
        } else {
            let u = one_period_payoff(model, &tv, &target, m)?;
            if !(u > 0.0) {
                return Ok(Some(AdmissibilityViolation {
                    member_types: member_types.to_vec(),
                    reason: format!("non-singleton agent {m} earns {u} in the target network"),
                }));
            }
        }
    }
    if !singletons.is_empty()
        && !is_partial_equilibrium(&reward, &singletons, &tv, model)?
    {
        return Ok(Some(AdmissibilityViolation {
            member_types: member_types.to_vec(),
            reason: format!("reward network is not a partial equilibrium for {singletons:?}"),
        }));
    }
    Ok(None)
}

pub const ADMISSIBLE_SET_MAX_AGENTS: usize = 5;

/// Does the whole population admit *some* plan? For every type vector there
/// must exist a target network whose connected agents all profit, paired
/// with a partial equilibrium network for its singletons. Exhaustive over
/// networks; populations up to five.
pub fn agent_set_admissible(
    n: usize,
    num_types: usize,
    params: &PayoffParams,
) -> Result<bool, GameError> {
    if n > ADMISSIBLE_SET_MAX_AGENTS {
        return Err(GameError::SizeLimit { n, max: ADMISSIBLE_SET_MAX_AGENTS });
    }
    let model = PayoffModel::connections(params.clone());
    let pc = pair_count(n);
    let mut assignment = vec![0usize; n];
    loop {
        let tv = TypeVector::new(assignment.clone(), num_types).map_err(GameError::Payoff)?;
        // per-network per-agent payoffs for this assignment
        let mut payoffs = vec![0.0f64; (1 << pc) * n];
        let mut nets = Vec::with_capacity(1 << pc);
        for mask in 0..(1u64 << pc) {
            let g = Network::from_mask(n, mask);
            for i in 0..n {
                payoffs[(mask as usize) * n + i] = one_period_payoff(&model, &tv, &g, i)?;
            }
            nets.push(g);
        }
        // reward candidates: agents for which each network is a local optimum
        let mut fine: Vec<u64> = vec![0; 1 << pc];
        for mask in 0..(1usize << pc) {
            let mut ok = 0u64;
            for i in 0..n {
                let u = payoffs[mask * n + i];
                if !(u > 0.0) {
                    continue;
                }
                let mut best = true;
                for p in 0..pc {
                    if mask >> p & 1 == 1 {
                        let (a, b) = pair_from_index(n, p);
                        if a == i || b == i {
                            let without = mask & !(1 << p);
                            if payoffs[without * n + i] > u {
                                best = false;
                                break;
                            }
                        }
                    }
                }
                if best {
                    ok |= 1 << i;
                }
            }
            fine[mask] = ok;
        }
        let mut found = false;
        'target: for mask in 0..(1usize << pc) {
            let mut singleton_mask = 0u64;
            for i in 0..n {
                if nets[mask].degree(i) == 0 {
                    singleton_mask |= 1 << i;
                } else if !(payoffs[mask * n + i] > 0.0) {
                    continue 'target;
                }
            }
            if singleton_mask == 0 {
                found = true;
                break;
            }
            for &f in &fine {
                if singleton_mask & !f == 0 {
                    found = true;
                    break 'target;
                }
            }
        }
        if !found {
            return Ok(false);
        }
        // next type assignment
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(true);
            }
            assignment[pos] += 1;
            if assignment[pos] < num_types {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}
