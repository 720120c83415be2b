//! Exact equilibrium certification on small populations: the joint
//! (network, monitor) chain induced by an automaton profile, discounted
//! state values by direct linear solve, the one-shot deviation oracle,
//! patience-threshold search, closed-form payoff bounds, and committed
//! group-deviation analysis.

use crate::graph::{pair_count, pair_from_index, Network};
use crate::payoff::{one_period_payoff, PayoffError, PayoffModel, TypeVector};
use thiserror::Error;

pub const CHAIN_MAX_AGENTS: usize = 4;
const DENSE_SOLVE_MAX_STATES: usize = 2600;
const MAX_CHAIN_STATES: usize = 300_000;

#[derive(Debug, Error, PartialEq)]
pub enum EquilibriumError {
    #[error("population {n} exceeds the exact-certification limit {max}")]
    SizeLimit { n: usize, max: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Payoff(#[from] PayoffError),
}

/// Pure automaton profile driving the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// Every agent cooperates toward the target under the
    /// cooperation/punishment monitor. With an empty target this is the
    /// all-zero profile.
    Cooperate,
    /// Agents in `members` (bitmask) commit to forming exactly `net_mask`
    /// regardless of the signal; everyone else cooperates toward the target.
    GroupCommit { members: u32, net_mask: u64 },
}

/// Joint chain over (network, monitor phase) states under a fixed profile.
/// Phase 0 is cooperation; phases 1..=K are punishment with elapsed counts
/// 0..K-1. Transitions are deterministic given the selected pair, so the
/// kernel is the uniform mixture of `pair_count` successor maps.
pub struct ChainModel {
    pub n: usize,
    pub k_punish: usize,
    pub target_mask: u64,
    pub profile: Profile,
    pair_cnt: usize,
    net_count: usize,
    /// successor state for every (state, pair)
    succ: Vec<u32>,
    /// one-period payoff of every (network, agent)
    payoff: Vec<f64>,
}

fn mask_has(mask: u64, n: usize, i: usize, j: usize) -> bool {
    mask >> crate::graph::pair_index(n, i, j) & 1 == 1
}

fn profile_action(
    profile: Profile,
    target_mask: u64,
    n: usize,
    i: usize,
    j: usize,
    net_mask: u64,
    cooperating: bool,
    pair: (usize, usize),
) -> bool {
    let admissible = mask_has(net_mask, n, i, j) || (i.min(j), i.max(j)) == pair;
    if !admissible {
        return false;
    }
    match profile {
        Profile::Cooperate => cooperating && mask_has(target_mask, n, i, j),
        Profile::GroupCommit { members, net_mask: committed } => {
            if members >> i & 1 == 1 {
                mask_has(committed, n, i, j)
            } else {
                cooperating && mask_has(target_mask, n, i, j)
            }
        }
    }
}

/// Network reached in one period, given everyone's profile actions and an
/// optional action override for a single deviating agent.
fn next_network(
    profile: Profile,
    target_mask: u64,
    n: usize,
    net_mask: u64,
    cooperating: bool,
    pair: (usize, usize),
    deviator: Option<(usize, u64)>, // (agent, action bits toward each partner)
) -> u64 {
    let act = |i: usize, j: usize| -> bool {
        if let Some((d, bits)) = deviator {
            if i == d {
                let admissible = mask_has(net_mask, n, i, j) || (i.min(j), i.max(j)) == pair;
                return admissible && bits >> j & 1 == 1;
            }
        }
        profile_action(profile, target_mask, n, i, j, net_mask, cooperating, pair)
    };
    let mut out = 0u64;
    let mut m = net_mask;
    while m != 0 {
        let idx = m.trailing_zeros() as usize;
        m &= m - 1;
        let (a, b) = pair_from_index(n, idx);
        if act(a, b) && act(b, a) {
            out |= 1 << idx;
        }
    }
    let pidx = crate::graph::pair_index(n, pair.0, pair.1);
    if net_mask >> pidx & 1 == 0 && act(pair.0, pair.1) && act(pair.1, pair.0) {
        out |= 1 << pidx;
    }
    out
}

/// Signal update on masks; mirrors the network-level detection rule.
fn next_phase(
    target_mask: u64,
    n: usize,
    k: usize,
    phase: usize,
    net_prev: u64,
    pair: (usize, usize),
    net_now: u64,
) -> usize {
    if phase == 0 {
        let pidx = crate::graph::pair_index(n, pair.0, pair.1);
        let pair_bit = 1u64 << pidx;
        let detected = (net_now & !target_mask) != 0
            || (target_mask & net_prev & !net_now) != 0
            || (target_mask & pair_bit != 0 && net_now & pair_bit == 0);
        if detected {
            1
        } else {
            0
        }
    } else if phase < k {
        phase + 1
    } else {
        0
    }
}

impl ChainModel {
    pub fn state_count(&self) -> usize {
        self.net_count * (self.k_punish + 1)
    }

    pub fn state_id(&self, net_mask: u64, phase: usize) -> usize {
        net_mask as usize * (self.k_punish + 1) + phase
    }

    pub fn state_of(&self, id: usize) -> (u64, usize) {
        ((id / (self.k_punish + 1)) as u64, id % (self.k_punish + 1))
    }

    pub fn pair_cnt(&self) -> usize {
        self.pair_cnt
    }

    pub fn successor(&self, state: usize, pair_idx: usize) -> usize {
        self.succ[state * self.pair_cnt + pair_idx] as usize
    }

    pub fn agent_payoff(&self, net_mask: u64, agent: usize) -> f64 {
        self.payoff[net_mask as usize * self.n + agent]
    }

    /// Explicit kernel row (for validation): transition probabilities out of
    /// a state, summing to one.
    pub fn kernel_row(&self, state: usize) -> Vec<(usize, f64)> {
        let p = 1.0 / self.pair_cnt as f64;
        let mut row: Vec<(usize, f64)> = Vec::new();
        for pi in 0..self.pair_cnt {
            let s = self.successor(state, pi);
            match row.iter_mut().find(|(t, _)| *t == s) {
                Some((_, w)) => *w += p,
                None => row.push((s, p)),
            }
        }
        row
    }
}

/// Enumerate the full joint chain for the profile. Populations up to four.
pub fn build_chain(
    target: &Network,
    tv: &TypeVector,
    model: &PayoffModel,
    k_punish: usize,
    profile: Profile,
) -> Result<ChainModel, EquilibriumError> {
    let n = target.n();
    if n > CHAIN_MAX_AGENTS {
        return Err(EquilibriumError::SizeLimit { n, max: CHAIN_MAX_AGENTS });
    }
    if k_punish < 1 {
        return Err(EquilibriumError::Argument("punishment length K must be at least 1".into()));
    }
    let pair_cnt = pair_count(n);
    let net_count = 1usize << pair_cnt;
    let states = net_count * (k_punish + 1);
    if states > MAX_CHAIN_STATES {
        return Err(EquilibriumError::Argument(format!(
            "chain would have {states} states; reduce K"
        )));
    }
    let target_mask = target.mask();
    let mut payoff = vec![0.0; net_count * n];
    for mask in 0..net_count as u64 {
        let g = Network::from_mask(n, mask);
        for agent in 0..n {
            payoff[mask as usize * n + agent] = one_period_payoff(model, tv, &g, agent)?;
        }
    }
    let mut succ = vec![0u32; states * pair_cnt];
    for net in 0..net_count as u64 {
        for phase in 0..=k_punish {
            let state = net as usize * (k_punish + 1) + phase;
            for pi in 0..pair_cnt {
                let pair = pair_from_index(n, pi);
                let cooperating = phase == 0;
                let net2 = next_network(profile, target_mask, n, net, cooperating, pair, None);
                let ph2 = next_phase(target_mask, n, k_punish, phase, net, pair, net2);
                succ[state * pair_cnt + pi] = (net2 as usize * (k_punish + 1) + ph2) as u32;
            }
        }
    }
    Ok(ChainModel { n, k_punish, target_mask, profile, pair_cnt, net_count, succ, payoff })
}

/// Discounted values of every (state, agent) under the chain's profile:
/// the solution of V = u + gamma * P V.
pub struct StateValues {
    pub gamma: f64,
    n: usize,
    k_plus_1: usize,
    v: Vec<f64>,
}

impl StateValues {
    pub fn value(&self, net_mask: u64, phase: usize, agent: usize) -> f64 {
        self.v[(net_mask as usize * self.k_plus_1 + phase) * self.n + agent]
    }
}

pub fn exact_values(chain: &ChainModel, gamma: f64) -> Result<StateValues, EquilibriumError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(EquilibriumError::Argument(format!("gamma {gamma} outside (0, 1)")));
    }
    let s_cnt = chain.state_count();
    let n = chain.n;
    let v = if s_cnt <= DENSE_SOLVE_MAX_STATES {
        dense_solve(chain, gamma)?
    } else {
        iterate_values(chain, gamma)?
    };
    // verify the fixed point to the promised residual
    let p = gamma / chain.pair_cnt as f64;
    let mut worst: f64 = 0.0;
    for state in 0..s_cnt {
        let (net, _) = chain.state_of(state);
        for agent in 0..n {
            let mut rhs = chain.agent_payoff(net, agent);
            for pi in 0..chain.pair_cnt {
                rhs += p * v[chain.successor(state, pi) * n + agent];
            }
            worst = worst.max((rhs - v[state * n + agent]).abs());
        }
    }
    if worst > 1e-10 * (1.0 + v.iter().fold(0.0f64, |a, &b| a.max(b.abs()))) {
        return Err(EquilibriumError::Numerical(format!("fixed-point residual {worst}")));
    }
    Ok(StateValues { gamma, n, k_plus_1: chain.k_punish + 1, v })
}

/// Dense LU solve of (I - gamma P) V = u. The matrix is strictly diagonally
/// dominant (row off-diagonal mass is gamma < 1), so no pivoting is needed.
fn dense_solve(chain: &ChainModel, gamma: f64) -> Result<Vec<f64>, EquilibriumError> {
    let s_cnt = chain.state_count();
    let n = chain.n;
    let p = gamma / chain.pair_cnt as f64;
    let mut a = vec![0.0f64; s_cnt * s_cnt];
    for state in 0..s_cnt {
        a[state * s_cnt + state] += 1.0;
        for pi in 0..chain.pair_cnt {
            a[state * s_cnt + chain.successor(state, pi)] -= p;
        }
    }
    // in-place LU factorization
    for col in 0..s_cnt {
        let pivot = a[col * s_cnt + col];
        if pivot.abs() < 1e-12 {
            return Err(EquilibriumError::Numerical("vanishing pivot".into()));
        }
        for row in (col + 1)..s_cnt {
            let factor = a[row * s_cnt + col] / pivot;
            if factor != 0.0 {
                a[row * s_cnt + col] = factor;
                for k in (col + 1)..s_cnt {
                    a[row * s_cnt + k] -= factor * a[col * s_cnt + k];
                }
            }
        }
    }
    let mut v = vec![0.0f64; s_cnt * n];
    let mut rhs = vec![0.0f64; s_cnt];
    for agent in 0..n {
        for state in 0..s_cnt {
            let (net, _) = chain.state_of(state);
            rhs[state] = chain.agent_payoff(net, agent);
        }
        // forward substitution with the stored multipliers
        for row in 1..s_cnt {
            let mut x = rhs[row];
            for col in 0..row {
                x -= a[row * s_cnt + col] * rhs[col];
            }
            rhs[row] = x;
        }
        // back substitution
        for row in (0..s_cnt).rev() {
            let mut x = rhs[row];
            for col in (row + 1)..s_cnt {
                x -= a[row * s_cnt + col] * rhs[col];
            }
            rhs[row] = x / a[row * s_cnt + row];
        }
        for state in 0..s_cnt {
            v[state * n + agent] = rhs[state];
        }
    }
    Ok(v)
}

/// Fixed-point iteration fallback for chains too large to solve densely.
/// Stops when the contraction guarantees the true error is below 1e-10.
fn iterate_values(chain: &ChainModel, gamma: f64) -> Result<Vec<f64>, EquilibriumError> {
    let s_cnt = chain.state_count();
    let n = chain.n;
    let p = gamma / chain.pair_cnt as f64;
    let mut v = vec![0.0f64; s_cnt * n];
    let mut next = vec![0.0f64; s_cnt * n];
    let tol = 1e-10 * (1.0 - gamma) / gamma;
    let cap = (1e7 / (1.0 - gamma)) as usize;
    for _ in 0..cap {
        let mut diff: f64 = 0.0;
        for state in 0..s_cnt {
            let (net, _) = chain.state_of(state);
            for agent in 0..n {
                let mut x = chain.agent_payoff(net, agent);
                for pi in 0..chain.pair_cnt {
                    x += p * v[chain.successor(state, pi) * n + agent];
                }
                diff = diff.max((x - v[state * n + agent]).abs());
                next[state * n + agent] = x;
            }
        }
        std::mem::swap(&mut v, &mut next);
        if diff <= tol {
            return Ok(v);
        }
    }
    Err(EquilibriumError::Numerical("value iteration did not converge".into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationWitness {
    pub net_mask: u64,
    pub phase: usize,
    pub pair: (usize, usize),
    pub agent: usize,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    pub max_gain: f64,
    pub witness: Option<DeviationWitness>,
}

impl DeviationReport {
    pub fn is_equilibrium(&self) -> bool {
        self.max_gain <= 0.0
    }
}

/// One-shot deviation oracle: at every state and selected pair, compare each
/// agent's prescribed continuation against every admissible single-period
/// action vector followed by reversion to the profile. A maximum gain of at
/// most zero certifies the profile as an equilibrium.
pub fn one_shot_deviation_gain(chain: &ChainModel, values: &StateValues) -> DeviationReport {
    let n = chain.n;
    let gamma = values.gamma;
    let mut best = f64::NEG_INFINITY;
    let mut witness = None;
    for state in 0..chain.state_count() {
        let (net, phase) = chain.state_of(state);
        let cooperating = phase == 0;
        for pi in 0..chain.pair_cnt {
            let pair = pair_from_index(n, pi);
            let presc_state = chain.successor(state, pi);
            let (presc_net, presc_phase) = chain.state_of(presc_state);
            for agent in 0..n {
                let presc_val = chain.agent_payoff(presc_net, agent)
                    + gamma * values.value(presc_net, presc_phase, agent);
                // free components: current neighbors plus the selected partner
                let mut free: Vec<usize> = Vec::with_capacity(n - 1);
                for j in 0..n {
                    if j == agent {
                        continue;
                    }
                    if mask_has(net, n, agent, j) || (agent.min(j), agent.max(j)) == pair {
                        free.push(j);
                    }
                }
                for alt in 0..(1u32 << free.len()) {
                    let mut bits = 0u64;
                    for (b, &j) in free.iter().enumerate() {
                        if alt >> b & 1 == 1 {
                            bits |= 1 << j;
                        }
                    }
                    let dev_net = next_network(
                        chain.profile,
                        chain.target_mask,
                        n,
                        net,
                        cooperating,
                        pair,
                        Some((agent, bits)),
                    );
                    let dev_phase =
                        next_phase(chain.target_mask, n, chain.k_punish, phase, net, pair, dev_net);
                    let dev_val = chain.agent_payoff(dev_net, agent)
                        + gamma * values.value(dev_net, dev_phase, agent);
                    let gain = dev_val - presc_val;
                    if gain > best {
                        best = gain;
                        witness = Some(DeviationWitness { net_mask: net, phase, pair, agent, gain });
                    }
                }
            }
        }
    }
    DeviationReport { max_gain: best, witness }
}

/// Convenience: the maximum one-shot deviation gain at a given discount.
pub fn deviation_gain_at(
    target: &Network,
    tv: &TypeVector,
    model: &PayoffModel,
    k_punish: usize,
    gamma: f64,
) -> Result<DeviationReport, EquilibriumError> {
    let chain = build_chain(target, tv, model, k_punish, Profile::Cooperate)?;
    let values = exact_values(&chain, gamma)?;
    Ok(one_shot_deviation_gain(&chain, &values))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdOutcome {
    /// the smallest discount sustaining the profile lies inside the bracket
    Interior { gamma_bar: f64, bracket: (f64, f64), verified: bool },
    /// no profitable deviation even at the lowest probe
    AlwaysEquilibrium { probe: f64 },
    /// profitable deviations persist at the highest probe
    NeverEquilibrium { probe: f64 },
}

pub const THRESHOLD_TOL: f64 = 1e-4;
const THRESHOLD_LO: f64 = 0.01;
const THRESHOLD_HI: f64 = 0.9999;

/// Bisection for the patience cutoff: the smallest discount at which no
/// one-shot deviation profits, located to within 1e-4 and verified by sign
/// checks on both sides.
pub fn threshold_gamma(
    target: &Network,
    tv: &TypeVector,
    model: &PayoffModel,
    k_punish: usize,
) -> Result<ThresholdOutcome, EquilibriumError> {
    let chain = build_chain(target, tv, model, k_punish, Profile::Cooperate)?;
    let gain = |gamma: f64| -> Result<f64, EquilibriumError> {
        let values = exact_values(&chain, gamma)?;
        Ok(one_shot_deviation_gain(&chain, &values).max_gain)
    };
    if gain(THRESHOLD_HI)? > 0.0 {
        return Ok(ThresholdOutcome::NeverEquilibrium { probe: THRESHOLD_HI });
    }
    if gain(THRESHOLD_LO)? <= 0.0 {
        return Ok(ThresholdOutcome::AlwaysEquilibrium { probe: THRESHOLD_LO });
    }
    let mut lo = THRESHOLD_LO; // gain > 0
    let mut hi = THRESHOLD_HI; // gain <= 0
    while hi - lo > THRESHOLD_TOL {
        let mid = 0.5 * (lo + hi);
        if gain(mid)? <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let above = (hi + THRESHOLD_TOL).min(0.999_95);
    let below = (hi - THRESHOLD_TOL).max(0.005);
    let verified = gain(above)? <= 0.0 && gain(below)? > 0.0;
    Ok(ThresholdOutcome::Interior { gamma_bar: hi, bracket: (lo, hi), verified })
}

/// Smallest punishment length K sustaining the profile at a fixed discount,
/// up to `k_cap`. Returns `None` when even `k_cap` fails.
pub fn min_k(
    target: &Network,
    tv: &TypeVector,
    model: &PayoffModel,
    gamma: f64,
    k_cap: usize,
) -> Result<Option<usize>, EquilibriumError> {
    let passes = |k: usize| -> Result<bool, EquilibriumError> {
        Ok(deviation_gain_at(target, tv, model, k, gamma)?.max_gain <= 0.0)
    };
    let mut hi = 1usize;
    loop {
        if passes(hi)? {
            break;
        }
        if hi >= k_cap {
            return Ok(None);
        }
        hi = (hi * 2).min(k_cap);
    }
    let mut lo = hi / 2; // fails (or 0)
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if mid == 0 {
            break;
        }
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Constants feeding the closed-form payoff bounds: the best one-period
/// deviation gain, the extreme one-period payoffs, the pair-coverage time
/// t*, and the gap bound A between the best and worst expected cooperative
/// payoffs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundComponents {
    pub v_bar: f64,
    pub w_min: f64,
    pub v_max: f64,
    pub gap_a: f64,
    pub t_star: u32,
    pub n: usize,
}

/// Smallest t with (N(N-1)/2)(1 - 2/(N(N-1)))^t < 1.
pub fn coverage_time(n: usize) -> u32 {
    let pairs = (n * (n - 1)) as f64 / 2.0;
    let q = 1.0 - 2.0 / (n * (n - 1)) as f64;
    let mut t = 1u32;
    while pairs * q.powi(t as i32) >= 1.0 {
        t += 1;
    }
    t
}

pub fn bound_components(
    tv: &TypeVector,
    model: &PayoffModel,
) -> Result<BoundComponents, EquilibriumError> {
    let n = tv.n();
    if n > CHAIN_MAX_AGENTS {
        return Err(EquilibriumError::SizeLimit { n, max: CHAIN_MAX_AGENTS });
    }
    let pc = pair_count(n);
    let mut w_min = f64::INFINITY;
    let mut v_max = f64::NEG_INFINITY;
    let mut payoffs = vec![0.0f64; (1 << pc) * n];
    for mask in 0..(1u64 << pc) {
        let g = Network::from_mask(n, mask);
        for agent in 0..n {
            let u = one_period_payoff(model, tv, &g, agent)?;
            payoffs[mask as usize * n + agent] = u;
            w_min = w_min.min(u);
            v_max = v_max.max(u);
        }
    }
    // best single-period gain over all admissible action changes: sever any
    // subset of own links and optionally form one new link
    let mut v_bar = 0.0f64;
    for mask in 0..(1u64 << pc) {
        for agent in 0..n {
            let u0 = payoffs[mask as usize * n + agent];
            let own: Vec<usize> = (0..pc)
                .filter(|&p| {
                    let (a, b) = pair_from_index(n, p);
                    mask >> p & 1 == 1 && (a == agent || b == agent)
                })
                .collect();
            for keep in 0..(1u32 << own.len()) {
                let mut m2 = mask;
                for (b, &p) in own.iter().enumerate() {
                    if keep >> b & 1 == 0 {
                        m2 &= !(1 << p);
                    }
                }
                // optionally add one new link at the agent
                let mut candidates = vec![m2];
                for j in 0..n {
                    if j != agent {
                        let p = crate::graph::pair_index(n, agent, j);
                        if mask >> p & 1 == 0 {
                            candidates.push(m2 | 1 << p);
                        }
                    }
                }
                for cand in candidates {
                    let gain = payoffs[cand as usize * n + agent] - u0;
                    v_bar = v_bar.max(gain);
                }
            }
        }
    }
    let t_star = coverage_time(n);
    let pairs = (n * (n - 1)) as f64 / 2.0;
    let q = 1.0 - 2.0 / (n * (n - 1)) as f64;
    let gap_a =
        (v_max - w_min) * ((t_star as f64 - 1.0) + pairs * q.powi(t_star as i32) / (1.0 - q));
    Ok(BoundComponents { v_bar, w_min, v_max, gap_a, t_star, n })
}

/// Lower bound on an agent's expected total payoff over `horizon` periods of
/// the cooperation phase starting from an arbitrary network (`None` means an
/// infinite horizon, evaluated by its closed form).
pub fn cooperative_payoff_lower_bound(
    gamma: f64,
    horizon: Option<usize>,
    w_min: f64,
    u_target: f64,
    n: usize,
) -> f64 {
    let t_star = coverage_time(n) as f64;
    let pairs = (n * (n - 1)) as f64 / 2.0;
    let q = 1.0 - 2.0 / (n * (n - 1)) as f64;
    match horizon {
        None => {
            w_min * (1.0 - gamma.powf(t_star)) / (1.0 - gamma)
                + gamma.powf(t_star - 1.0) * u_target / (1.0 - gamma)
                + pairs * gamma.powf(t_star - 1.0) * q.powf(t_star) * (w_min - u_target)
                    / (1.0 - gamma * q)
        }
        Some(m) => {
            let mut total = 0.0;
            let mut disc = 1.0;
            for t in 1..=m {
                let term = if (t as f64) < t_star {
                    w_min
                } else {
                    let p = (pairs * q.powi(t as i32)).min(1.0);
                    p * w_min + (1.0 - p) * u_target
                };
                total += disc * term;
                disc *= gamma;
            }
            total
        }
    }
}

/// Sufficient condition for no profitable one-shot deviation: for every
/// agent, the best deviation gain plus the post-punishment gap bound is
/// outweighed by the foregone cooperative payoffs during punishment.
pub fn bound_certifies_no_deviation(
    comps: &BoundComponents,
    target_payoffs: &[f64],
    gamma: f64,
    k_punish: usize,
) -> bool {
    target_payoffs.iter().all(|&u| {
        let mu = cooperative_payoff_lower_bound(gamma, Some(k_punish), comps.w_min, u, comps.n);
        comps.v_bar + gamma.powi(1 + k_punish as i32) * comps.gap_a - gamma * mu < 0.0
    })
}

/// Constants for the committed group-deviation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupDeviationBound {
    /// largest one-period payoff anywhere
    pub v_max: f64,
    /// best worst-off-member one-period gap over all candidate deviations
    /// (negative exactly when the target is core-stable)
    pub f_gap: f64,
    pub d_slack: f64,
    pub e_slack: f64,
}

pub fn group_deviation_bound(
    target: &Network,
    tv: &TypeVector,
    model: &PayoffModel,
) -> Result<GroupDeviationBound, EquilibriumError> {
    let n = target.n();
    if n > CHAIN_MAX_AGENTS {
        return Err(EquilibriumError::SizeLimit { n, max: CHAIN_MAX_AGENTS });
    }
    let comps = bound_components(tv, model)?;
    let base: Vec<f64> =
        (0..n).map(|i| one_period_payoff(model, tv, target, i)).collect::<Result<_, _>>()?;
    let mut f_gap = f64::NEG_INFINITY;
    for members in 1u32..((1 << n) - 1) {
        let group: Vec<usize> = (0..n).filter(|&i| members >> i & 1 == 1).collect();
        let k = group.len();
        let pc = pair_count(k.max(1));
        for sub in 0..(1u64 << pc) {
            let mut g = Network::empty(n);
            let mut m = sub;
            while m != 0 {
                let idx = m.trailing_zeros() as usize;
                m &= m - 1;
                let (a, b) = pair_from_index(k, idx);
                g.add_link(group[a], group[b]);
            }
            let mut worst = f64::INFINITY;
            for &i in &group {
                let diff = one_period_payoff(model, tv, &g, i)? - base[i];
                worst = worst.min(diff);
            }
            f_gap = f_gap.max(worst);
        }
    }
    let slack = (comps.v_max - comps.w_min)
        * ((comps.t_star as f64 - 1.0)
            + ((n * (n - 1)) as f64 / 2.0)
                * (1.0 - 2.0 / (n * (n - 1)) as f64).powi(comps.t_star as i32)
                / (2.0 / (n * (n - 1)) as f64));
    Ok(GroupDeviationBound { v_max: comps.v_max, f_gap, d_slack: slack, e_slack: slack })
}

/// The group-deviation margin D + E + K'V + gamma^K' F / (1 - gamma);
/// strictly negative means the deviation is unprofitable by the bound.
pub fn group_bound_margin(bound: &GroupDeviationBound, k_remaining: usize, gamma: f64) -> f64 {
    bound.d_slack
        + bound.e_slack
        + k_remaining as f64 * bound.v_max
        + gamma.powi(k_remaining as i32) * bound.f_gap / (1.0 - gamma)
}

/// Largest remaining-punishment horizon K' that the bound still rules out.
pub fn m_of_gamma(bound: &GroupDeviationBound, gamma: f64) -> Result<usize, EquilibriumError> {
    if !(bound.f_gap < 0.0) {
        return Err(EquilibriumError::Argument(
            "group-deviation bound requires a core-stable target (F < 0)".into(),
        ));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(EquilibriumError::Argument(format!("gamma {gamma} outside (0, 1)")));
    }
    if group_bound_margin(bound, 0, gamma) >= 0.0 {
        return Err(EquilibriumError::Argument(
            "discount too small: even an immediate deviation is not ruled out".into(),
        ));
    }
    let mut k = 0usize;
    while group_bound_margin(bound, k + 1, gamma) < 0.0 {
        k += 1;
        if k > 10_000_000 {
            return Err(EquilibriumError::Numerical("tolerated punishment grew without bound".into()));
        }
    }
    Ok(k)
}

#[derive(Debug, Clone)]
pub struct GroupDeviationOutcome {
    pub profitable: bool,
    pub worst_off: usize,
    pub worst_diff: f64,
    /// (agent, value when committing, value when complying)
    pub per_member: Vec<(usize, f64, f64)>,
    pub bound_margin: f64,
    pub bound_unprofitable: bool,
}

/// Exact evaluation of a committed network deviation by a proper subgroup,
/// starting from cooperation (`k_remaining` = 0, at the formed target) or
/// from a punishment phase with `k_remaining` periods left (empty network).
pub fn group_deviation_check(
    target: &Network,
    tv: &TypeVector,
    model: &PayoffModel,
    group: &[usize],
    g_hat: &Network,
    k_remaining: usize,
    gamma: f64,
    k_punish: usize,
) -> Result<GroupDeviationOutcome, EquilibriumError> {
    let n = target.n();
    if n > CHAIN_MAX_AGENTS {
        return Err(EquilibriumError::SizeLimit { n, max: CHAIN_MAX_AGENTS });
    }
    if group.is_empty() || group.len() >= n {
        return Err(EquilibriumError::Argument(
            "the deviating group must be a proper nonempty subgroup".into(),
        ));
    }
    let mut members = 0u32;
    for &i in group {
        if i >= n {
            return Err(EquilibriumError::Argument(format!("agent {i} out of range")));
        }
        members |= 1 << i;
    }
    for (a, b) in g_hat.links() {
        if members >> a & 1 == 0 || members >> b & 1 == 0 {
            return Err(EquilibriumError::Argument(format!(
                "deviation network has external link ({a}, {b})"
            )));
        }
    }
    if k_remaining > k_punish {
        return Err(EquilibriumError::Argument(
            "remaining punishment exceeds the punishment length".into(),
        ));
    }
    let commit = Profile::GroupCommit { members, net_mask: g_hat.mask() };
    let chain_commit = build_chain(target, tv, model, k_punish, commit)?;
    let chain_comply = build_chain(target, tv, model, k_punish, Profile::Cooperate)?;
    let vals_commit = exact_values(&chain_commit, gamma)?;
    let vals_comply = exact_values(&chain_comply, gamma)?;
    let (net0, phase0) = if k_remaining == 0 {
        (target.mask(), 0)
    } else {
        (0u64, k_punish - k_remaining + 1)
    };
    let mut per_member = Vec::with_capacity(group.len());
    let mut worst_off = group[0];
    let mut worst_diff = f64::INFINITY;
    let mut all_weak = true;
    let mut some_strict = false;
    for &i in group {
        let vc = vals_commit.value(net0, phase0, i);
        let vs = vals_comply.value(net0, phase0, i);
        let diff = vc - vs;
        if diff < worst_diff {
            worst_diff = diff;
            worst_off = i;
        }
        if diff < 0.0 {
            all_weak = false;
        }
        if diff > 0.0 {
            some_strict = true;
        }
        per_member.push((i, vc, vs));
    }
    let bound = group_deviation_bound(target, tv, model)?;
    let margin = group_bound_margin(&bound, k_remaining, gamma);
    Ok(GroupDeviationOutcome {
        profitable: all_weak && some_strict,
        worst_off,
        worst_diff,
        per_member,
        bound_margin: margin,
        bound_unprofitable: margin < 0.0,
    })
}

/// Patience thresholds across a grid of spatial discounts, under the same
/// benefits, cost, target, and punishment length.
pub fn gamma_of_delta(
    target: &Network,
    tv: &TypeVector,
    benefits: &[f64],
    cost: f64,
    deltas: &[f64],
    k_punish: usize,
) -> Vec<(f64, Result<ThresholdOutcome, EquilibriumError>)> {
    deltas
        .iter()
        .map(|&d| {
            let result = crate::payoff::PayoffParams::new(benefits.to_vec(), cost, d)
                .map_err(EquilibriumError::from)
                .and_then(|params| {
                    threshold_gamma(target, tv, &PayoffModel::connections(params), k_punish)
                });
            (d, result)
        })
        .collect()
}
