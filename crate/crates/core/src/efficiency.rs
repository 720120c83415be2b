//! Strongly efficient networks for the heterogeneous connections model:
//! closed-form two-type characterization, the general core-periphery
//! construction, brute-force oracles for small populations, maximum
//! attainable payoffs, core-stability analysis, and the positive-payoff
//! sustainability criterion sets.

use crate::graph::{pair_count, pair_from_index, AgentId, Network};
use crate::payoff::{
    one_period_payoff, total_welfare, PayoffError, PayoffModel, PayoffParams, TypeVector,
};
use serde::Serialize;
use std::collections::BTreeSet;
use thiserror::Error;

pub const BRUTE_FORCE_MAX_AGENTS: usize = 6;
pub const STABILITY_MAX_AGENTS: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum EfficiencyError {
    #[error("degenerate parameters: {0} holds with equality")]
    DegenerateParameters(String),
    #[error("population {n} exceeds the brute-force limit {max}")]
    SizeLimit { n: usize, max: usize },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("unsupported type counts: {0}")]
    UnsupportedCounts(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Payoff(#[from] PayoffError),
}

/// Two-type connections-model instance. Type alpha is the more valuable one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoTypeSpec {
    pub f_alpha: f64,
    pub f_beta: f64,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub cost: f64,
    pub delta: f64,
}

impl TwoTypeSpec {
    pub fn validate(&self) -> Result<(), EfficiencyError> {
        if !(self.f_alpha > self.f_beta && self.f_beta > 0.0) {
            return Err(EfficiencyError::InvalidSpec(
                "benefits must satisfy f(alpha) > f(beta) > 0".into(),
            ));
        }
        if !(self.cost > 0.0) || !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(EfficiencyError::InvalidSpec(
                "cost must be positive and delta inside (0, 1)".into(),
            ));
        }
        if self.n_alpha == 0 || self.n_beta == 0 {
            return Err(EfficiencyError::InvalidSpec("both type counts must be positive".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n_alpha + self.n_beta
    }

    /// Alpha agents occupy indices 0..n_alpha, beta agents the rest.
    pub fn type_vector(&self) -> TypeVector {
        TypeVector::from_counts(&[self.n_alpha, self.n_beta])
    }

    pub fn params(&self) -> Result<PayoffParams, EfficiencyError> {
        Ok(PayoffParams::new(vec![self.f_alpha, self.f_beta], self.cost, self.delta)?)
    }

    pub fn model(&self) -> Result<PayoffModel, EfficiencyError> {
        Ok(PayoffModel::connections(self.params()?))
    }
}

/// The seven two-type regimes of the efficient-network characterization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TwoTypeCase {
    /// (a) full clique over everyone
    FullClique,
    /// (b) alpha clique, every alpha-beta link, no beta-beta link
    AlphaCliqueAllBeta,
    /// (c) alpha clique, every beta tied to one common alpha hub
    AlphaCliqueBetaHub,
    /// (d) alpha clique only, betas isolated
    AlphaCliqueOnly,
    /// (e) star over everyone with an alpha center
    FullStar,
    /// (f) star over the alphas only (empty when there is a single alpha)
    AlphaStar,
    /// (g) empty network
    Empty,
}

impl TwoTypeCase {
    pub fn letter(self) -> char {
        match self {
            TwoTypeCase::FullClique => 'a',
            TwoTypeCase::AlphaCliqueAllBeta => 'b',
            TwoTypeCase::AlphaCliqueBetaHub => 'c',
            TwoTypeCase::AlphaCliqueOnly => 'd',
            TwoTypeCase::FullStar => 'e',
            TwoTypeCase::AlphaStar => 'f',
            TwoTypeCase::Empty => 'g',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EfficientCase {
    TwoType(TwoTypeCase),
    CorePeriphery,
}

impl EfficientCase {
    pub fn label(&self) -> String {
        match self {
            EfficientCase::TwoType(c) => c.letter().to_string(),
            EfficientCase::CorePeriphery => "core-periphery".into(),
        }
    }
}

/// Four-block partition of the agents in an efficient network: fully linked
/// core, periphery linked to all agents of designated core types, periphery
/// linked to a single core hub, and isolated agents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub core: Vec<AgentId>,
    pub periphery_one: Vec<AgentId>,
    pub periphery_two: Vec<AgentId>,
    pub singletons: Vec<AgentId>,
}

impl Partition {
    fn blocks_cover(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for &v in self
            .core
            .iter()
            .chain(&self.periphery_one)
            .chain(&self.periphery_two)
            .chain(&self.singletons)
        {
            if v >= n || seen[v] {
                return false;
            }
            seen[v] = true;
        }
        seen.iter().all(|&s| s)
    }
}

#[derive(Debug, Clone)]
pub struct EfficientResult {
    pub network: Network,
    pub case: EfficientCase,
    pub partition: Partition,
    pub welfare: f64,
}

fn strictly_greater(a: f64, b: f64, what: &str) -> Result<bool, EfficiencyError> {
    if a == b {
        return Err(EfficiencyError::DegenerateParameters(what.to_string()));
    }
    Ok(a > b)
}

/// Closed-form strongly efficient network for a two-type population.
///
/// Parameters must avoid every boundary equality of the case dispatch;
/// exact ties are rejected as degenerate rather than tie-broken.
pub fn efficient_two_type(spec: &TwoTypeSpec) -> Result<EfficientResult, EfficiencyError> {
    spec.validate()?;
    let fa = spec.f_alpha;
    let fb = spec.f_beta;
    let c = spec.cost;
    let d = spec.delta;
    let na = spec.n_alpha;
    let nb = spec.n_beta;
    let naf = na as f64;
    let nbf = nb as f64;
    let n = spec.n();

    // dispatch quantities
    let link_bb = (1.0 - d) * fb;
    let link_ab = (1.0 - d) * (fa + fb) / 2.0;
    let link_aa = (1.0 - d) * fa;
    // average contribution of a beta agent attached to the alpha structure
    let beta_marginal = (1.0 + d * (naf - 1.0)) * fa + (1.0 + d * (naf + nbf - 2.0)) * fb;
    // per-link value of a star over the alphas only
    let alpha_star_per_link = fa * (2.0 + d * (naf - 2.0));
    // total welfare of the full star with an alpha center, in closed form
    let full_star_welfare = 2.0 * (naf - 1.0) * fa
        + nbf * (fa + fb)
        + d * ((naf - 1.0) * (naf - 2.0) * fa
            + nbf * (nbf - 1.0) * fb
            + nbf * (naf - 1.0) * (fa + fb))
        - 2.0 * (naf + nbf - 1.0) * c;

    let alphas: Vec<AgentId> = (0..na).collect();
    let betas: Vec<AgentId> = (na..n).collect();

    let (case, network, partition) = if strictly_greater(link_bb, c, "(1-delta) f(beta) vs c")? {
        (
            TwoTypeCase::FullClique,
            Network::clique(n),
            Partition {
                core: (0..n).collect(),
                periphery_one: vec![],
                periphery_two: vec![],
                singletons: vec![],
            },
        )
    } else if strictly_greater(link_ab, c, "(1-delta)(f(alpha)+f(beta))/2 vs c")? {
        let mut g = Network::empty(n);
        for i in 0..na {
            for j in (i + 1)..na {
                g.add_link(i, j);
            }
        }
        for &a in &alphas {
            for &b in &betas {
                g.add_link(a, b);
            }
        }
        (
            TwoTypeCase::AlphaCliqueAllBeta,
            g,
            Partition {
                core: alphas.clone(),
                periphery_one: betas.clone(),
                periphery_two: vec![],
                singletons: vec![],
            },
        )
    } else if strictly_greater(link_aa, c, "(1-delta) f(alpha) vs c")? {
        if strictly_greater(beta_marginal, 2.0 * c, "beta attachment value vs 2c")? {
            let mut g = Network::empty(n);
            for i in 0..na {
                for j in (i + 1)..na {
                    g.add_link(i, j);
                }
            }
            for &b in &betas {
                g.add_link(0, b);
            }
            (
                TwoTypeCase::AlphaCliqueBetaHub,
                g,
                Partition {
                    core: alphas.clone(),
                    periphery_one: vec![],
                    periphery_two: betas.clone(),
                    singletons: vec![],
                },
            )
        } else {
            let mut g = Network::empty(n);
            for i in 0..na {
                for j in (i + 1)..na {
                    g.add_link(i, j);
                }
            }
            (
                TwoTypeCase::AlphaCliqueOnly,
                g,
                Partition {
                    core: alphas.clone(),
                    periphery_one: vec![],
                    periphery_two: vec![],
                    singletons: betas.clone(),
                },
            )
        }
    } else {
        // low-value regime: full star, alpha-only star, or empty
        if strictly_greater(beta_marginal, 2.0 * c, "beta attachment value vs 2c")? {
            if strictly_greater(full_star_welfare, 0.0, "full-star welfare vs 0")? {
                (
                    TwoTypeCase::FullStar,
                    Network::star(n, 0),
                    Partition {
                        core: vec![0],
                        periphery_one: vec![],
                        periphery_two: (1..n).collect(),
                        singletons: vec![],
                    },
                )
            } else {
                if !(alpha_star_per_link < 2.0 * c) && na >= 2 {
                    return Err(EfficiencyError::Internal(
                        "case dispatch reached an inconsistent star regime".into(),
                    ));
                }
                (
                    TwoTypeCase::Empty,
                    Network::empty(n),
                    Partition {
                        core: vec![],
                        periphery_one: vec![],
                        periphery_two: vec![],
                        singletons: (0..n).collect(),
                    },
                )
            }
        } else if strictly_greater(alpha_star_per_link, 2.0 * c, "alpha-star per-link value vs 2c")? {
            if na == 1 {
                // a star over a single alpha has no links
                (
                    TwoTypeCase::AlphaStar,
                    Network::empty(n),
                    Partition {
                        core: vec![],
                        periphery_one: vec![],
                        periphery_two: vec![],
                        singletons: (0..n).collect(),
                    },
                )
            } else {
                let mut g = Network::empty(n);
                for a in 1..na {
                    g.add_link(0, a);
                }
                (
                    TwoTypeCase::AlphaStar,
                    g,
                    Partition {
                        core: vec![0],
                        periphery_one: vec![],
                        periphery_two: (1..na).collect(),
                        singletons: betas.clone(),
                    },
                )
            }
        } else {
            if full_star_welfare >= 0.0 && na >= 2 {
                return Err(EfficiencyError::Internal(
                    "case dispatch reached an inconsistent empty regime".into(),
                ));
            }
            (
                TwoTypeCase::Empty,
                Network::empty(n),
                Partition {
                    core: vec![],
                    periphery_one: vec![],
                    periphery_two: vec![],
                    singletons: (0..n).collect(),
                },
            )
        }
    };

    debug_assert!(partition.blocks_cover(n));
    let welfare = total_welfare(&spec.model()?, &spec.type_vector(), &network)?;
    Ok(EfficientResult { network, case: EfficientCase::TwoType(case), partition, welfare })
}

const MAX_TYPE_SET: usize = 12;

struct Candidate {
    network: Network,
    partition: Partition,
    welfare: f64,
}

/// Strongly efficient network for an arbitrary finite type set, built as the
/// best member of the core-periphery family: a fully linked core of
/// high-benefit types, a periphery linked to every agent of the core types
/// that pass the pairwise link-value test, a second periphery tied to a
/// single core hub (the lowest-index core agent), isolated low types, plus
/// single-hub star variants. Welfare of each candidate is evaluated exactly
/// through one representative per symmetry class.
pub fn efficient_core_periphery(
    tv: &TypeVector,
    params: &PayoffParams,
) -> Result<EfficientResult, EfficiencyError> {
    let n = tv.n();
    let t_count = tv.num_types();
    if t_count > MAX_TYPE_SET {
        return Err(EfficiencyError::SizeLimit { n: t_count, max: MAX_TYPE_SET });
    }
    if params.benefits().len() < t_count {
        return Err(EfficiencyError::InvalidSpec("benefit table smaller than type set".into()));
    }
    let model = PayoffModel::connections(params.clone());
    let c = params.cost();
    let d = params.delta();

    // boundary guard: any pairwise link-value tie makes the family ambiguous
    for s in 0..t_count {
        for t in s..t_count {
            let v = (1.0 - d) * (params.benefit_of(s) + params.benefit_of(t)) / 2.0;
            if v == c {
                return Err(EfficiencyError::DegenerateParameters(format!(
                    "pairwise link value of types {s} and {t} vs c"
                )));
            }
        }
    }

    // type ids ordered by benefit, highest first
    let mut order: Vec<usize> = (0..t_count).collect();
    order.sort_by(|&a, &b| {
        params.benefit_of(b).partial_cmp(&params.benefit_of(a)).unwrap().then(a.cmp(&b))
    });
    let members_of = |t: usize| -> Vec<AgentId> {
        (0..n).filter(|&i| tv.type_of(i) == t).collect()
    };
    let pair_ok = |s: usize, t: usize| -> bool {
        (1.0 - d) * (params.benefit_of(s) + params.benefit_of(t)) / 2.0 > c
    };

    let mut candidates: Vec<Candidate> = Vec::new();
    let mut push_candidate = |network: Network, partition: Partition| -> Result<(), EfficiencyError> {
        if candidates.iter().any(|cand| cand.network == network) {
            return Ok(());
        }
        // symmetry classes: (block, type, hub?) — evaluate one representative each
        let mut welfare = 0.0;
        let mut groups: Vec<Vec<AgentId>> = Vec::new();
        let hub = partition.core.first().copied();
        for block in [&partition.core, &partition.periphery_one, &partition.periphery_two] {
            for t in 0..t_count {
                let mut class: Vec<AgentId> =
                    block.iter().copied().filter(|&i| tv.type_of(i) == t).collect();
                if let Some(h) = hub {
                    if let Some(pos) = class.iter().position(|&i| i == h) {
                        class.remove(pos);
                        groups.push(vec![h]);
                    }
                }
                if !class.is_empty() {
                    groups.push(class);
                }
            }
        }
        for class in groups {
            let rep = class[0];
            let u = one_period_payoff(&model, tv, &network, rep)?;
            welfare += class.len() as f64 * u;
        }
        candidates.push(Candidate { network, partition, welfare });
        Ok(())
    };

    // empty network
    push_candidate(
        Network::empty(n),
        Partition {
            core: vec![],
            periphery_one: vec![],
            periphery_two: vec![],
            singletons: (0..n).collect(),
        },
    )?;

    // cutoff family over the benefit-ordered types
    for k_core in 1..=t_count {
        for k_p1 in k_core..=t_count {
            for k_p2 in k_p1..=t_count {
                let core_types = &order[..k_core];
                let p1_types = &order[k_core..k_p1];
                let p2_types = &order[k_p1..k_p2];
                let core: Vec<AgentId> = {
                    let mut v: Vec<AgentId> = core_types
                        .iter()
                        .flat_map(|&t| members_of(t))
                        .collect();
                    v.sort_unstable();
                    v
                };
                if core.is_empty() {
                    continue;
                }
                // designated core types for each periphery-one type
                let mut designated: Vec<Vec<usize>> = Vec::new();
                let mut p1_valid = true;
                for &t in p1_types {
                    let des: Vec<usize> =
                        core_types.iter().copied().filter(|&s| pair_ok(s, t)).collect();
                    if des.is_empty() {
                        p1_valid = false;
                        break;
                    }
                    designated.push(des);
                }
                if !p1_valid {
                    continue;
                }
                let hub = core[0];
                let mut g = Network::empty(n);
                for (ai, &a) in core.iter().enumerate() {
                    for &b in &core[ai + 1..] {
                        g.add_link(a, b);
                    }
                }
                let mut periphery_one = Vec::new();
                for (ti, &t) in p1_types.iter().enumerate() {
                    for i in members_of(t) {
                        periphery_one.push(i);
                        for &s in &designated[ti] {
                            for j in members_of(s) {
                                g.add_link(i, j);
                            }
                        }
                    }
                }
                let mut periphery_two = Vec::new();
                for &t in p2_types {
                    for i in members_of(t) {
                        periphery_two.push(i);
                        g.add_link(i, hub);
                    }
                }
                periphery_one.sort_unstable();
                periphery_two.sort_unstable();
                let singletons: Vec<AgentId> = (0..n)
                    .filter(|&i| {
                        !core.contains(&i)
                            && !periphery_one.contains(&i)
                            && !periphery_two.contains(&i)
                    })
                    .collect();
                push_candidate(g, Partition { core, periphery_one, periphery_two, singletons })?;
            }
        }
    }

    // single-hub stars: hub of each type, leaves drawn from a benefit prefix
    for &h_type in &order {
        let hub_members = members_of(h_type);
        let Some(&hub) = hub_members.first() else { continue };
        for l in 1..=t_count {
            let leaf_types = &order[..l];
            let mut g = Network::empty(n);
            let mut leaves = Vec::new();
            for &t in leaf_types {
                for i in members_of(t) {
                    if i != hub {
                        g.add_link(hub, i);
                        leaves.push(i);
                    }
                }
            }
            if leaves.is_empty() {
                continue;
            }
            leaves.sort_unstable();
            let singletons: Vec<AgentId> =
                (0..n).filter(|&i| i != hub && !leaves.contains(&i)).collect();
            push_candidate(
                g,
                Partition {
                    core: vec![hub],
                    periphery_one: vec![],
                    periphery_two: leaves,
                    singletons,
                },
            )?;
        }
    }

    let best_idx = candidates
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.welfare.partial_cmp(&b.welfare).unwrap())
        .map(|(i, _)| i)
        .ok_or_else(|| EfficiencyError::Internal("no candidates generated".into()))?;
    for (i, cand) in candidates.iter().enumerate() {
        if i != best_idx && cand.welfare == candidates[best_idx].welfare {
            return Err(EfficiencyError::DegenerateParameters(
                "two distinct candidate networks tie in welfare".into(),
            ));
        }
    }
    let best = candidates.swap_remove(best_idx);
    debug_assert!(best.partition.blocks_cover(n));
    let welfare = total_welfare(&model, tv, &best.network)?;
    Ok(EfficientResult {
        network: best.network,
        case: EfficientCase::CorePeriphery,
        partition: best.partition,
        welfare,
    })
}

/// Canonical link mask of `g` under type-preserving relabelings: the minimum
/// mask over all permutations of agents that fix the type assignment.
pub fn canonical_mask(g: &Network, tv: &TypeVector) -> u64 {
    let n = g.n();
    assert!(pair_count(n) <= 64);
    let mask = g.mask();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = u64::MAX;
    // Heap's algorithm over all permutations; type-mismatched ones are skipped
    let mut c = vec![0usize; n];
    let mut consider = |perm: &[usize]| {
        for (i, &p) in perm.iter().enumerate() {
            if tv.type_of(i) != tv.type_of(p) {
                return;
            }
        }
        let mut out = 0u64;
        let mut m = mask;
        while m != 0 {
            let idx = m.trailing_zeros() as usize;
            m &= m - 1;
            let (a, b) = pair_from_index(n, idx);
            out |= 1 << crate::graph::pair_index(n, perm[a], perm[b]);
        }
        if out < best {
            best = out;
        }
    };
    consider(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            consider(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct BruteForceResult {
    pub max_welfare: f64,
    /// Canonical representatives of every welfare-maximizing network.
    pub maximizers: Vec<Network>,
}

impl BruteForceResult {
    pub fn contains(&self, g: &Network, tv: &TypeVector) -> bool {
        let key = canonical_mask(g, tv);
        self.maximizers.iter().any(|m| m.mask() == key)
    }
}

/// Exhaustive search for welfare-maximizing networks; populations up to six.
pub fn brute_force_efficient(
    tv: &TypeVector,
    model: &PayoffModel,
) -> Result<BruteForceResult, EfficiencyError> {
    let n = tv.n();
    if n > BRUTE_FORCE_MAX_AGENTS {
        return Err(EfficiencyError::SizeLimit { n, max: BRUTE_FORCE_MAX_AGENTS });
    }
    let pc = pair_count(n);
    let mut best = f64::NEG_INFINITY;
    let mut arg: Vec<u64> = Vec::new();
    for net_mask in 0..(1u64 << pc) {
        let g = Network::from_mask(n, net_mask);
        let w = total_welfare(model, tv, &g)?;
        if w > best {
            best = w;
            arg.clear();
            arg.push(net_mask);
        } else if w == best {
            arg.push(net_mask);
        }
    }
    let canon: BTreeSet<u64> =
        arg.iter().map(|&m| canonical_mask(&Network::from_mask(n, m), tv)).collect();
    Ok(BruteForceResult {
        max_welfare: best,
        maximizers: canon.into_iter().map(|m| Network::from_mask(n, m)).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentType {
    Alpha,
    Beta,
}

/// Maximum one-period payoff an agent of the given type can obtain in any
/// network. Closed form over five parameter regimes; requires at least two
/// agents of each type so that every formula's reference partner exists.
///
/// The value is assembled from the same per-connection terms an actual
/// payoff evaluation would produce and combined with the exact accumulator,
/// so it matches a brute-force maximum bit for bit.
pub fn max_attainable_payoff(kind: AgentType, spec: &TwoTypeSpec) -> Result<f64, EfficiencyError> {
    spec.validate()?;
    if spec.n_alpha < 2 || spec.n_beta < 2 {
        return Err(EfficiencyError::UnsupportedCounts(
            "closed-form maximum payoffs need at least two agents of each type".into(),
        ));
    }
    let fa = spec.f_alpha;
    let fb = spec.f_beta;
    let c = spec.cost;
    let d = spec.delta;
    let na = spec.n_alpha;
    let nb = spec.n_beta;
    let naf = na as f64;
    let nbf = nb as f64;

    // (direct alphas, direct betas, distance-two alphas, distance-two betas)
    let value = |da: usize, db: usize, ia: usize, ib: usize| -> f64 {
        let deg = da + db;
        if deg == 0 {
            return 0.0;
        }
        let mut acc = crate::numeric::ExactSum::new();
        acc.add(-(deg as f64) * c);
        for _ in 0..da {
            acc.add(fa);
        }
        for _ in 0..db {
            acc.add(fb);
        }
        for _ in 0..ia {
            acc.add(d * fa);
        }
        for _ in 0..ib {
            acc.add(d * fb);
        }
        acc.value()
    };

    // best single link for each type: partner is an alpha centering everyone else
    let single_alpha = fa + d * ((naf - 2.0) * fa + nbf * fb);
    let single_beta = fa + d * ((naf - 1.0) * fa + (nbf - 1.0) * fb);

    if strictly_greater((1.0 - d) * fb, c, "(1-delta) f(beta) vs c")? {
        Ok(match kind {
            AgentType::Alpha => value(na - 1, nb, 0, 0),
            AgentType::Beta => value(na, nb - 1, 0, 0),
        })
    } else if strictly_greater((1.0 - d) * fa, c, "(1-delta) f(alpha) vs c")? {
        Ok(match kind {
            AgentType::Alpha => value(na - 1, 0, 0, nb),
            AgentType::Beta => value(na, 0, 0, nb - 1),
        })
    } else if strictly_greater(single_alpha, c, "best single alpha link vs c")? {
        Ok(match kind {
            AgentType::Alpha => value(1, 0, na - 2, nb),
            AgentType::Beta => value(1, 0, na - 1, nb - 1),
        })
    } else if strictly_greater(single_beta, c, "best single beta link vs c")? {
        Ok(match kind {
            AgentType::Alpha => 0.0,
            AgentType::Beta => value(1, 0, na - 1, nb - 1),
        })
    } else {
        Ok(0.0)
    }
}

#[derive(Debug, Clone)]
pub enum Stability {
    Stable,
    Blocked { group: Vec<AgentId>, network: Network },
}

impl Stability {
    pub fn is_stable(&self) -> bool {
        matches!(self, Stability::Stable)
    }
}

/// Exhaustive core-stability check: search every subgroup (including the
/// whole population) and every network on it for a weak Pareto improvement
/// with one strict gain. Returns the first blocking pair in deterministic
/// order, or `Stable`.
pub fn is_core_stable(
    g: &Network,
    tv: &TypeVector,
    model: &PayoffModel,
) -> Result<Stability, EfficiencyError> {
    let n = g.n();
    if n > STABILITY_MAX_AGENTS {
        return Err(EfficiencyError::SizeLimit { n, max: STABILITY_MAX_AGENTS });
    }
    let current: Vec<f64> =
        (0..n).map(|i| one_period_payoff(model, tv, g, i)).collect::<Result<_, _>>()?;
    for group_mask in 1u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|&i| group_mask >> i & 1 == 1).collect();
        let k = members.len();
        let pc = pair_count(k.max(1));
        for sub in 0..(1u64 << pc) {
            let mut cand = Network::empty(n);
            let mut m = sub;
            while m != 0 {
                let idx = m.trailing_zeros() as usize;
                m &= m - 1;
                let (a, b) = pair_from_index(k, idx);
                cand.add_link(members[a], members[b]);
            }
            let mut all_weak = true;
            let mut some_strict = false;
            for &i in &members {
                let u = one_period_payoff(model, tv, &cand, i)?;
                if u < current[i] {
                    all_weak = false;
                    break;
                }
                if u > current[i] {
                    some_strict = true;
                }
            }
            if all_weak && some_strict {
                return Ok(Stability::Blocked { group: members, network: cand });
            }
        }
    }
    Ok(Stability::Stable)
}

/// Closed-form core-stability verdict for the two-type efficient network.
pub fn core_stable_conditions(spec: &TwoTypeSpec) -> Result<bool, EfficiencyError> {
    let result = efficient_two_type(spec)?;
    let EfficientCase::TwoType(case) = result.case else {
        return Err(EfficiencyError::Internal("two-type dispatch returned a general case".into()));
    };
    let model = spec.model()?;
    let tv = spec.type_vector();
    Ok(match case {
        TwoTypeCase::FullClique | TwoTypeCase::AlphaCliqueOnly | TwoTypeCase::Empty => true,
        TwoTypeCase::AlphaCliqueAllBeta => spec.f_beta >= spec.cost,
        TwoTypeCase::AlphaCliqueBetaHub => {
            // the hub carries every beta link; it must not prefer autarky
            one_period_payoff(&model, &tv, &result.network, 0)? >= 0.0
        }
        TwoTypeCase::FullStar => one_period_payoff(&model, &tv, &result.network, 0)? >= 0.0,
        TwoTypeCase::AlphaStar => spec.f_alpha >= spec.cost,
    })
}

/// Set of networks in which every agent earns a strictly positive one-period
/// payoff, stored as canonical masks under type-preserving relabeling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SustainableSet {
    n: usize,
    masks: BTreeSet<u64>,
}

impl SustainableSet {
    /// Membership rule every element satisfies.
    pub fn criterion() -> &'static str {
        "u_i > 0 for all i"
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn contains(&self, g: &Network, tv: &TypeVector) -> bool {
        self.masks.contains(&canonical_mask(g, tv))
    }

    pub fn is_superset_of(&self, other: &SustainableSet) -> bool {
        self.n == other.n && other.masks.is_subset(&self.masks)
    }

    pub fn masks(&self) -> &BTreeSet<u64> {
        &self.masks
    }
}

/// All networks on up to five agents giving every agent a strictly positive
/// payoff. The empty network is never a member: singletons earn exactly zero.
pub fn sustainable_set(
    tv: &TypeVector,
    params: &PayoffParams,
) -> Result<SustainableSet, EfficiencyError> {
    let n = tv.n();
    if n > STABILITY_MAX_AGENTS {
        return Err(EfficiencyError::SizeLimit { n, max: STABILITY_MAX_AGENTS });
    }
    let model = PayoffModel::connections(params.clone());
    let pc = pair_count(n);
    let mut masks = BTreeSet::new();
    'nets: for net_mask in 0..(1u64 << pc) {
        let g = Network::from_mask(n, net_mask);
        for i in 0..n {
            if !(one_period_payoff(&model, tv, &g, i)? > 0.0) {
                continue 'nets;
            }
        }
        masks.insert(canonical_mask(&g, tv));
    }
    Ok(SustainableSet { n, masks })
}
