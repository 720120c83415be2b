//! One-period payoffs: the heterogeneous connections model (spatially
//! discounted benefits minus per-link costs) and a pluggable table variant
//! keyed by an agent's own component.

use crate::graph::{pair_index, AgentId, Network};
use crate::numeric::ExactSum;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PayoffError {
    #[error("invalid payoff parameters: {0}")]
    InvalidParams(String),
    #[error("agent index {index} out of range for {n} agents")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("type id {0} outside the declared type set")]
    TypeOutOfRange(usize),
    #[error("payoff table has no entry for a component of size {size}")]
    MissingTableEntry { size: usize },
    #[error("time discount {0} must lie strictly inside (0, 1)")]
    InvalidGamma(f64),
}

/// Per-agent type assignment over a finite type set `0..num_types`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeVector {
    types: Vec<usize>,
    num_types: usize,
}

impl TypeVector {
    pub fn new(types: Vec<usize>, num_types: usize) -> Result<Self, PayoffError> {
        if let Some(&bad) = types.iter().find(|&&t| t >= num_types) {
            return Err(PayoffError::TypeOutOfRange(bad));
        }
        Ok(TypeVector { types, num_types })
    }

    /// Everyone shares type 0.
    pub fn uniform(n: usize) -> Self {
        TypeVector { types: vec![0; n], num_types: 1 }
    }

    /// `counts[t]` agents of type `t`, assigned in blocks: type 0 first.
    pub fn from_counts(counts: &[usize]) -> Self {
        let mut types = Vec::with_capacity(counts.iter().sum());
        for (t, &c) in counts.iter().enumerate() {
            types.extend(std::iter::repeat(t).take(c));
        }
        TypeVector { types, num_types: counts.len() }
    }

    pub fn n(&self) -> usize {
        self.types.len()
    }

    pub fn num_types(&self) -> usize {
        self.num_types
    }

    pub fn type_of(&self, i: AgentId) -> usize {
        self.types[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.types
    }
}

/// Connections-model parameters: per-type benefit before spatial discount,
/// per-link per-period cost, and the spatial discount factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffParams {
    benefit: Vec<f64>,
    cost: f64,
    delta: f64,
}

impl PayoffParams {
    pub fn new(benefit: Vec<f64>, cost: f64, delta: f64) -> Result<Self, PayoffError> {
        if benefit.is_empty() || benefit.iter().any(|&f| !(f > 0.0) || !f.is_finite()) {
            return Err(PayoffError::InvalidParams("every benefit f(theta) must be positive".into()));
        }
        if !(cost > 0.0) || !cost.is_finite() {
            return Err(PayoffError::InvalidParams("link cost must be positive".into()));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(PayoffError::InvalidParams(format!(
                "spatial discount {delta} must lie strictly inside (0, 1)"
            )));
        }
        Ok(PayoffParams { benefit, cost, delta })
    }

    pub fn benefit_of(&self, t: usize) -> f64 {
        self.benefit[t]
    }

    pub fn benefits(&self) -> &[f64] {
        &self.benefit
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self, PayoffError> {
        PayoffParams::new(self.benefit.clone(), self.cost, delta)
    }
}

/// Key for table payoffs: an agent's component with the agent itself
/// relabeled to position 0, canonicalized over relabelings of the rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct ComponentKey {
    size: usize,
    mask: u64,
}

const TABLE_COMPONENT_LIMIT: usize = 8;

/// Explicit per-component payoff table. Entries are stored up to symmetry:
/// the payoff may depend on the component's shape and the agent's position
/// in it, but not on agent labels. Singletons always earn zero.
#[derive(Debug, Clone, Default)]
pub struct PayoffTable {
    entries: HashMap<ComponentKey, f64>,
}

impl PayoffTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert the payoff for the agent at `position` in a component whose
    /// links are given on local labels `0..size`.
    pub fn insert(&mut self, size: usize, links: &[(usize, usize)], position: usize, payoff: f64) {
        assert!(size <= TABLE_COMPONENT_LIMIT, "table component too large");
        let mut mask = 0u64;
        for &(a, b) in links {
            mask |= 1 << pair_index(size, a, b);
        }
        let key = canonical_marked(size, mask, position);
        self.entries.insert(key, payoff);
    }

    fn get(&self, size: usize, mask: u64, position: usize) -> Option<f64> {
        self.entries.get(&canonical_marked(size, mask, position)).copied()
    }

    /// Three-agent symmetric table: a lone pair earns 2v each, a two-link
    /// line earns 0 for every member, the triangle earns v each.
    pub fn symmetric_triangle(v: f64) -> Self {
        let mut t = PayoffTable::new();
        t.insert(2, &[(0, 1)], 0, 2.0 * v);
        t.insert(3, &[(0, 1), (1, 2)], 0, 0.0); // endpoint of the line
        t.insert(3, &[(0, 1), (1, 2)], 1, 0.0); // middle of the line
        t.insert(3, &[(0, 1), (1, 2), (0, 2)], 0, v);
        t
    }
}

/// Relabel a marked component to canonical form: the marked agent becomes 0
/// and the remaining labels are permuted to minimize the link mask.
fn canonical_marked(size: usize, mask: u64, position: usize) -> ComponentKey {
    debug_assert!(position < size);
    // move `position` to 0 first
    let mut base: Vec<usize> = (0..size).collect();
    base.swap(0, position);
    // base maps new-label -> old-label; relabel mask accordingly
    let relabel = |perm: &[usize]| -> u64 {
        // perm[new] = old; build inverse old -> new
        let mut inv = [0usize; TABLE_COMPONENT_LIMIT];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut out = 0u64;
        let mut m = mask;
        while m != 0 {
            let idx = m.trailing_zeros() as usize;
            m &= m - 1;
            let (a, b) = crate::graph::pair_from_index(size, idx);
            out |= 1 << pair_index(size, inv[a], inv[b]);
        }
        out
    };
    let mut best = relabel(&base);
    // permute positions 1..size (marked stays at 0) via Heap's algorithm
    let mut perm = base.clone();
    let k = size.saturating_sub(1);
    let mut c = vec![0usize; k];
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(1, 1 + i);
            } else {
                perm.swap(1 + c[i], 1 + i);
            }
            best = best.min(relabel(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    ComponentKey { size, mask: best }
}

/// Payoff structure: either the connections model or an explicit table.
#[derive(Debug, Clone)]
pub enum PayoffModel {
    Connections(PayoffParams),
    Table(PayoffTable),
}

impl PayoffModel {
    pub fn connections(params: PayoffParams) -> Self {
        PayoffModel::Connections(params)
    }

    pub fn params(&self) -> Option<&PayoffParams> {
        match self {
            PayoffModel::Connections(p) => Some(p),
            PayoffModel::Table(_) => None,
        }
    }
}

/// One-period payoff of agent `i` in network `g`.
///
/// Connections variant: sum over every agent `j` connected to `i` of
/// `delta^(d_ij - 1) * f(theta_j)`, minus `deg(i) * c`. The per-layer factor
/// is built by repeated multiplication so equal distances always contribute
/// identical floating-point terms, and terms are combined with an exact
/// accumulator; the result depends only on the multiset of
/// (distance, type) pairs. Singletons earn exactly zero under both variants.
pub fn one_period_payoff(
    model: &PayoffModel,
    tv: &TypeVector,
    g: &Network,
    i: AgentId,
) -> Result<f64, PayoffError> {
    let n = g.n();
    if i >= n {
        return Err(PayoffError::IndexOutOfRange { index: i, n });
    }
    match model {
        PayoffModel::Connections(params) => {
            for &t in tv.as_slice() {
                if t >= params.benefit.len() {
                    return Err(PayoffError::TypeOutOfRange(t));
                }
            }
            let deg = g.degree(i);
            if deg == 0 {
                return Ok(0.0);
            }
            let mut acc = ExactSum::new();
            acc.add(-(deg as f64) * params.cost);
            // BFS by layers; factor = delta^(d-1)
            let mut seen = vec![false; n];
            seen[i] = true;
            let mut frontier: Vec<usize> = g.neighbors(i).collect();
            for &v in &frontier {
                seen[v] = true;
            }
            let mut factor = 1.0;
            let mut next = Vec::new();
            while !frontier.is_empty() {
                for &v in &frontier {
                    acc.add(factor * params.benefit_of(tv.type_of(v)));
                }
                next.clear();
                for &v in &frontier {
                    for u in g.neighbors(v) {
                        if !seen[u] {
                            seen[u] = true;
                            next.push(u);
                        }
                    }
                }
                std::mem::swap(&mut frontier, &mut next);
                factor *= params.delta;
            }
            Ok(acc.value())
        }
        PayoffModel::Table(table) => {
            if g.degree(i) == 0 {
                return Ok(0.0);
            }
            // extract i's component on local labels
            let mut members = vec![i];
            let mut seen = vec![false; n];
            seen[i] = true;
            let mut head = 0;
            while head < members.len() {
                let v = members[head];
                head += 1;
                for u in g.neighbors(v) {
                    if !seen[u] {
                        seen[u] = true;
                        members.push(u);
                    }
                }
            }
            members.sort_unstable();
            let size = members.len();
            if size > TABLE_COMPONENT_LIMIT {
                return Err(PayoffError::MissingTableEntry { size });
            }
            let local = |v: usize| members.iter().position(|&m| m == v).unwrap();
            let mut mask = 0u64;
            for (idx, &a) in members.iter().enumerate() {
                for b in g.neighbors(a) {
                    if b > a {
                        mask |= 1 << pair_index(size, idx, local(b));
                    }
                }
            }
            table
                .get(size, mask, local(i))
                .ok_or(PayoffError::MissingTableEntry { size })
        }
    }
}

/// Sum of one-period payoffs over all agents, exactly accumulated.
pub fn total_welfare(model: &PayoffModel, tv: &TypeVector, g: &Network) -> Result<f64, PayoffError> {
    let mut acc = ExactSum::new();
    for i in 0..g.n() {
        acc.add(one_period_payoff(model, tv, g, i)?);
    }
    Ok(acc.value())
}

/// Value of receiving `u` every period forever under time discount `gamma`.
pub fn discounted_constant_value(u: f64, gamma: f64) -> Result<f64, PayoffError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(PayoffError::InvalidGamma(gamma));
    }
    Ok(u / (1.0 - gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::pair_count;
    use proptest::prelude::*;

    fn line3_model() -> (PayoffModel, TypeVector, Network) {
        let params = PayoffParams::new(vec![1.0], 0.2, 0.5).unwrap();
        let g = Network::from_links(3, &[(0, 1), (1, 2)]).unwrap();
        (PayoffModel::connections(params), TypeVector::uniform(3), g)
    }

    #[test]
    fn connections_line_payoffs() {
        let (m, tv, g) = line3_model();
        // middle agent: two direct neighbors, two links
        let mid = one_period_payoff(&m, &tv, &g, 1).unwrap();
        assert!((mid - 1.6).abs() < 1e-15, "{mid}");
        // endpoint: one direct, one at distance two
        let end = one_period_payoff(&m, &tv, &g, 0).unwrap();
        assert!((end - 1.3).abs() < 1e-15, "{end}");
    }

    #[test]
    fn singleton_earns_zero() {
        let params = PayoffParams::new(vec![5.0], 1.0, 0.5).unwrap();
        let m = PayoffModel::connections(params);
        let tv = TypeVector::uniform(3);
        let g = Network::from_links(3, &[(0, 1)]).unwrap();
        assert_eq!(one_period_payoff(&m, &tv, &g, 2).unwrap(), 0.0);
        let t = PayoffModel::Table(PayoffTable::symmetric_triangle(1.0));
        assert_eq!(one_period_payoff(&t, &tv, &g, 2).unwrap(), 0.0);
    }

    #[test]
    fn triangle_table_values() {
        let t = PayoffModel::Table(PayoffTable::symmetric_triangle(1.0));
        let tv = TypeVector::uniform(3);
        // pair {0,1}: both endpoints earn 2v
        let g = Network::from_links(3, &[(0, 1)]).unwrap();
        assert_eq!(one_period_payoff(&t, &tv, &g, 0).unwrap(), 2.0);
        assert_eq!(one_period_payoff(&t, &tv, &g, 1).unwrap(), 2.0);
        // line in every labeling: all zero
        for links in [[(0, 1), (1, 2)], [(0, 2), (2, 1)], [(1, 0), (0, 2)]] {
            let g = Network::from_links(3, &links).unwrap();
            for i in 0..3 {
                assert_eq!(one_period_payoff(&t, &tv, &g, i).unwrap(), 0.0, "{links:?} {i}");
            }
        }
        // triangle: v each, total 3v
        let g = Network::clique(3);
        assert_eq!(total_welfare(&t, &tv, &g).unwrap(), 3.0);
    }

    #[test]
    fn table_missing_entry_is_error() {
        let t = PayoffModel::Table(PayoffTable::symmetric_triangle(1.0));
        let tv = TypeVector::uniform(4);
        let g = Network::star(4, 0);
        assert!(matches!(
            one_period_payoff(&t, &tv, &g, 0),
            Err(PayoffError::MissingTableEntry { .. })
        ));
    }

    #[test]
    fn welfare_examples() {
        let params = PayoffParams::new(vec![1.0], 0.3, 0.5).unwrap();
        let m = PayoffModel::connections(params);
        let tv = TypeVector::uniform(2);
        assert_eq!(total_welfare(&m, &tv, &Network::empty(2)).unwrap(), 0.0);
        let g = Network::from_links(2, &[(0, 1)]).unwrap();
        let w = total_welfare(&m, &tv, &g).unwrap();
        assert!((w - 1.4).abs() < 1e-15);
    }

    #[test]
    fn isolated_pair_payoff() {
        let params = PayoffParams::new(vec![2.5, 0.7], 0.4, 0.6).unwrap();
        let m = PayoffModel::connections(params);
        let tv = TypeVector::new(vec![0, 1], 2).unwrap();
        let g = Network::from_links(2, &[(0, 1)]).unwrap();
        let u0 = one_period_payoff(&m, &tv, &g, 0).unwrap();
        let u1 = one_period_payoff(&m, &tv, &g, 1).unwrap();
        assert_eq!(u0, 0.7 - 0.4);
        assert_eq!(u1, 2.5 - 0.4);
    }

    #[test]
    fn discounting() {
        assert_eq!(discounted_constant_value(0.0, 0.3).unwrap(), 0.0);
        assert_eq!(discounted_constant_value(1.0, 0.5).unwrap(), 2.0);
        let v = discounted_constant_value(1.6, 0.9).unwrap();
        assert!((v - 16.0).abs() < 1e-12);
        assert!(discounted_constant_value(1.0, 1.0).is_err());
        assert!(discounted_constant_value(1.0, 0.0).is_err());
        assert!(discounted_constant_value(1.0, -0.2).is_err());
    }

    #[test]
    fn param_validation() {
        assert!(PayoffParams::new(vec![], 1.0, 0.5).is_err());
        assert!(PayoffParams::new(vec![1.0, 0.0], 1.0, 0.5).is_err());
        assert!(PayoffParams::new(vec![1.0], 0.0, 0.5).is_err());
        assert!(PayoffParams::new(vec![1.0], 1.0, 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // toggling links outside i's component leaves the payoff bit-identical
        #[test]
        fn component_independence(
            n in 4usize..7,
            mask in proptest::bits::u64::masked((1u64 << 15) - 1),
            fa in 0.5f64..4.0, c in 0.1f64..2.0, d in 0.1f64..0.9,
        ) {
            let pc = pair_count(n);
            let g = Network::from_mask(n, mask & ((1 << pc) - 1));
            let params = PayoffParams::new(vec![fa, fa * 0.5], c, d).unwrap();
            let tv = TypeVector::from_counts(&[n - n / 2, n / 2]);
            let m = PayoffModel::connections(params);
            let comps = crate::graph::components(&g);
            for i in 0..n {
                let u = one_period_payoff(&m, &tv, &g, i).unwrap();
                let my_comp: Vec<usize> = comps
                    .iter()
                    .find(|c| c.contains(&i))
                    .cloned()
                    .unwrap_or_else(|| vec![i]);
                // toggle a link fully outside the component, if any
                let mut h = g.clone();
                let mut toggled = false;
                'outer: for a in 0..n {
                    for b in (a + 1)..n {
                        if !my_comp.contains(&a) && !my_comp.contains(&b) {
                            h.set_link(a, b, !h.has_link(a, b));
                            toggled = true;
                            break 'outer;
                        }
                    }
                }
                if toggled {
                    let u2 = one_period_payoff(&m, &tv, &h, i).unwrap();
                    prop_assert_eq!(u.to_bits(), u2.to_bits());
                }
            }
        }

        // pointwise-larger benefits never decrease any connected agent's payoff
        #[test]
        fn monotone_in_benefit(
            n in 3usize..6,
            mask in proptest::bits::u64::masked((1u64 << 10) - 1),
            f1 in 0.5f64..3.0, bump in 0.0f64..2.0,
            c in 0.1f64..2.0, d in 0.1f64..0.9,
        ) {
            let pc = pair_count(n);
            let g = Network::from_mask(n, mask & ((1 << pc) - 1));
            let tv = TypeVector::from_counts(&[n - n / 2, n / 2]);
            let lo = PayoffModel::connections(PayoffParams::new(vec![f1, f1 * 0.8], c, d).unwrap());
            let hi = PayoffModel::connections(
                PayoffParams::new(vec![f1 + bump, f1 * 0.8 + bump], c, d).unwrap(),
            );
            for i in 0..n {
                let a = one_period_payoff(&lo, &tv, &g, i).unwrap();
                let b = one_period_payoff(&hi, &tv, &g, i).unwrap();
                prop_assert!(b >= a - 1e-12);
            }
        }
    }
}
