//! Undirected simple networks on agent indices, connectivity queries, and
//! descriptive statistics (clustering, diameter, distance percentiles).
//!
//! Networks are stored as adjacency bit-rows (one `u64` word per 64 agents),
//! sized for populations up to a few thousand. All queries treat the network
//! as immutable; mutation happens only through `add_link`/`remove_link`.

use crate::numeric::percentile_from_histogram;
use serde::Serialize;
use std::collections::VecDeque;
use std::fmt;
use thiserror::Error;

pub type AgentId = usize;

pub const MAX_AGENTS: usize = 4096;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("agent index {index} out of range for {n} agents")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("self-loop on agent {0} is not allowed")]
    SelfLoop(usize),
    #[error("network size {0} exceeds the supported maximum {MAX_AGENTS}")]
    TooLarge(usize),
    #[error("edge list parse error at line {line}: {msg}")]
    EdgeListParse { line: usize, msg: String },
}

/// Shortest-path distance; unreachable pairs get `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dist {
    Finite(u32),
    Infinite,
}

impl Dist {
    pub fn as_finite(self) -> Option<u32> {
        match self {
            Dist::Finite(d) => Some(d),
            Dist::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Dist::Finite(_))
    }
}

/// Number of unordered pairs on `n` agents.
pub fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Index of the unordered pair {i, j} (i != j) in lexicographic order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

/// Inverse of `pair_index`.
pub fn pair_from_index(n: usize, mut idx: usize) -> (usize, usize) {
    for a in 0..n {
        let row = n - a - 1;
        if idx < row {
            return (a, a + 1 + idx);
        }
        idx -= row;
    }
    panic!("pair index out of range");
}

/// Undirected simple graph over agents `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Network {
    n: usize,
    words: usize,
    bits: Vec<u64>,
    link_count: usize,
}

impl fmt::Debug for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Network(n={}, links={:?})", self.n, self.links())
    }
}

impl Network {
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_AGENTS, "network too large");
        let words = n.div_ceil(64).max(1);
        Network { n, words, bits: vec![0; n * words], link_count: 0 }
    }

    pub fn from_links(n: usize, links: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n > MAX_AGENTS {
            return Err(GraphError::TooLarge(n));
        }
        let mut g = Network::empty(n);
        for &(i, j) in links {
            g.check_pair(i, j)?;
            g.add_link(i, j);
        }
        Ok(g)
    }

    /// Complete network.
    pub fn clique(n: usize) -> Self {
        let mut g = Network::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                g.add_link(i, j);
            }
        }
        g
    }

    /// Star with the given center and every other agent as a leaf.
    pub fn star(n: usize, center: usize) -> Self {
        let mut g = Network::empty(n);
        for i in 0..n {
            if i != center {
                g.add_link(center, i);
            }
        }
        g
    }

    /// Cycle 0-1-...-(n-1)-0. For n = 2 this is a single link.
    pub fn cycle(n: usize) -> Self {
        let mut g = Network::empty(n);
        if n >= 2 {
            for i in 0..n - 1 {
                g.add_link(i, i + 1);
            }
            if n > 2 {
                g.add_link(n - 1, 0);
            }
        }
        g
    }

    /// Build a network on `n` agents from a bitmask over lexicographic pair indices.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        debug_assert!(pair_count(n) <= 64);
        let mut g = Network::empty(n);
        let mut m = mask;
        while m != 0 {
            let idx = m.trailing_zeros() as usize;
            let (i, j) = pair_from_index(n, idx);
            g.add_link(i, j);
            m &= m - 1;
        }
        g
    }

    /// Bitmask over lexicographic pair indices. Requires pair_count(n) <= 64.
    pub fn mask(&self) -> u64 {
        assert!(pair_count(self.n) <= 64, "network too large for mask form");
        let mut m = 0u64;
        for (i, j) in self.links() {
            m |= 1 << pair_index(self.n, i, j);
        }
        m
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<(), GraphError> {
        if i >= self.n {
            return Err(GraphError::IndexOutOfRange { index: i, n: self.n });
        }
        if j >= self.n {
            return Err(GraphError::IndexOutOfRange { index: j, n: self.n });
        }
        if i == j {
            return Err(GraphError::SelfLoop(i));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn link_count(&self) -> usize {
        self.link_count
    }

    pub fn has_link(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.n && j < self.n && i != j);
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    /// Returns true if the link was newly added.
    pub fn add_link(&mut self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.n && j < self.n && i != j);
        if self.has_link(i, j) {
            return false;
        }
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
        self.bits[j * self.words + i / 64] |= 1 << (i % 64);
        self.link_count += 1;
        true
    }

    /// Returns true if the link existed.
    pub fn remove_link(&mut self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.n && j < self.n && i != j);
        if !self.has_link(i, j) {
            return false;
        }
        self.bits[i * self.words + j / 64] &= !(1 << (j % 64));
        self.bits[j * self.words + i / 64] &= !(1 << (i % 64));
        self.link_count -= 1;
        true
    }

    pub fn set_link(&mut self, i: usize, j: usize, present: bool) {
        if present {
            self.add_link(i, j);
        } else {
            self.remove_link(i, j);
        }
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = AgentId> + '_ {
        BitIter::new(self.row(i))
    }

    /// Sorted list of links (i, j) with i < j.
    pub fn links(&self) -> Vec<(AgentId, AgentId)> {
        let mut out = Vec::with_capacity(self.link_count);
        for i in 0..self.n {
            for j in self.neighbors(i) {
                if j > i {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_empty_network(&self) -> bool {
        self.link_count == 0
    }

    /// Parse the edge-list text format: one "i j" pair per line, 0-based
    /// indices, '#' starts a comment. The agent count is the largest index
    /// seen plus one, or `min_n` if that is larger.
    pub fn parse_edge_list(text: &str, min_n: usize) -> Result<Self, GraphError> {
        let mut links = Vec::new();
        let mut max_idx = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<usize, GraphError> {
                tok.ok_or_else(|| GraphError::EdgeListParse {
                    line: lineno + 1,
                    msg: "expected two indices".into(),
                })?
                .parse::<usize>()
                .map_err(|e| GraphError::EdgeListParse { line: lineno + 1, msg: e.to_string() })
            };
            let i = parse(parts.next())?;
            let j = parse(parts.next())?;
            if parts.next().is_some() {
                return Err(GraphError::EdgeListParse {
                    line: lineno + 1,
                    msg: "trailing tokens after pair".into(),
                });
            }
            if i == j {
                return Err(GraphError::EdgeListParse {
                    line: lineno + 1,
                    msg: format!("self-loop on agent {i}"),
                });
            }
            max_idx = max_idx.max(i).max(j);
            links.push((i, j));
        }
        let n = if links.is_empty() { min_n } else { (max_idx + 1).max(min_n) };
        Network::from_links(n, &links)
    }

    pub fn to_edge_list_string(&self) -> String {
        let mut out = String::new();
        for (i, j) in self.links() {
            out.push_str(&format!("{i} {j}\n"));
        }
        out
    }
}

struct BitIter<'a> {
    words: &'a [u64],
    word_idx: usize,
    current: u64,
}

impl<'a> BitIter<'a> {
    fn new(words: &'a [u64]) -> Self {
        let current = if words.is_empty() { 0 } else { words[0] };
        BitIter { words, word_idx: 0, current }
    }
}

impl Iterator for BitIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.word_idx * 64 + bit);
            }
            self.word_idx += 1;
            if self.word_idx >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word_idx];
        }
    }
}

/// Breadth-first shortest path lengths from `i`; own entry is 0.
pub fn distances(g: &Network, i: AgentId) -> Result<Vec<Dist>, GraphError> {
    if i >= g.n() {
        return Err(GraphError::IndexOutOfRange { index: i, n: g.n() });
    }
    let mut out = vec![Dist::Infinite; g.n()];
    let mut seen = vec![false; g.n()];
    let mut queue = VecDeque::new();
    seen[i] = true;
    out[i] = Dist::Finite(0);
    queue.push_back((i, 0u32));
    while let Some((v, d)) = queue.pop_front() {
        for u in g.neighbors(v) {
            if !seen[u] {
                seen[u] = true;
                out[u] = Dist::Finite(d + 1);
                queue.push_back((u, d + 1));
            }
        }
    }
    Ok(out)
}

/// Maximal connected sets of non-singleton agents, each sorted, listed in
/// order of their smallest member. Singleton agents are omitted.
pub fn components(g: &Network) -> Vec<Vec<AgentId>> {
    let mut seen = vec![false; g.n()];
    let mut out = Vec::new();
    for start in 0..g.n() {
        if seen[start] || g.degree(start) == 0 {
            continue;
        }
        let mut comp = Vec::new();
        let mut queue = VecDeque::new();
        seen[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            comp.push(v);
            for u in g.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassifyFlags {
    pub empty: bool,
    pub connected: bool,
    pub minimal: bool,
    pub minimally_connected: bool,
}

/// Structural classification: emptiness, connectedness, and minimality
/// (every link is a bridge whose removal disconnects some pair).
pub fn classify(g: &Network) -> ClassifyFlags {
    let empty = g.is_empty_network();
    let comps = components(g);
    let connected = comps.len() == 1 && comps[0].len() == g.n();
    let minimal = bridge_count(g) == g.link_count();
    ClassifyFlags { empty, connected, minimal, minimally_connected: minimal && connected }
}

/// Number of bridge links, via Tarjan lowlinks (iterative).
fn bridge_count(g: &Network) -> usize {
    let n = g.n();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0usize;
    let mut bridges = 0usize;
    // stack of (node, parent, neighbor iterator state)
    let mut stack: Vec<(usize, usize, Vec<usize>, usize)> = Vec::new();
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        stack.push((root, usize::MAX, g.neighbors(root).collect(), 0));
        while let Some((v, parent, nbrs, idx)) = stack.last_mut() {
            if *idx < nbrs.len() {
                let u = nbrs[*idx];
                *idx += 1;
                if disc[u] == usize::MAX {
                    disc[u] = timer;
                    low[u] = timer;
                    timer += 1;
                    let nu: Vec<usize> = g.neighbors(u).collect();
                    let v_copy = *v;
                    stack.push((u, v_copy, nu, 0));
                } else if u != *parent {
                    low[*v] = low[*v].min(disc[u]);
                }
            } else {
                let (v, parent, _, _) = stack.pop().unwrap();
                if let Some((p, _, _, _)) = stack.last() {
                    debug_assert_eq!(*p, parent);
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > disc[parent] {
                        bridges += 1;
                    }
                }
            }
        }
    }
    bridges
}

/// Descriptive statistics of a network.
///
/// `alcc` averages each agent's local clustering coefficient over the whole
/// population, with agents of degree below two contributing zero. `gcc` is
/// the number of triangles divided by the number of connected triples of
/// agents (sets of three agents spanning at least two links). `diameter` is
/// the longest shortest path inside the largest component. `p90_distance` is
/// the interpolated 90th percentile of all finite pairwise distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NetworkStats {
    pub alcc: f64,
    pub gcc: f64,
    pub diameter: u32,
    pub p90_distance: f64,
}

pub fn stats(g: &Network) -> NetworkStats {
    let n = g.n();
    let degrees: Vec<usize> = (0..n).map(|i| g.degree(i)).collect();

    // triangles_at[v] = number of linked pairs among v's neighbors
    let mut triangles_times2 = vec![0u64; n];
    for i in 0..n {
        for j in g.neighbors(i) {
            if j > i {
                let common: u64 = g
                    .row(i)
                    .iter()
                    .zip(g.row(j))
                    .map(|(a, b)| (a & b).count_ones() as u64)
                    .sum();
                // each common neighbor k closes a triangle {i, j, k}
                triangles_times2[i] += common;
                triangles_times2[j] += common;
            }
        }
    }
    let mut alcc_sum = 0.0;
    let mut wedges = 0u64;
    let mut triangle_incidences = 0u64; // = 3 * triangles
    for v in 0..n {
        let d = degrees[v] as u64;
        if d >= 2 {
            let possible = d * (d - 1) / 2;
            let closed = triangles_times2[v] / 2;
            alcc_sum += closed as f64 / possible as f64;
            wedges += possible;
            triangle_incidences += closed;
        }
    }
    let alcc = if n > 0 { alcc_sum / n as f64 } else { 0.0 };
    let triangles = triangle_incidences / 3;
    let connected_triples = wedges - 2 * triangles;
    let gcc = if connected_triples > 0 { triangles as f64 / connected_triples as f64 } else { 0.0 };

    // distance histogram over all unordered pairs (finite only), plus the
    // diameter restricted to the largest component
    let comps = components(g);
    let largest: Option<&Vec<AgentId>> = comps.iter().max_by_key(|c| c.len());
    let mut hist: Vec<u64> = Vec::new();
    let mut diameter = 0u32;
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    for comp in &comps {
        for &src in comp {
            // BFS within the component
            for &v in comp {
                dist[v] = u32::MAX;
            }
            dist[src] = 0;
            queue.push_back(src);
            while let Some(v) = queue.pop_front() {
                let dv = dist[v];
                for u in g.neighbors(v) {
                    if dist[u] == u32::MAX {
                        dist[u] = dv + 1;
                        queue.push_back(u);
                    }
                }
            }
            for &v in comp {
                if v > src {
                    let d = dist[v];
                    debug_assert_ne!(d, u32::MAX);
                    if d as usize >= hist.len() {
                        hist.resize(d as usize + 1, 0);
                    }
                    hist[d as usize] += 1;
                    if Some(comp) == largest && d > diameter {
                        diameter = d;
                    }
                }
            }
        }
    }
    let p90_distance = percentile_from_histogram(&hist, 0.9);
    NetworkStats { alcc, gcc, diameter, p90_distance }
}
