//! Myopic pairwise-stability dynamics: each period the selected pair keeps
//! or drops its link according to both agents' one-period marginal payoffs,
//! everything else held fixed. Includes a reference single-step rule and an
//! engine that maintains the full distance matrix incrementally so that
//! thousand-agent populations run in seconds.

use crate::graph::{stats, AgentId, Network, NetworkStats};
use crate::numeric::ExactSum;
use crate::payoff::{one_period_payoff, PayoffError, PayoffModel, PayoffParams, TypeVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Payoff(#[from] PayoffError),
    #[error(transparent)]
    Game(#[from] crate::game::GameError),
}

/// How meeting pairs are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    /// One pair per period, uniform over all pairs.
    UniformRandom,
    /// Shuffled full passes over every pair; the horizon is consumed in
    /// whole sweeps, so every pair is selected the same number of times.
    Sweeps,
}

#[derive(Debug, Clone)]
pub struct MyopicConfig {
    pub params: PayoffParams,
    pub type_counts: Vec<usize>,
    /// Defaults to n(n-1): two expected selections per pair. Anything
    /// smaller is rejected.
    pub horizon: Option<usize>,
    pub seed: u64,
    pub selection: SelectionMode,
    /// When true, a selected pair that is already linked re-evaluates the
    /// link and severs it unless it is still mutually beneficial. When
    /// false, existing links are left alone and only formation decisions
    /// are taken. Formation-only dynamics reproduce the reference
    /// large-population statistics; re-evaluation dissolves most of the
    /// clustering that indirect benefits built.
    pub reevaluate_existing: bool,
}

impl MyopicConfig {
    pub fn n(&self) -> usize {
        self.type_counts.iter().sum()
    }

    fn resolved_horizon(&self) -> Result<usize, BaselineError> {
        let n = self.n();
        let floor = n * (n - 1);
        match self.horizon {
            None => Ok(floor),
            Some(h) if h >= floor => Ok(h),
            Some(h) => Err(BaselineError::Config(format!(
                "horizon {h} below the minimum {floor} for {n} agents"
            ))),
        }
    }

    fn validate(&self) -> Result<(), BaselineError> {
        if self.n() < 2 {
            return Err(BaselineError::Config("need at least two agents".into()));
        }
        if self.params.benefits().len() < self.type_counts.len() {
            return Err(BaselineError::Config("benefit table smaller than type set".into()));
        }
        self.resolved_horizon().map(|_| ())
    }
}

/// Reference one-step rule: the selected pair's link is present afterwards
/// exactly when both marginal payoffs (with the link versus without, the
/// rest of the network unchanged) are non-negative and at least one is
/// strictly positive. Exact ties do not form.
pub fn myopic_step(
    g: &Network,
    tv: &TypeVector,
    params: &PayoffParams,
    pair: (usize, usize),
) -> Result<Network, BaselineError> {
    let model = PayoffModel::connections(params.clone());
    let (i, j) = pair;
    let mut with_link = g.clone();
    with_link.add_link(i, j);
    let mut without = g.clone();
    without.remove_link(i, j);
    let di = one_period_payoff(&model, tv, &with_link, i)? - one_period_payoff(&model, tv, &without, i)?;
    let dj = one_period_payoff(&model, tv, &with_link, j)? - one_period_payoff(&model, tv, &without, j)?;
    let keep = di >= 0.0 && dj >= 0.0 && (di > 0.0 || dj > 0.0);
    Ok(if keep { with_link } else { without })
}

const UNREACHABLE: u16 = u16::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkChange {
    Formed,
    Severed,
    None,
}

/// Incremental myopic engine. Maintains adjacency and the all-pairs
/// shortest-distance matrix; marginal payoffs come from distance rows, and
/// their decisions agree bit-for-bit with `myopic_step` (near-tie margins
/// are re-evaluated with exact summation).
pub struct MyopicEngine {
    n: usize,
    g: Network,
    cost: f64,
    dist: Vec<u16>,
    /// upper bound on the largest finite entry of each distance row
    row_max: Vec<u16>,
    /// benefit of each agent's type
    fv: Vec<f64>,
    /// pow[d] = delta^(d-1), built by repeated multiplication
    pow: Vec<f64>,
    // scratch
    frontier: Vec<u64>,
    seen: Vec<u64>,
    next: Vec<u64>,
    row_a: Vec<u16>,
    row_b: Vec<u16>,
    suspects: Vec<u32>,
    pub formed: usize,
    pub severed: usize,
}

impl MyopicEngine {
    pub fn new(tv: &TypeVector, params: &PayoffParams) -> Result<Self, BaselineError> {
        let n = tv.n();
        if n < 2 {
            return Err(BaselineError::Config("need at least two agents".into()));
        }
        for &t in tv.as_slice() {
            if t >= params.benefits().len() {
                return Err(BaselineError::Config("type outside benefit table".into()));
            }
        }
        let fv: Vec<f64> = (0..n).map(|i| params.benefit_of(tv.type_of(i))).collect();
        // pow[0] = 0 excludes the self term, pow[n + 1] = 0 absorbs the
        // unreachable sentinel after clamping; real distances are below n
        let mut pow = vec![0.0; n + 2];
        pow[1] = 1.0;
        for d in 2..=n {
            pow[d] = pow[d - 1] * params.delta();
        }
        pow[n + 1] = 0.0;
        let mut dist = vec![UNREACHABLE; n * n];
        for i in 0..n {
            dist[i * n + i] = 0;
        }
        let words = n.div_ceil(64);
        Ok(MyopicEngine {
            n,
            g: Network::empty(n),
            cost: params.cost(),
            dist,
            row_max: vec![0u16; n],
            fv,
            pow,
            frontier: vec![0u64; words],
            seen: vec![0u64; words],
            next: vec![0u64; words],
            row_a: vec![0u16; n],
            row_b: vec![0u16; n],
            suspects: Vec::new(),
            formed: 0,
            severed: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn network(&self) -> &Network {
        &self.g
    }

    /// Layered bitset search: the next frontier is the union of the current
    /// frontier's adjacency rows. Distances land in `out`.
    fn bfs_into(
        g: &Network,
        src: usize,
        out: &mut [u16],
        frontier: &mut [u64],
        seen: &mut [u64],
        next: &mut [u64],
    ) {
        out.fill(UNREACHABLE);
        out[src] = 0;
        frontier.fill(0);
        seen.fill(0);
        frontier[src / 64] = 1 << (src % 64);
        seen[src / 64] = 1 << (src % 64);
        let mut depth = 0u16;
        loop {
            depth += 1;
            next.fill(0);
            for (w, &word) in frontier.iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let v = w * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    for (nw, &row_word) in g.row(v).iter().enumerate() {
                        next[nw] |= row_word;
                    }
                }
            }
            let mut any = false;
            for w in 0..next.len() {
                let fresh = next[w] & !seen[w];
                next[w] = fresh;
                seen[w] |= fresh;
                if fresh != 0 {
                    any = true;
                    let mut bits = fresh;
                    while bits != 0 {
                        let v = w * 64 + bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        out[v] = depth;
                    }
                }
            }
            if !any {
                return;
            }
            frontier.copy_from_slice(next);
        }
    }

    fn row(&self, i: usize) -> &[u16] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    /// Plain-sum payoff from a distance row with the given degree. The
    /// self entry (distance 0) and clamped unreachable entries contribute
    /// zero through the pow table, so the loop is branch-free.
    fn u_plain(&self, row: &[u16], deg: usize) -> f64 {
        let cap = (self.n + 1) as u16;
        let mut s = 0.0;
        for (&d, &f) in row.iter().zip(&self.fv) {
            s += self.pow[d.min(cap) as usize] * f;
        }
        s - (deg as f64) * self.cost
    }

    /// Plain-sum payoffs of `i` with and without a link to `j`, evaluated
    /// from the current distance rows in a single pass.
    fn u_pair_plain(&self, i: usize, j: usize) -> (f64, f64) {
        let cap = (self.n + 1) as u16;
        let n = self.n;
        let ri = &self.dist[i * n..(i + 1) * n];
        let rj = &self.dist[j * n..(j + 1) * n];
        let mut with_link = 0.0;
        let mut without = 0.0;
        for v in 0..n {
            let d0 = ri[v].min(cap);
            let dw = d0.min(rj[v].saturating_add(1).min(cap));
            with_link += self.pow[dw as usize] * self.fv[v];
            without += self.pow[d0 as usize] * self.fv[v];
        }
        let deg = self.g.degree(i);
        (with_link - ((deg + 1) as f64) * self.cost, without - (deg as f64) * self.cost)
    }

    /// Exactly accumulated payoff; bit-identical to `one_period_payoff` on
    /// the same network because the term multiset is the same.
    fn u_exact(&self, i: usize, row: &[u16], deg: usize) -> f64 {
        if deg == 0 {
            return 0.0;
        }
        let mut acc = ExactSum::new();
        acc.add(-(deg as f64) * self.cost);
        for v in 0..self.n {
            let d = row[v];
            if v != i && d != UNREACHABLE {
                acc.add(self.pow[d as usize] * self.fv[v]);
            }
        }
        acc.value()
    }

    /// Hypothetical distance row for `i` if the link (i, j) were added.
    fn merged_row(&self, i: usize, j: usize, out: &mut [u16]) {
        let (ri, rj) = (self.row(i), self.row(j));
        for v in 0..self.n {
            out[v] = ri[v].min(rj[v].saturating_add(1));
        }
    }

    /// Would the selected pair's link be present after this period?
    fn decide(&mut self, i: usize, j: usize) -> bool {
        let linked = self.g.has_link(i, j);
        let deg_i = self.g.degree(i);
        let deg_j = self.g.degree(j);
        if !linked {
            let (wi, oi) = self.u_pair_plain(i, j);
            let (wj, oj) = self.u_pair_plain(j, i);
            let di = wi - oi;
            let dj = wj - oj;
            if di.abs() >= 1e-5 && dj.abs() >= 1e-5 {
                return di >= 0.0 && dj >= 0.0;
            }
            // near-tie: settle it with exact sums over the same distances
            let mut with_i = std::mem::take(&mut self.row_a);
            let mut with_j = std::mem::take(&mut self.row_b);
            self.merged_row(i, j, &mut with_i);
            self.merged_row(j, i, &mut with_j);
            let di = self.u_exact(i, &with_i, deg_i + 1) - self.u_exact(i, self.row(i), deg_i);
            let dj = self.u_exact(j, &with_j, deg_j + 1) - self.u_exact(j, self.row(j), deg_j);
            let keep = di >= 0.0 && dj >= 0.0 && (di > 0.0 || dj > 0.0);
            self.row_a = with_i;
            self.row_b = with_j;
            keep
        } else {
            // evaluate the network without the link
            self.g.remove_link(i, j);
            let mut wo_i = std::mem::take(&mut self.row_a);
            let mut wo_j = std::mem::take(&mut self.row_b);
            Self::bfs_into(&self.g, i, &mut wo_i, &mut self.frontier, &mut self.seen, &mut self.next);
            Self::bfs_into(&self.g, j, &mut wo_j, &mut self.frontier, &mut self.seen, &mut self.next);
            self.g.add_link(i, j);
            let di = self.u_plain(self.row(i), deg_i) - self.u_plain(&wo_i, deg_i - 1);
            let dj = self.u_plain(self.row(j), deg_j) - self.u_plain(&wo_j, deg_j - 1);
            let keep = if di.abs() < 1e-5 || dj.abs() < 1e-5 {
                let di = self.u_exact(i, self.row(i), deg_i) - self.u_exact(i, &wo_i, deg_i - 1);
                let dj = self.u_exact(j, self.row(j), deg_j) - self.u_exact(j, &wo_j, deg_j - 1);
                di >= 0.0 && dj >= 0.0 && (di > 0.0 || dj > 0.0)
            } else {
                di >= 0.0 && dj >= 0.0
            };
            self.row_a = wo_i;
            self.row_b = wo_j;
            keep
        }
    }

    pub fn step(&mut self, pair: (usize, usize)) -> LinkChange {
        self.step_with(pair, true)
    }

    /// The decision alone, without applying it.
    pub fn would_link(&mut self, pair: (usize, usize)) -> bool {
        let (i, j) = (pair.0.min(pair.1), pair.0.max(pair.1));
        self.decide(i, j)
    }

    /// Apply a link change directly, maintaining the distance matrix.
    pub fn force_set_link(&mut self, pair: (usize, usize), present: bool) {
        let (i, j) = (pair.0.min(pair.1), pair.0.max(pair.1));
        let linked = self.g.has_link(i, j);
        if present && !linked {
            self.insert_link(i, j);
            self.formed += 1;
        } else if !present && linked {
            self.remove_link(i, j);
            self.severed += 1;
        }
    }

    /// One period with explicit re-evaluation semantics; see `MyopicConfig`.
    pub fn step_with(&mut self, pair: (usize, usize), reevaluate_existing: bool) -> LinkChange {
        let (i, j) = (pair.0.min(pair.1), pair.0.max(pair.1));
        debug_assert!(i < j && j < self.n);
        let linked = self.g.has_link(i, j);
        if linked && !reevaluate_existing {
            return LinkChange::None;
        }
        let keep = self.decide(i, j);
        if keep && !linked {
            self.insert_link(i, j);
            self.formed += 1;
            LinkChange::Formed
        } else if !keep && linked {
            self.remove_link(i, j);
            self.severed += 1;
            LinkChange::Severed
        } else {
            LinkChange::None
        }
    }

    /// Write a fresh row (and its mirror column), keeping the per-row
    /// finite-maximum bounds valid: the written row's bound is exact, and a
    /// column entry that grew bumps its row's bound.
    fn write_row(&mut self, u: usize, row: &[u16]) {
        let n = self.n;
        self.dist[u * n..(u + 1) * n].copy_from_slice(row);
        let mut mx = 0u16;
        for (v, &d) in row.iter().enumerate() {
            self.dist[v * n + u] = d;
            if d != UNREACHABLE {
                if d > mx {
                    mx = d;
                }
                if d > self.row_max[v] {
                    self.row_max[v] = d;
                }
            }
        }
        self.row_max[u] = mx;
    }

    fn insert_link(&mut self, i: usize, j: usize) {
        // whether this link joins two components decides how rows are filtered
        let merging = self.row(i)[j] == UNREACHABLE;
        self.g.add_link(i, j);
        let n = self.n;
        // old rows feed the cross-pair update; fresh rows for the endpoints
        let old_i: Vec<u16> = self.row(i).to_vec();
        let old_j: Vec<u16> = self.row(j).to_vec();
        let mut new_i = std::mem::take(&mut self.row_a);
        let mut new_j = std::mem::take(&mut self.row_b);
        Self::bfs_into(&self.g, i, &mut new_i, &mut self.frontier, &mut self.seen, &mut self.next);
        Self::bfs_into(&self.g, j, &mut new_j, &mut self.frontier, &mut self.seen, &mut self.next);
        self.write_row(i, &new_i);
        self.write_row(j, &new_j);
        for u in 0..n {
            if u == i || u == j {
                continue;
            }
            let a = old_i[u];
            let b = old_j[u];
            // untouched unless the new edge is reachable
            if a == UNREACHABLE && b == UNREACHABLE {
                continue;
            }
            // within one component, an improvement for some v outside {i, j}
            // needs min(a, b) + 2 to undercut a finite current entry
            if !merging && a.min(b).saturating_add(2) > self.row_max[u] {
                continue;
            }
            let a1 = a.saturating_add(1);
            let b1 = b.saturating_add(1);
            let row = &mut self.dist[u * n..(u + 1) * n];
            let mut mx = 0u16;
            for ((rv, &dj), &di) in row.iter_mut().zip(&old_j).zip(&old_i) {
                let cand = (a1.saturating_add(dj)).min(b1.saturating_add(di));
                if cand < *rv {
                    *rv = cand;
                }
                if *rv != UNREACHABLE && *rv > mx {
                    mx = *rv;
                }
            }
            self.row_max[u] = mx;
        }
        // mirror: since both endpoints of any improved pair are scanned, the
        // matrix stays symmetric; refresh columns for i and j only
        self.row_a = new_i;
        self.row_b = new_j;
    }

    fn remove_link(&mut self, i: usize, j: usize) {
        self.g.remove_link(i, j);
        let n = self.n;
        let old_i: Vec<u16> = self.row(i).to_vec();
        let old_j: Vec<u16> = self.row(j).to_vec();
        let mut new_i = std::mem::take(&mut self.row_a);
        let mut new_j = std::mem::take(&mut self.row_b);
        Self::bfs_into(&self.g, i, &mut new_i, &mut self.frontier, &mut self.seen, &mut self.next);
        Self::bfs_into(&self.g, j, &mut new_j, &mut self.frontier, &mut self.seen, &mut self.next);
        // a row can only change if one of its old shortest paths crossed (i, j)
        self.suspects.clear();
        for u in 0..n {
            if u == i || u == j {
                continue;
            }
            let a = old_i[u];
            let b = old_j[u];
            if a == UNREACHABLE && b == UNREACHABLE {
                continue;
            }
            if a.min(b).saturating_add(2) > self.row_max[u] {
                continue;
            }
            let via_ij = a.saturating_add(1);
            let via_ji = b.saturating_add(1);
            let row = &self.dist[u * n..(u + 1) * n];
            let mut touched = false;
            for v in 0..n {
                if row[v] != UNREACHABLE
                    && (row[v] == via_ij.saturating_add(old_j[v])
                        || row[v] == via_ji.saturating_add(old_i[v]))
                {
                    touched = true;
                    break;
                }
            }
            if touched {
                self.suspects.push(u as u32);
            }
        }
        self.write_row(i, &new_i);
        self.write_row(j, &new_j);
        let suspects = std::mem::take(&mut self.suspects);
        let mut fresh = vec![0u16; n];
        for &u in &suspects {
            Self::bfs_into(
                &self.g,
                u as usize,
                &mut fresh,
                &mut self.frontier,
                &mut self.seen,
                &mut self.next,
            );
            self.write_row(u as usize, &fresh);
        }
        self.suspects = suspects;
        self.row_a = new_i;
        self.row_b = new_j;
    }

    /// Full recomputation check of distances and row bounds; test support.
    pub fn validate_distances(&self) -> bool {
        let n = self.n;
        let words = n.div_ceil(64);
        let mut row = vec![0u16; n];
        let (mut f, mut s, mut x) = (vec![0u64; words], vec![0u64; words], vec![0u64; words]);
        for i in 0..n {
            Self::bfs_into(&self.g, i, &mut row, &mut f, &mut s, &mut x);
            if row != self.row(i) {
                return false;
            }
            let finite_max =
                row.iter().filter(|&&d| d != UNREACHABLE).max().copied().unwrap_or(0);
            if self.row_max[i] < finite_max {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone)]
pub struct MyopicOutcome {
    pub network: Network,
    pub stats: NetworkStats,
    pub periods: usize,
    pub formed: usize,
    pub severed: usize,
    pub seed: u64,
}

/// Run the myopic dynamics under uniform pair selection for the configured
/// horizon and report the final network with its statistics.
pub fn myopic_run(cfg: &MyopicConfig) -> Result<MyopicOutcome, BaselineError> {
    cfg.validate()?;
    let n = cfg.n();
    let horizon = cfg.resolved_horizon()?;
    let tv = TypeVector::from_counts(&cfg.type_counts);
    let mut engine = MyopicEngine::new(&tv, &cfg.params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match cfg.selection {
        SelectionMode::UniformRandom => {
            for _ in 0..horizon {
                let pair = crate::game::select_pair(n, &mut rng)?;
                engine.step_with(pair, cfg.reevaluate_existing);
            }
        }
        SelectionMode::Sweeps => {
            use rand::seq::SliceRandom;
            let pairs = crate::graph::pair_count(n);
            let sweeps = horizon.div_ceil(pairs);
            let mut order: Vec<usize> = (0..pairs).collect();
            for _ in 0..sweeps {
                order.shuffle(&mut rng);
                for &idx in &order {
                    engine.step_with(crate::graph::pair_from_index(n, idx), cfg.reevaluate_existing);
                }
            }
        }
    }
    let stats = stats(engine.network());
    Ok(MyopicOutcome {
        network: engine.g.clone(),
        stats,
        periods: horizon,
        formed: engine.formed,
        severed: engine.severed,
        seed: cfg.seed,
    })
}

/// Sequential batch over seeds; callers parallelize as needed.
pub fn myopic_run_batch(cfg: &MyopicConfig, seeds: &[u64]) -> Result<Vec<MyopicOutcome>, BaselineError> {
    seeds
        .iter()
        .map(|&seed| myopic_run(&MyopicConfig { seed, ..cfg.clone() }))
        .collect()
}

/// Mean and standard error of each reported statistic over a batch.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BatchSummary {
    pub runs: usize,
    pub mean_alcc: f64,
    pub se_alcc: f64,
    pub mean_gcc: f64,
    pub se_gcc: f64,
    pub mean_diameter: f64,
    pub se_diameter: f64,
    pub mean_p90: f64,
    pub se_p90: f64,
}

pub fn summarize(outcomes: &[MyopicOutcome]) -> BatchSummary {
    let k = outcomes.len().max(1) as f64;
    let mean_se = |xs: Vec<f64>| -> (f64, f64) {
        let mean = xs.iter().sum::<f64>() / k;
        if xs.len() < 2 {
            return (mean, 0.0);
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
        (mean, (var / k).sqrt())
    };
    let (mean_alcc, se_alcc) = mean_se(outcomes.iter().map(|o| o.stats.alcc).collect());
    let (mean_gcc, se_gcc) = mean_se(outcomes.iter().map(|o| o.stats.gcc).collect());
    let (mean_diameter, se_diameter) =
        mean_se(outcomes.iter().map(|o| o.stats.diameter as f64).collect());
    let (mean_p90, se_p90) = mean_se(outcomes.iter().map(|o| o.stats.p90_distance).collect());
    BatchSummary {
        runs: outcomes.len(),
        mean_alcc,
        se_alcc,
        mean_gcc,
        se_gcc,
        mean_diameter,
        se_diameter,
        mean_p90,
        se_p90,
    }
}

pub type MyopicAgentId = AgentId;
