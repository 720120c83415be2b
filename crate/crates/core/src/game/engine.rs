//! Period loop of the formation game: pair selection, action assembly with
//! trembles and injected deviations, bilateral link updates, monitor and
//! belief updates, convergence bookkeeping, and trace recording.

use super::beliefs::Beliefs;
use super::monitor::{
    detect_deviation, monitor_update_cp, monitor_update_ic, CpPhase, IcPeriodContext, IcPhase,
    IcState,
};
use super::plan::AdmissiblePlan;
use super::strategy::{strategy_sc, strategy_sic, ActionContext};
use super::{check_admissible, select_pair, GameError};
use crate::graph::{pair_count, pair_index, Network};
use crate::payoff::{PayoffParams, TypeVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub const ENGINE_MAX_AGENTS: usize = 64;

/// Forced action override for one agent in one period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviationInjection {
    pub t: usize,
    pub agent: usize,
    pub action: ActionOverride,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionOverride {
    /// play 0 toward everyone
    SeverAll,
    /// play 1 toward everyone admissible
    FormAll,
}

#[derive(Debug, Clone)]
pub enum StrategyKind {
    /// Cooperate toward a fixed target under the cooperation/punishment monitor.
    Complete { target: Network },
    /// Experiment, transition, exploit under the incomplete-information monitor.
    Incomplete {
        plan: AdmissiblePlan,
        type_vector: TypeVector,
        params: PayoffParams,
        prior: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n: usize,
    pub gamma: f64,
    pub strategy: StrategyKind,
    pub k_punish: usize,
    pub j_transition: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub initial: Network,
    pub horizon: usize,
    pub record_trace: bool,
    pub deviations: Vec<DeviationInjection>,
}

impl SimConfig {
    fn validate(&self) -> Result<(), GameError> {
        if self.n < 2 {
            return Err(GameError::Config("need at least two agents".into()));
        }
        if self.n > ENGINE_MAX_AGENTS {
            return Err(GameError::SizeLimit { n: self.n, max: ENGINE_MAX_AGENTS });
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(GameError::Config(format!("gamma {} must lie in (0, 1)", self.gamma)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return Err(GameError::Config(format!("epsilon {} must lie in [0, 1)", self.epsilon)));
        }
        if self.k_punish < 1 {
            return Err(GameError::Config("punishment length K must be at least 1".into()));
        }
        if self.horizon < 1 {
            return Err(GameError::Config("horizon must be at least 1".into()));
        }
        if self.initial.n() != self.n {
            return Err(GameError::Config("initial network size mismatch".into()));
        }
        match &self.strategy {
            StrategyKind::Complete { target } => {
                if target.n() != self.n {
                    return Err(GameError::Config("target network size mismatch".into()));
                }
            }
            StrategyKind::Incomplete { type_vector, params, prior, .. } => {
                if type_vector.n() != self.n {
                    return Err(GameError::Config("type vector size mismatch".into()));
                }
                if params.benefits().len() < type_vector.num_types() {
                    return Err(GameError::Config("benefit table smaller than type set".into()));
                }
                if prior.len() != type_vector.num_types() {
                    return Err(GameError::Config("prior length must match the type set".into()));
                }
                if self.j_transition < 1 {
                    return Err(GameError::Config("transition length J must be at least 1".into()));
                }
            }
        }
        for d in &self.deviations {
            if d.agent >= self.n {
                return Err(GameError::Config(format!("deviation agent {} out of range", d.agent)));
            }
        }
        Ok(())
    }
}

/// Public signal shown in traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    Cooperation,
    Punishment,
    Ic(IcPhase),
}

impl Signal {
    pub fn label(self) -> &'static str {
        match self {
            Signal::Cooperation => "C",
            Signal::Punishment => "P",
            Signal::Ic(p) => p.label(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PeriodRecord {
    pub t: usize,
    pub pair: (usize, usize),
    pub signal: Signal,
    pub added: Vec<(usize, usize)>,
    pub removed: Vec<(usize, usize)>,
    /// incomplete-information runs: is information complete in the current
    /// non-solitary set, and how many non-solitary agents remain
    pub info_complete: Option<bool>,
    pub member_count: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Convergence {
    pub period: usize,
    pub network: Network,
}

#[derive(Debug, Clone)]
pub struct SimTrace {
    pub records: Vec<PeriodRecord>,
    pub signals: Vec<Signal>,
    pub link_counts: Vec<u32>,
    pub convergence: Option<Convergence>,
    pub convergence_periods: Vec<usize>,
    pub occupancy: f64,
    pub post_convergence_occupancy: Option<f64>,
    pub periods: usize,
    pub final_network: Network,
}

enum MonitorKind {
    Cp(CpPhase),
    Ic(IcState),
}

#[derive(Clone)]
struct PlanNets {
    target: Network,
    reward: Network,
    admissible: bool,
}

pub struct Engine {
    cfg: SimConfig,
    rng: ChaCha8Rng,
    g: Network,
    t: usize,
    monitor: MonitorKind,
    beliefs: Option<Beliefs>,
    confirmed: Vec<bool>,
    confirmed_count: usize,
    converged_streak: bool,
    convergence_periods: Vec<usize>,
    first_convergence_network: Option<Network>,
    target_hits: usize,
    hits_after_first_convergence: usize,
    injections: HashMap<usize, Vec<(usize, ActionOverride)>>,
    plan_cache: HashMap<u64, PlanNets>,
    signals: Vec<Signal>,
    link_counts: Vec<u32>,
}

impl Engine {
    pub fn new(cfg: SimConfig) -> Result<Self, GameError> {
        cfg.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let g = cfg.initial.clone();
        let monitor = match &cfg.strategy {
            StrategyKind::Complete { .. } => MonitorKind::Cp(CpPhase::Cooperation),
            StrategyKind::Incomplete { .. } => MonitorKind::Ic(IcState::initial(cfg.n)),
        };
        let beliefs = match &cfg.strategy {
            StrategyKind::Complete { .. } => None,
            StrategyKind::Incomplete { type_vector, prior, .. } => {
                let mut b = Beliefs::new(type_vector, prior.clone());
                // links present at the start are public knowledge among their endpoints
                b.observe_network(&g, type_vector);
                Some(b)
            }
        };
        let mut injections: HashMap<usize, Vec<(usize, ActionOverride)>> = HashMap::new();
        for d in &cfg.deviations {
            injections.entry(d.t).or_default().push((d.agent, d.action));
        }
        let confirmed = vec![false; pair_count(cfg.n)];
        Ok(Engine {
            g,
            rng,
            t: 0,
            monitor,
            beliefs,
            confirmed,
            confirmed_count: 0,
            converged_streak: false,
            convergence_periods: Vec::new(),
            first_convergence_network: None,
            target_hits: 0,
            hits_after_first_convergence: 0,
            injections,
            plan_cache: HashMap::new(),
            signals: Vec::new(),
            link_counts: Vec::new(),
            cfg,
        })
    }

    pub fn network(&self) -> &Network {
        &self.g
    }

    pub fn period(&self) -> usize {
        self.t
    }

    pub fn current_signal(&self) -> Signal {
        match &self.monitor {
            MonitorKind::Cp(p) => match p {
                CpPhase::Cooperation => Signal::Cooperation,
                CpPhase::Punishment { .. } => Signal::Punishment,
            },
            MonitorKind::Ic(s) => Signal::Ic(s.phase),
        }
    }

    pub fn beliefs(&self) -> Option<&Beliefs> {
        self.beliefs.as_ref()
    }

    fn plan_nets(&mut self, members: u64) -> Result<PlanNets, GameError> {
        if let Some(hit) = self.plan_cache.get(&members) {
            return Ok(hit.clone());
        }
        let StrategyKind::Incomplete { plan, type_vector, params, .. } = &self.cfg.strategy else {
            return Err(GameError::Config("plan requested for a complete-information run".into()));
        };
        let n = self.cfg.n;
        let member_list: Vec<usize> = (0..n).filter(|&i| members >> i & 1 == 1).collect();
        let member_types: Vec<usize> = member_list.iter().map(|&i| type_vector.type_of(i)).collect();
        let nets = match plan.nets_for(n, &member_list, &member_types) {
            Some((target, reward)) => {
                let admissible = check_admissible(
                    plan,
                    n,
                    &member_list,
                    type_vector.num_types(),
                    params,
                )?
                .admissible;
                PlanNets { target, reward, admissible }
            }
            None => PlanNets {
                target: Network::empty(n),
                reward: Network::empty(n),
                admissible: false,
            },
        };
        self.plan_cache.insert(members, nets.clone());
        Ok(nets)
    }

    /// Advance one period and return its record.
    pub fn step(&mut self) -> Result<PeriodRecord, GameError> {
        self.t += 1;
        let t = self.t;
        let n = self.cfg.n;
        let pair = select_pair(n, &mut self.rng)?;
        let pair = (pair.0.min(pair.1), pair.0.max(pair.1));

        // incomplete-information data for the current member set
        let ic_data = match &self.monitor {
            MonitorKind::Ic(state) => {
                let state = *state;
                Some((state, self.plan_nets(state.members)?))
            }
            MonitorKind::Cp(_) => None,
        };

        // tremble draws, fixed order: agent flag first, then per admissible partner
        let mut trembles: Vec<Option<u64>> = vec![None; n];
        if self.cfg.epsilon > 0.0 {
            let flags: Vec<bool> =
                (0..n).map(|_| self.rng.random_bool(self.cfg.epsilon)).collect();
            for (i, &flag) in flags.iter().enumerate() {
                if !flag {
                    continue;
                }
                let mut bits = 0u64;
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let admissible =
                        self.g.has_link(i, j) || (i.min(j), i.max(j)) == pair;
                    if admissible && self.rng.random::<bool>() {
                        bits |= 1 << j;
                    }
                }
                trembles[i] = Some(bits);
            }
        }

        let mut overrides: HashMap<usize, ActionOverride> = HashMap::new();
        if let Some(list) = self.injections.get(&t) {
            for &(agent, ov) in list {
                overrides.insert(agent, ov);
            }
        }

        let g_prev = self.g.clone();
        let action = |i: usize, j: usize| -> bool {
            let ctx = ActionContext {
                selected: (i.min(j), i.max(j)) == pair,
                linked: g_prev.has_link(i, j),
            };
            if let Some(ov) = overrides.get(&i) {
                return match ov {
                    ActionOverride::SeverAll => false,
                    ActionOverride::FormAll => ctx.admissible(),
                };
            }
            if let Some(bits) = trembles[i] {
                return ctx.admissible() && bits >> j & 1 == 1;
            }
            match (&self.cfg.strategy, &ic_data) {
                (StrategyKind::Complete { target }, _) => {
                    let MonitorKind::Cp(phase) = &self.monitor else { unreachable!() };
                    strategy_sc(target, *phase, ctx, (i, j))
                }
                (StrategyKind::Incomplete { .. }, Some((state, nets))) => strategy_sic(
                    state,
                    nets.admissible,
                    &nets.reward,
                    &nets.target,
                    ctx,
                    (i, j),
                ),
                _ => unreachable!(),
            }
        };

        // bilateral consent on the selected pair; unilateral severance elsewhere
        let mut g_now = g_prev.clone();
        let mut removed = Vec::new();
        let mut added = Vec::new();
        for (a, b) in g_prev.links() {
            if !(action(a, b) && action(b, a)) {
                g_now.remove_link(a, b);
                removed.push((a, b));
            }
        }
        if !g_prev.has_link(pair.0, pair.1) && action(pair.0, pair.1) && action(pair.1, pair.0) {
            g_now.add_link(pair.0, pair.1);
            added.push(pair);
        }

        // monitor, beliefs, and convergence bookkeeping
        let (signal, info_complete, member_count) = match &self.monitor {
            MonitorKind::Cp(phase) => {
                let phase = *phase;
                let StrategyKind::Complete { target } = &self.cfg.strategy else { unreachable!() };
                let detected = if phase.is_cooperation() {
                    detect_deviation(target, &g_prev, pair, &g_now)?
                } else {
                    false
                };
                let next = monitor_update_cp(phase, detected, self.cfg.k_punish);
                if phase.is_cooperation() {
                    if detected {
                        self.confirmed.fill(false);
                        self.confirmed_count = 0;
                    } else if target.has_link(pair.0, pair.1) && g_now.has_link(pair.0, pair.1) {
                        let idx = pair_index(n, pair.0, pair.1);
                        if !self.confirmed[idx] {
                            self.confirmed[idx] = true;
                            self.confirmed_count += 1;
                        }
                    }
                }
                let converged_now = self.confirmed_count == target.link_count()
                    && g_now == *target
                    && next.is_cooperation();
                if converged_now && !self.converged_streak {
                    self.convergence_periods.push(t);
                    if self.first_convergence_network.is_none() {
                        self.first_convergence_network = Some(target.clone());
                    }
                }
                self.converged_streak = converged_now;
                if g_now == *target {
                    self.target_hits += 1;
                    if let Some(&first) = self.convergence_periods.first() {
                        if t > first {
                            self.hits_after_first_convergence += 1;
                        }
                    }
                }
                self.monitor = MonitorKind::Cp(next);
                let sig = match next {
                    CpPhase::Cooperation => Signal::Cooperation,
                    CpPhase::Punishment { .. } => Signal::Punishment,
                };
                (sig, None, None)
            }
            MonitorKind::Ic(state) => {
                let state = *state;
                let (_, nets) = ic_data.as_ref().expect("ic data prepared above");
                let StrategyKind::Incomplete { type_vector, .. } = &self.cfg.strategy else {
                    unreachable!()
                };
                let beliefs = self.beliefs.as_mut().expect("ic runs carry beliefs");
                beliefs.observe_network(&g_now, type_vector);
                let beliefs = self.beliefs.as_ref().expect("ic runs carry beliefs");
                let complete = |m: u64| beliefs.info_complete_within(m);
                let ctx = IcPeriodContext {
                    g_prev: &g_prev,
                    g_now: &g_now,
                    pair,
                    reward_net: &nets.reward,
                    target_net: &nets.target,
                    info_complete: &complete,
                    j_transition: self.cfg.j_transition,
                    k_punish: self.cfg.k_punish,
                };
                let next = monitor_update_ic(&state, &ctx);
                // confirmation bookkeeping inside the exploitation phase
                let phase_stable = state.phase == IcPhase::ExploitCoop
                    && next.phase == IcPhase::ExploitCoop
                    && next.members == state.members;
                if !phase_stable {
                    self.confirmed.fill(false);
                    self.confirmed_count = 0;
                } else if nets.target.has_link(pair.0, pair.1) && g_now.has_link(pair.0, pair.1) {
                    let idx = pair_index(n, pair.0, pair.1);
                    if !self.confirmed[idx] {
                        self.confirmed[idx] = true;
                        self.confirmed_count += 1;
                    }
                }
                let converged_now = next.phase == IcPhase::ExploitCoop
                    && self.confirmed_count == nets.target.link_count()
                    && g_now == nets.target;
                if converged_now && !self.converged_streak {
                    self.convergence_periods.push(t);
                    if self.first_convergence_network.is_none() {
                        self.first_convergence_network = Some(nets.target.clone());
                    }
                }
                self.converged_streak = converged_now;
                if g_now == nets.target {
                    self.target_hits += 1;
                    if let Some(&first) = self.convergence_periods.first() {
                        if t > first {
                            self.hits_after_first_convergence += 1;
                        }
                    }
                }
                let complete_now = beliefs.info_complete_within(next.members);
                let members = next.member_count();
                self.monitor = MonitorKind::Ic(next);
                (Signal::Ic(next.phase), Some(complete_now), Some(members))
            }
        };

        self.g = g_now;
        self.signals.push(signal);
        self.link_counts.push(self.g.link_count() as u32);
        Ok(PeriodRecord { t, pair, signal, added, removed, info_complete, member_count })
    }

    pub fn into_trace(self, records: Vec<PeriodRecord>) -> SimTrace {
        let periods = self.t;
        let occupancy = if periods > 0 { self.target_hits as f64 / periods as f64 } else { 0.0 };
        let post = self.convergence_periods.first().and_then(|&tc| {
            if periods > tc {
                Some(self.hits_after_first_convergence as f64 / (periods - tc) as f64)
            } else {
                None
            }
        });
        let convergence = self
            .convergence_periods
            .first()
            .zip(self.first_convergence_network)
            .map(|(&period, network)| Convergence { period, network });
        SimTrace {
            records,
            signals: self.signals,
            link_counts: self.link_counts,
            convergence,
            convergence_periods: self.convergence_periods,
            occupancy,
            post_convergence_occupancy: post,
            periods,
            final_network: self.g,
        }
    }
}

/// Run a configuration to its horizon.
pub fn run(cfg: SimConfig) -> Result<SimTrace, GameError> {
    let record = cfg.record_trace;
    let horizon = cfg.horizon;
    let mut engine = Engine::new(cfg)?;
    let mut records = Vec::new();
    for _ in 0..horizon {
        let rec = engine.step()?;
        if record {
            records.push(rec);
        }
    }
    Ok(engine.into_trace(records))
}
