//! The stochastic formation engine: uniform pair selection, simultaneous
//! consent moves with unilateral severance, the cooperation/punishment
//! monitoring automaton and its incomplete-information extension, the
//! corresponding automaton strategies, trembles, and belief updating.

mod beliefs;
mod engine;
mod monitor;
mod plan;
mod strategy;

pub use beliefs::{belief_update, BeliefEvent, Beliefs};
pub use engine::{
    run, ActionOverride, Convergence, DeviationInjection, Engine, PeriodRecord, Signal, SimConfig,
    SimTrace, StrategyKind,
};
pub use monitor::{
    detect_deviation, monitor_update_cp, monitor_update_ic, CpPhase, IcPeriodContext, IcPhase,
    IcState,
};
pub use plan::{
    agent_set_admissible, check_admissible, is_partial_equilibrium, AdmissibilityReport,
    AdmissibilityViolation, AdmissiblePlan,
};
pub use strategy::{strategy_sc, strategy_sic, ActionContext};

use crate::graph::{pair_count, pair_from_index};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GameError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("inconsistent transition: {0}")]
    Consistency(String),
    #[error("population {n} exceeds the limit {max} for this operation")]
    SizeLimit { n: usize, max: usize },
    #[error(transparent)]
    Payoff(#[from] crate::payoff::PayoffError),
}

/// Draw an unordered pair uniformly from the n(n-1)/2 possibilities,
/// advancing the deterministic generator state.
pub fn select_pair<R: Rng>(n: usize, rng: &mut R) -> Result<(usize, usize), GameError> {
    if n < 2 {
        return Err(GameError::Config("pair selection needs at least two agents".into()));
    }
    let idx = rng.random_range(0..pair_count(n));
    Ok(pair_from_index(n, idx))
}
