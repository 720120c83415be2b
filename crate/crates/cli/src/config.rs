//! JSON configuration schema shared by the simulation commands, and its
//! conversion into engine configurations.

use crate::CliError;
use netform_core::baseline::{MyopicConfig, SelectionMode};
use netform_core::game::{AdmissiblePlan, DeviationInjection, SimConfig, StrategyKind};
use netform_core::graph::Network;
use netform_core::payoff::{PayoffParams, TypeVector};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypesSpec {
    pub benefits: Vec<f64>,
    #[serde(default)]
    pub counts: Option<Vec<usize>>,
    #[serde(default)]
    pub assignment: Option<Vec<usize>>,
}

impl TypesSpec {
    pub fn type_vector(&self) -> Result<TypeVector, CliError> {
        match (&self.counts, &self.assignment) {
            (Some(counts), None) => Ok(TypeVector::from_counts(counts)),
            (None, Some(assignment)) => {
                TypeVector::new(assignment.clone(), self.benefits.len())
                    .map_err(|e| CliError::Config(e.to_string()))
            }
            _ => Err(CliError::Config(
                "types: provide exactly one of `counts` or `assignment`".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffSpec {
    pub cost: f64,
    pub delta: f64,
}

impl PayoffSpec {
    pub fn params(&self, benefits: &[f64]) -> Result<PayoffParams, CliError> {
        PayoffParams::new(benefits.to_vec(), self.cost, self.delta)
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Network shorthand: a named shape or an explicit link list.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NetSpec {
    Named(String),
    Links { links: Vec<(usize, usize)> },
}

impl NetSpec {
    pub fn build(&self, n: usize) -> Result<Network, CliError> {
        match self {
            NetSpec::Named(name) => match name.as_str() {
                "empty" => Ok(Network::empty(n)),
                "clique" => Ok(Network::clique(n)),
                "star" => Ok(Network::star(n, 0)),
                "cycle" => Ok(Network::cycle(n)),
                other => Err(CliError::Config(format!(
                    "unknown network shape {other:?}; use empty/clique/star/cycle or {{\"links\": ...}}"
                ))),
            },
            NetSpec::Links { links } => {
                Network::from_links(n, links).map_err(|e| CliError::Config(e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategySpec {
    Complete {
        target: NetSpec,
    },
    Incomplete {
        plan: String,
        #[serde(default)]
        alpha_type: Option<usize>,
        #[serde(default)]
        prior: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateFile {
    pub seed: Option<u64>,
    #[serde(default)]
    pub agents: Option<usize>,
    #[serde(default)]
    pub types: Option<TypesSpec>,
    #[serde(default)]
    pub payoff: Option<PayoffSpec>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub punishment_k: Option<usize>,
    #[serde(default)]
    pub transition_j: Option<usize>,
    #[serde(default)]
    pub initial_network: Option<NetSpec>,
    #[serde(default)]
    pub strategy: Option<StrategySpec>,
    #[serde(default)]
    pub deviations: Vec<DeviationInjection>,
    #[serde(default)]
    pub record_trace: Option<bool>,
    /// Myopic mode: re-evaluate (and possibly sever) the selected pair's
    /// existing link. Off by default: formation-only dynamics come closest
    /// to the reference large-population statistics.
    #[serde(default)]
    pub reevaluate_existing: Option<bool>,
    /// Myopic mode: "uniform_random" (default) or "sweeps".
    #[serde(default)]
    pub selection: Option<SelectionMode>,
}

pub fn parse_file(path: &std::path::Path) -> Result<(SimulateFile, serde_json::Value), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let snapshot: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
        CliError::Config(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
    })?;
    let file: SimulateFile = serde_json::from_str(&text).map_err(|e| {
        CliError::Config(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
    })?;
    Ok((file, snapshot))
}

impl SimulateFile {
    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Config("missing required field `seed`".into()))
    }

    fn agent_count(&self) -> Result<usize, CliError> {
        if let Some(n) = self.agents {
            return Ok(n);
        }
        if let Some(types) = &self.types {
            if let Ok(tv) = types.type_vector() {
                return Ok(tv.n());
            }
        }
        Err(CliError::Config("provide `agents` or a types section that implies it".into()))
    }

    /// Assemble the formation-game configuration for a foresighted run.
    pub fn foresighted(&self, seed: u64) -> Result<SimConfig, CliError> {
        let n = self.agent_count()?;
        let strategy = match self.strategy.as_ref().ok_or_else(|| {
            CliError::Config("foresighted mode needs a `strategy` section".into())
        })? {
            StrategySpec::Complete { target } => {
                StrategyKind::Complete { target: target.build(n)? }
            }
            StrategySpec::Incomplete { plan, alpha_type, prior } => {
                if plan != "star_wheel" {
                    return Err(CliError::Config(format!(
                        "unknown plan {plan:?}; only \"star_wheel\" is built in"
                    )));
                }
                let types = self.types.as_ref().ok_or_else(|| {
                    CliError::Config("incomplete mode needs a `types` section".into())
                })?;
                let payoff = self.payoff.as_ref().ok_or_else(|| {
                    CliError::Config("incomplete mode needs a `payoff` section".into())
                })?;
                let tv = types.type_vector()?;
                let params = payoff.params(&types.benefits)?;
                let num_types = tv.num_types();
                let prior = prior.clone().unwrap_or_else(|| {
                    vec![1.0 / num_types as f64; num_types]
                });
                StrategyKind::Incomplete {
                    plan: AdmissiblePlan::StarWheel { alpha_type: alpha_type.unwrap_or(0) },
                    type_vector: tv,
                    params,
                    prior,
                }
            }
        };
        let initial = match &self.initial_network {
            None => Network::empty(n),
            Some(NetSpec::Named(name)) if name == "target" => match &strategy {
                StrategyKind::Complete { target } => target.clone(),
                StrategyKind::Incomplete { .. } => {
                    return Err(CliError::Config(
                        "initial_network \"target\" requires a complete-information strategy".into(),
                    ))
                }
            },
            Some(spec) => spec.build(n)?,
        };
        Ok(SimConfig {
            n,
            gamma: self.gamma.unwrap_or(0.95),
            strategy,
            k_punish: self.punishment_k.unwrap_or(1),
            j_transition: self.transition_j.unwrap_or(1),
            epsilon: self.epsilon.unwrap_or(0.0),
            seed,
            initial,
            horizon: self.horizon.unwrap_or(1000),
            record_trace: self.record_trace.unwrap_or(true),
            deviations: self.deviations.clone(),
        })
    }

    /// Assemble a myopic-dynamics configuration.
    pub fn myopic(&self, seed: u64) -> Result<MyopicConfig, CliError> {
        let types = self
            .types
            .as_ref()
            .ok_or_else(|| CliError::Config("myopic mode needs a `types` section".into()))?;
        let payoff = self
            .payoff
            .as_ref()
            .ok_or_else(|| CliError::Config("myopic mode needs a `payoff` section".into()))?;
        let counts = match (&types.counts, &types.assignment) {
            (Some(c), _) => c.clone(),
            (None, Some(assignment)) => {
                let mut counts = vec![0usize; types.benefits.len()];
                for &t in assignment {
                    if t >= counts.len() {
                        return Err(CliError::Config(format!("type {t} outside benefit table")));
                    }
                    counts[t] += 1;
                }
                counts
            }
            _ => return Err(CliError::Config("types: provide `counts` or `assignment`".into())),
        };
        Ok(MyopicConfig {
            params: payoff.params(&types.benefits)?,
            type_counts: counts,
            horizon: self.horizon,
            seed,
            selection: self.selection.unwrap_or(SelectionMode::UniformRandom),
            reevaluate_existing: self.reevaluate_existing.unwrap_or(false),
        })
    }
}
