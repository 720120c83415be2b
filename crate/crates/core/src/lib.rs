//! Dynamic network formation toolkit: a stochastic link-formation game with
//! automaton strategies and public monitoring, closed-form and brute-force
//! efficient-network analysis for the heterogeneous connections model,
//! exact equilibrium certification on small populations, and a myopic
//! pairwise-stability baseline.

pub mod numeric;

pub mod graph;
pub mod payoff;

pub mod efficiency;
pub mod game;

pub mod baseline;
pub mod equilibrium;
