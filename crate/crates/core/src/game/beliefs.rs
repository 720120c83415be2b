//! Per-agent knowledge of other agents' types. An agent always knows her own
//! type, learns a partner's type the first time a link forms between them,
//! and never forgets. Off-path events leave priors untouched.

use crate::graph::Network;
use crate::payoff::TypeVector;

#[derive(Debug, Clone, PartialEq)]
pub struct Beliefs {
    n: usize,
    /// known[i * n + j] = Some(type of j) once i has observed it
    known: Vec<Option<usize>>,
    /// common prior over the type set, shared by every agent
    prior: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeliefEvent {
    /// a link between i and j existed this period
    LinkFormed { i: usize, j: usize },
    /// a public signal with no link information
    Signal,
}

impl Beliefs {
    /// Fresh beliefs: everyone knows her own type only.
    pub fn new(tv: &TypeVector, prior: Vec<f64>) -> Self {
        let n = tv.n();
        let mut known = vec![None; n * n];
        for i in 0..n {
            known[i * n + i] = Some(tv.type_of(i));
        }
        Beliefs { n, known, prior }
    }

    pub fn knows(&self, i: usize, j: usize) -> bool {
        self.known[i * self.n + j].is_some()
    }

    pub fn known_type(&self, i: usize, j: usize) -> Option<usize> {
        self.known[i * self.n + j]
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn observe_link(&mut self, i: usize, j: usize, tv: &TypeVector) {
        self.known[i * self.n + j] = Some(tv.type_of(j));
        self.known[j * self.n + i] = Some(tv.type_of(i));
    }

    /// Record every link present in `g`; idempotent.
    pub fn observe_network(&mut self, g: &Network, tv: &TypeVector) {
        for (i, j) in g.links() {
            self.observe_link(i, j, tv);
        }
    }

    /// True when every agent in the mask knows every other member's type.
    pub fn info_complete_within(&self, members: u64) -> bool {
        for i in 0..self.n {
            if members >> i & 1 == 0 {
                continue;
            }
            for j in 0..self.n {
                if i != j && members >> j & 1 == 1 && !self.knows(i, j) {
                    return false;
                }
            }
        }
        true
    }
}

/// Functional update: link formation reveals both types to both endpoints;
/// everything else leaves the beliefs unchanged.
pub fn belief_update(beliefs: &Beliefs, event: BeliefEvent, tv: &TypeVector) -> Beliefs {
    let mut next = beliefs.clone();
    if let BeliefEvent::LinkFormed { i, j } = event {
        next.observe_link(i, j, tv);
    }
    next
}
