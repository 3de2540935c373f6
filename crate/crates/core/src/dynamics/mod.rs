//! Opinion updates: the general CUE via Fagin-Halpern conditionals, and the
//! closed-form confidence-matrix iterations for p.m.f. and Dirichlet agents.

mod cue;
mod matrix;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dst::{validate, BodyOfEvidence, DstError, Proposition, ALGEBRAIC_TOL};
use crate::graph::{DirectedGraph, GraphError, PrunedView};

pub use cue::{cue_step_general, cue_weights, theta_contraction, CueWeights};
pub use matrix::{build_w_dirichlet, build_w_pmf, step_dirichlet, step_pmf};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("{agents} agents for a graph with {nodes} nodes")]
    AgentCountMismatch { agents: usize, nodes: usize },
    #[error("agent {0} has an opinion on a different frame")]
    FrameMismatch(usize),
    #[error("agent {agent}: {reason}")]
    InvalidAgent { agent: usize, reason: String },
    #[error("agent {0} does not hold a Bayesian opinion")]
    NotBayesian(usize),
    #[error("agent {0} does not hold a Dirichlet opinion")]
    NotDirichlet(usize),
    #[error("network has no agents")]
    Empty,
    #[error(transparent)]
    Dst(#[from] DstError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Weights follow the neighbor's masses. Opinion followers.
    #[default]
    Receptive,
    /// Weights follow the agent's own masses. Opinion leaders.
    Cautious,
}

/// Which update rule drives the network.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    General,
    Pmf,
    Dirichlet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentSpec {
    pub strategy: Strategy,
    pub alpha: f64,
    pub epsilon: f64,
    pub initial: BodyOfEvidence,
}

impl AgentSpec {
    pub fn new(strategy: Strategy, alpha: f64, epsilon: f64, initial: BodyOfEvidence) -> Self {
        Self {
            strategy,
            alpha,
            epsilon,
            initial,
        }
    }

    pub fn is_leader(&self) -> bool {
        self.strategy == Strategy::Cautious
    }
}

/// Per-step self-weight override: `(agent, step) -> α`.
pub type AlphaHook = Arc<dyn Fn(usize, usize) -> f64 + Send + Sync>;

/// Opinions of every agent at step `k`, with the fixed agent specs and graph.
#[derive(Clone)]
pub struct NetworkState {
    step: usize,
    opinions: Vec<BodyOfEvidence>,
    agents: Arc<[AgentSpec]>,
    graph: Arc<DirectedGraph>,
    /// Unordered adjacent pairs, sorted; the graph never changes.
    pairs: Arc<[(usize, usize)]>,
    /// For each agent, the index into `pairs` of every incoming neighbor.
    pair_of_edge: Arc<[Vec<usize>]>,
    alpha_hook: Option<AlphaHook>,
}

impl fmt::Debug for NetworkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NetworkState")
            .field("step", &self.step)
            .field("opinions", &self.opinions)
            .field("agents", &self.agents)
            .field("graph", &self.graph)
            .field("alpha_hook", &self.alpha_hook.is_some())
            .finish()
    }
}

impl NetworkState {
    /// Initial state from the agents' starting opinions.
    pub fn new(graph: DirectedGraph, agents: Vec<AgentSpec>) -> Result<Self, DynamicsError> {
        if agents.len() != graph.node_count() {
            return Err(DynamicsError::AgentCountMismatch {
                agents: agents.len(),
                nodes: graph.node_count(),
            });
        }
        let first = agents.first().ok_or(DynamicsError::Empty)?;
        let frame = first.initial.frame().clone();
        for (i, a) in agents.iter().enumerate() {
            let invalid = |reason: String| DynamicsError::InvalidAgent { agent: i, reason };
            if !a.initial.frame().same_as(&frame) {
                return Err(DynamicsError::FrameMismatch(i));
            }
            if !(0.0..=1.0).contains(&a.alpha) {
                return Err(invalid(format!("alpha {} outside [0, 1]", a.alpha)));
            }
            if !(0.0..=1.0).contains(&a.epsilon) {
                return Err(invalid(format!("epsilon {} outside [0, 1]", a.epsilon)));
            }
            let report = validate(&a.initial);
            if !report.valid {
                return Err(invalid(format!(
                    "invalid opinion (total mass {}, m(∅) = {})",
                    report.total_mass,
                    a.initial.masses()[0]
                )));
            }
        }
        let opinions = agents.iter().map(|a| a.initial.clone()).collect();
        let pairs: Arc<[(usize, usize)]> = graph.undirected_pairs().into();
        let pair_of_edge = (0..graph.node_count())
            .map(|i| {
                graph
                    .neighbors(i)
                    .expect("node in range")
                    .iter()
                    .map(|&j| {
                        pairs
                            .binary_search(&(i.min(j), i.max(j)))
                            .expect("edge present in graph")
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            step: 0,
            opinions,
            agents: agents.into(),
            pairs,
            pair_of_edge,
            graph: Arc::new(graph),
            alpha_hook: None,
        })
    }

    pub fn with_alpha_hook(mut self, hook: AlphaHook) -> Self {
        self.alpha_hook = Some(hook);
        self
    }

    /// Same network with every bound of confidence replaced.
    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        let agents: Vec<AgentSpec> = self
            .agents
            .iter()
            .map(|a| AgentSpec {
                epsilon,
                ..a.clone()
            })
            .collect();
        Self {
            agents: agents.into(),
            ..self.clone()
        }
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn opinions(&self) -> &[BodyOfEvidence] {
        &self.opinions
    }

    pub fn opinion(&self, i: usize) -> &BodyOfEvidence {
        &self.opinions[i]
    }

    pub fn agents(&self) -> &[AgentSpec] {
        &self.agents
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.opinions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opinions.is_empty()
    }

    pub fn frame(&self) -> &crate::dst::FrameOfDiscernment {
        self.opinions[0].frame()
    }

    /// Self-weight of agent `i` at the current step.
    pub fn alpha(&self, i: usize) -> f64 {
        match &self.alpha_hook {
            Some(hook) => hook(i, self.step),
            None => self.agents[i].alpha,
        }
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.agents.iter().map(|a| a.epsilon).collect()
    }

    pub fn leaders(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.agents[i].is_leader())
            .collect()
    }

    /// Bounded-confidence view of the graph for the current opinions.
    pub fn prune(&self) -> PrunedView {
        let distances: Vec<f64> = self
            .pairs
            .iter()
            .map(|&(i, j)| {
                crate::dst::jousselme_distance(&self.opinions[i], &self.opinions[j])
                    .expect("opinions share a frame")
            })
            .collect();
        let mut view = PrunedView::with_capacity(self.len(), self.graph.edge_count());
        for (i, idx) in self.pair_of_edge.iter().enumerate() {
            let eps = self.agents[i].epsilon;
            for (&j, &k) in self
                .graph
                .neighbors(i)
                .expect("node in range")
                .iter()
                .zip(idx)
            {
                if distances[k] <= eps {
                    view.push(j);
                }
            }
            view.close_row();
        }
        view
    }

    /// `π(B)`: every agent's mass on `prop`.
    pub fn profile(&self, prop: Proposition) -> OpinionProfile {
        OpinionProfile {
            proposition: prop,
            values: self.opinions.iter().map(|o| o.mass(prop)).collect(),
        }
    }

    /// Next state with the given opinions.
    pub(crate) fn advance(&self, opinions: Vec<BodyOfEvidence>) -> Self {
        Self {
            step: self.step + 1,
            opinions,
            agents: Arc::clone(&self.agents),
            graph: Arc::clone(&self.graph),
            pairs: Arc::clone(&self.pairs),
            pair_of_edge: Arc::clone(&self.pair_of_edge),
            alpha_hook: self.alpha_hook.clone(),
        }
    }

    /// Replace the opinions without touching the step counter.
    pub fn with_opinions(&self, opinions: Vec<BodyOfEvidence>) -> Result<Self, DynamicsError> {
        if opinions.len() != self.len() {
            return Err(DynamicsError::AgentCountMismatch {
                agents: opinions.len(),
                nodes: self.len(),
            });
        }
        for (i, o) in opinions.iter().enumerate() {
            if !o.frame().same_as(self.frame()) {
                return Err(DynamicsError::FrameMismatch(i));
            }
        }
        Ok(Self {
            opinions,
            ..self.clone()
        })
    }

    pub(crate) fn require_bayesian(&self) -> Result<(), DynamicsError> {
        match self
            .opinions
            .iter()
            .position(|o| !o.is_bayesian(ALGEBRAIC_TOL))
        {
            Some(i) => Err(DynamicsError::NotBayesian(i)),
            None => Ok(()),
        }
    }

    pub(crate) fn require_dirichlet(&self) -> Result<(), DynamicsError> {
        match self
            .opinions
            .iter()
            .position(|o| !o.is_dirichlet(ALGEBRAIC_TOL))
        {
            Some(i) => Err(DynamicsError::NotDirichlet(i)),
            None => Ok(()),
        }
    }
}

/// `π(B)_k`: the masses all agents assign to one proposition.
#[derive(Clone, Debug, PartialEq)]
pub struct OpinionProfile {
    pub proposition: Proposition,
    pub values: Vec<f64>,
}

/// Per-step weight matrix `W_k` (p.m.f.) or `W̆_k` (Dirichlet).
#[derive(Clone, Debug, PartialEq)]
pub struct ConfidenceMatrix {
    pub matrix: DMatrix<f64>,
    /// Rows are expected to sum to one.
    pub stochastic: bool,
}

impl ConfidenceMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.matrix.row_iter().map(|r| r.sum()).collect()
    }
}

/// Everything produced by one synchronous update.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub state: NetworkState,
    pub pruned: PrunedView,
    pub matrix: Option<ConfidenceMatrix>,
}

/// One step of the chosen engine. Pruning uses the opinions before the step.
pub fn step(engine: Engine, state: &NetworkState) -> Result<StepOutcome, DynamicsError> {
    step_with(engine, state, true)
}

/// Like [`step`], but only materialises the dense confidence matrix when
/// `keep_matrix` is set.
pub fn step_with(
    engine: Engine,
    state: &NetworkState,
    keep_matrix: bool,
) -> Result<StepOutcome, DynamicsError> {
    let pruned = state.prune();
    let (next, matrix) = match engine {
        Engine::General => (cue::step_general_with(state, &pruned)?, None),
        Engine::Pmf | Engine::Dirichlet => {
            let dirichlet = engine == Engine::Dirichlet;
            let w = if dirichlet {
                matrix::sparse_w_dirichlet(state, &pruned)?
            } else {
                matrix::sparse_w_pmf(state, &pruned)?
            };
            let next = matrix::apply(state, &w, dirichlet);
            (next, keep_matrix.then(|| w.to_dense()))
        }
    };
    Ok(StepOutcome {
        state: next,
        pruned,
        matrix,
    })
}
