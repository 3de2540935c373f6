use std::collections::hash_map::Entry;
use std::collections::HashMap;

use crate::dst::{masses_from_beliefs, BeliefFunction, Proposition};
use crate::graph::PrunedView;

use super::{DynamicsError, NetworkState, Strategy};

/// CUE weights of one agent: self-weight `α` and `β_ij(A)` per
/// (neighbor, conditioning set). Zero weights are omitted.
#[derive(Clone, Debug, PartialEq)]
pub struct CueWeights {
    pub alpha: f64,
    pub beta: Vec<(usize, Proposition, f64)>,
}

impl CueWeights {
    pub fn total(&self) -> f64 {
        self.alpha + self.beta.iter().map(|b| b.2).sum::<f64>()
    }

    fn isolated() -> Self {
        Self {
            alpha: 1.0,
            beta: Vec::new(),
        }
    }
}

pub fn cue_weights(i: usize, state: &NetworkState, pruned: &PrunedView) -> CueWeights {
    let beliefs: Vec<BeliefFunction> = state
        .opinions()
        .iter()
        .map(|o| o.belief_function())
        .collect();
    weights_with(i, state, pruned, &beliefs)
}

fn weights_with(
    i: usize,
    state: &NetworkState,
    pruned: &PrunedView,
    beliefs: &[BeliefFunction],
) -> CueWeights {
    let neighbors = pruned.neighbors(i);
    if neighbors.is_empty() {
        return CueWeights::isolated();
    }
    let alpha = state.alpha(i);
    let own = state.opinion(i);
    // A ∈ F̂_j: propositions the neighbor believes to some positive degree.
    let supported = |j: usize| {
        beliefs[j]
            .values()
            .iter()
            .enumerate()
            .filter(|(_, &b)| b > 0.0)
            .map(|(a, _)| Proposition(a as u32))
    };
    let mut beta = Vec::new();
    match state.agents()[i].strategy {
        Strategy::Receptive => {
            let c = (1.0 - alpha) / neighbors.len() as f64;
            for &j in neighbors {
                let theirs = state.opinion(j);
                for a in supported(j) {
                    let m = theirs.mass(a);
                    if m > 0.0 {
                        beta.push((j, a, c * m));
                    }
                }
            }
        }
        Strategy::Cautious => {
            let coverage: f64 = neighbors
                .iter()
                .flat_map(|&j| supported(j).map(|a| own.mass(a)))
                .sum();
            if coverage <= 0.0 {
                return CueWeights::isolated();
            }
            let mu = (1.0 - alpha) / coverage;
            for &j in neighbors {
                for a in supported(j) {
                    let m = own.mass(a);
                    if m > 0.0 {
                        beta.push((j, a, mu * m));
                    }
                }
            }
        }
    }
    CueWeights { alpha, beta }
}

/// `max_i (α_i + Σ_j β_ij(Θ))`, the per-step contraction factor for the
/// mass on `Θ`.
pub fn theta_contraction(state: &NetworkState, pruned: &PrunedView) -> f64 {
    let beliefs: Vec<BeliefFunction> = state
        .opinions()
        .iter()
        .map(|o| o.belief_function())
        .collect();
    let full = state.frame().full();
    (0..state.len())
        .map(|i| {
            let w = weights_with(i, state, pruned, &beliefs);
            w.alpha
                + w.beta
                    .iter()
                    .filter(|b| b.1 == full)
                    .map(|b| b.2)
                    .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// One synchronous CUE step on arbitrary bodies of evidence.
pub fn cue_step_general(state: &NetworkState) -> Result<NetworkState, DynamicsError> {
    step_general_with(state, &state.prune())
}

pub(super) fn step_general_with(
    state: &NetworkState,
    pruned: &PrunedView,
) -> Result<NetworkState, DynamicsError> {
    let frame = state.frame().clone();
    let beliefs: Vec<BeliefFunction> = state
        .opinions()
        .iter()
        .map(|o| o.belief_function())
        .collect();
    let mut conditionals: HashMap<(usize, Proposition), Vec<f64>> = HashMap::new();
    let mut next = Vec::with_capacity(state.len());
    for i in 0..state.len() {
        let w = weights_with(i, state, pruned, &beliefs);
        if w.beta.is_empty() {
            next.push(state.opinion(i).clone());
            continue;
        }
        let mut updated: Vec<f64> = beliefs[i].values().iter().map(|b| w.alpha * b).collect();
        for &(j, a, weight) in &w.beta {
            let c = match conditionals.entry((j, a)) {
                Entry::Occupied(e) => e.into_mut(),
                Entry::Vacant(e) => e.insert(beliefs[j].conditional_beliefs(a)?),
            };
            for (acc, c) in updated.iter_mut().zip(c.iter()) {
                *acc += weight * c;
            }
        }
        next.push(masses_from_beliefs(&frame, &updated)?);
    }
    Ok(state.advance(next))
}
