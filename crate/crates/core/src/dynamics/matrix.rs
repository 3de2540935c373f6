use nalgebra::DMatrix;

use crate::dst::BodyOfEvidence;
use crate::graph::PrunedView;

use super::{ConfidenceMatrix, DynamicsError, NetworkState, Strategy};

/// Row-sparse confidence weights: row `i` lists `(j, w_ij)` for its
/// nonzero entries.
#[derive(Clone, Debug)]
pub(super) struct SparseW {
    offsets: Vec<usize>,
    entries: Vec<(usize, f64)>,
    stochastic: bool,
}

impl SparseW {
    fn new(n: usize, nnz: usize, stochastic: bool) -> Self {
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        Self {
            offsets,
            entries: Vec::with_capacity(nnz),
            stochastic,
        }
    }

    fn close_row(&mut self) {
        self.offsets.push(self.entries.len());
    }

    fn rows(&self) -> impl Iterator<Item = &[(usize, f64)]> {
        self.offsets.windows(2).map(|w| &self.entries[w[0]..w[1]])
    }

    pub(super) fn to_dense(&self) -> ConfidenceMatrix {
        let n = self.offsets.len() - 1;
        let mut w = DMatrix::zeros(n, n);
        for (i, row) in self.rows().enumerate() {
            for &(j, v) in row {
                w[(i, j)] = v;
            }
        }
        ConfidenceMatrix {
            matrix: w,
            stochastic: self.stochastic,
        }
    }
}

pub(super) fn sparse_w_pmf(
    state: &NetworkState,
    pruned: &PrunedView,
) -> Result<SparseW, DynamicsError> {
    state.require_bayesian()?;
    let n = state.len();
    let mut w = SparseW::new(n, n + pruned.edge_count(), true);
    for i in 0..n {
        let neighbors = pruned.neighbors(i);
        if neighbors.is_empty() || state.agents()[i].strategy == Strategy::Cautious {
            w.entries.push((i, 1.0));
        } else {
            let alpha = state.alpha(i);
            let share = (1.0 - alpha) / neighbors.len() as f64;
            w.entries.push((i, alpha));
            w.entries.extend(neighbors.iter().map(|&j| (j, share)));
        }
        w.close_row();
    }
    Ok(w)
}

pub(super) fn sparse_w_dirichlet(
    state: &NetworkState,
    pruned: &PrunedView,
) -> Result<SparseW, DynamicsError> {
    state.require_dirichlet()?;
    let full = state.frame().full();
    let n = state.len();
    let mut w = SparseW::new(n, n + pruned.edge_count(), false);
    for i in 0..n {
        let neighbors = pruned.neighbors(i);
        if neighbors.is_empty() {
            w.entries.push((i, 1.0));
            w.close_row();
            continue;
        }
        let alpha = state.alpha(i);
        let share = (1.0 - alpha) / neighbors.len() as f64;
        match state.agents()[i].strategy {
            Strategy::Receptive => {
                w.entries.push((i, alpha));
                w.entries.extend(
                    neighbors
                        .iter()
                        .map(|&j| (j, share * (1.0 + state.opinion(j).mass(full)))),
                );
            }
            Strategy::Cautious => {
                w.entries.push((i, 1.0));
                let own = state.opinion(i).mass(full);
                w.entries
                    .extend(neighbors.iter().map(|&j| (j, share * own)));
            }
        }
        w.close_row();
    }
    Ok(w)
}

/// `W_k` for p.m.f. opinions: receptive rows put `α` on the diagonal and
/// split `1 − α` evenly over retained neighbors; cautious rows are identity.
pub fn build_w_pmf(
    state: &NetworkState,
    pruned: &PrunedView,
) -> Result<ConfidenceMatrix, DynamicsError> {
    Ok(sparse_w_pmf(state, pruned)?.to_dense())
}

/// `W̆_k` for Dirichlet opinions. Receptive: `w̆_ij = (1 − α)(1 + m_j(Θ))/|N|`;
/// cautious: unit diagonal and `w̆_ij = (1 − α) m_i(Θ)/|N|`.
pub fn build_w_dirichlet(
    state: &NetworkState,
    pruned: &PrunedView,
) -> Result<ConfidenceMatrix, DynamicsError> {
    Ok(sparse_w_dirichlet(state, pruned)?.to_dense())
}

/// Apply `W` to every singleton profile. With `theta_remainder` the mass on
/// `Θ` becomes whatever the singletons leave over.
pub(super) fn apply(state: &NetworkState, w: &SparseW, theta_remainder: bool) -> NetworkState {
    let frame = state.frame();
    let full = frame.full().index();
    let singletons: Vec<usize> = frame.singletons().map(|p| p.index()).collect();
    let next = w
        .rows()
        .map(|row| {
            let mut masses = vec![0.0; frame.power_set_len()];
            for &(j, weight) in row {
                let theirs = state.opinion(j).masses();
                for &s in &singletons {
                    masses[s] += weight * theirs[s];
                }
            }
            if theta_remainder {
                let assigned: f64 = singletons.iter().map(|&s| masses[s]).sum();
                masses[full] = 1.0 - assigned;
            }
            BodyOfEvidence::from_masses(frame.clone(), masses).expect("dense mass vector")
        })
        .collect();
    state.advance(next)
}

/// One p.m.f. step, `π(θ_p)_{k+1} = W_k π(θ_p)_k`.
pub fn step_pmf(state: &NetworkState) -> Result<NetworkState, DynamicsError> {
    let w = sparse_w_pmf(state, &state.prune())?;
    Ok(apply(state, &w, false))
}

/// One Dirichlet step, `π(θ_p)_{k+1} = W̆_k π(θ_p)_k`, with
/// `m(Θ) = 1 − Σ_p m(θ_p)`.
pub fn step_dirichlet(state: &NetworkState) -> Result<NetworkState, DynamicsError> {
    let w = sparse_w_dirichlet(state, &state.prune())?;
    Ok(apply(state, &w, true))
}
