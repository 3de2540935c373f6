//! Convergence, consensus and cluster detection, left products of
//! confidence matrices, and leader-chain (ODC) verification.

mod clusters;
mod odc;

use nalgebra::DMatrix;

pub use clusters::{detect_clusters, ClusterReport};
pub use odc::{
    classify_odc, verify_theorem1, verify_theorem2, OdcKind, OdcPartition, Theorem1Report,
    Theorem2Report, VerifierInput,
};

use crate::dst::BodyOfEvidence;
use crate::dynamics::OpinionProfile;

/// Default finite-run surrogates for limits.
pub const STEP_TOL: f64 = 1e-10;
pub const PERSISTENCE: usize = 10;
pub const MAX_ITERATIONS: usize = 10_000;
pub const CLUSTER_TOL: f64 = 1e-3;
pub const RANK_ONE_TOL: f64 = 1e-8;
pub const ZERO_BLOCK_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("matrix dimensions {found:?} do not match {expected:?}")]
    SizeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("limit matrix is not rank one (row deviation {0:e})")]
    NotRankOne(f64),
    #[error("not an opinion dynamics chain: {0}")]
    NotOdc(String),
}

/// `max_i Σ_j |X_ij|`.
pub fn infinity_norm(x: &DMatrix<f64>) -> f64 {
    x.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `W_k W_{k−1} ⋯ W_0`, accumulated by multiplying new factors on the left.
#[derive(Clone, Debug, PartialEq)]
pub struct LeftProduct {
    acc: DMatrix<f64>,
    steps: usize,
}

impl LeftProduct {
    pub fn identity(n: usize) -> Self {
        Self {
            acc: DMatrix::identity(n, n),
            steps: 0,
        }
    }

    pub fn accumulate(&mut self, w: &DMatrix<f64>) -> Result<(), AnalysisError> {
        if w.shape() != self.acc.shape() {
            return Err(AnalysisError::SizeMismatch {
                expected: self.acc.shape(),
                found: w.shape(),
            });
        }
        self.acc = w * &self.acc;
        self.steps += 1;
        Ok(())
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.acc
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

/// Largest change in any mass between two opinion snapshots.
pub fn max_step_delta(before: &[BodyOfEvidence], after: &[BodyOfEvidence]) -> f64 {
    before
        .iter()
        .zip(after)
        .flat_map(|(a, b)| {
            a.masses()
                .iter()
                .zip(b.masses())
                .map(|(x, y)| (x - y).abs())
        })
        .fold(0.0, f64::max)
}

/// True when every consecutive change in the window is below `tol`.
pub fn detect_convergence(window: &[Vec<BodyOfEvidence>], tol: f64) -> bool {
    window.len() >= 2
        && window
            .windows(2)
            .all(|w| max_step_delta(&w[0], &w[1]) < tol)
}

/// Streaming form of [`detect_convergence`]: converged once `persistence`
/// consecutive steps moved less than `tol`.
#[derive(Clone, Debug)]
pub struct ConvergenceMonitor {
    tol: f64,
    persistence: usize,
    calm: usize,
}

impl ConvergenceMonitor {
    pub fn new(tol: f64, persistence: usize) -> Self {
        Self {
            tol,
            persistence,
            calm: 0,
        }
    }

    pub fn observe(&mut self, delta: f64) -> bool {
        if delta < self.tol {
            self.calm += 1;
        } else {
            self.calm = 0;
        }
        self.converged()
    }

    pub fn converged(&self) -> bool {
        self.calm >= self.persistence
    }
}

impl Default for ConvergenceMonitor {
    fn default() -> Self {
        Self::new(STEP_TOL, PERSISTENCE)
    }
}

/// Largest entrywise gap between any row and the first row.
pub fn row_deviation(w: &DMatrix<f64>) -> f64 {
    if w.nrows() == 0 {
        return 0.0;
    }
    let first = w.row(0);
    w.row_iter()
        .map(|r| (r - first).abs().max())
        .fold(0.0, f64::max)
}

/// For a rank-one limit `W = 1 vᵀ`, the consensus value `η = vᵀ π₀`.
pub fn check_consensus_rank_one(
    w_inf: &DMatrix<f64>,
    initial: &OpinionProfile,
) -> Result<f64, AnalysisError> {
    let n = initial.values.len();
    if w_inf.shape() != (n, n) {
        return Err(AnalysisError::SizeMismatch {
            expected: (n, n),
            found: w_inf.shape(),
        });
    }
    let deviation = row_deviation(w_inf);
    let v = w_inf.row(0);
    if deviation >= RANK_ONE_TOL || (v.sum() - 1.0).abs() >= RANK_ONE_TOL || v.min() < -RANK_ONE_TOL
    {
        return Err(AnalysisError::NotRankOne(deviation));
    }
    let pi0 = nalgebra::DVector::from_column_slice(&initial.values);
    let eta = (v * &pi0)[0];
    let limit = w_inf * pi0;
    assert!(
        limit.iter().all(|x| (x - eta).abs() < 1e-6),
        "rank-one limit does not map the profile onto its consensus"
    );
    Ok(eta)
}
