//! Consensus and opinion-cluster formation among networked agents whose
//! opinions are Dempster-Shafer bodies of evidence.
//!
//! Agents update with the conditional update equation (CUE) under bounded
//! confidence. The crate provides the belief-function primitives, the
//! network and pruning model, general and closed-form update engines,
//! convergence and leader-chain analysis, and a scenario/sweep harness.

pub mod analysis;
pub mod dst;
pub mod dynamics;
pub mod graph;
pub mod harness;
