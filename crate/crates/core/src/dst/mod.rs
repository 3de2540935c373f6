//! Dempster-Shafer primitives over small frames: mass functions, belief and
//! plausibility, Fagin-Halpern conditionals, Möbius inversion and the
//! Jousselme distance.

mod boe;
mod frame;
mod jousselme;
mod serde_boe;

pub use boe::{
    masses_from_beliefs, validate, BeliefFunction, BodyOfEvidence, BoeClass, ValidityReport,
    MOBIUS_NEGATIVE_TOL,
};
pub use frame::{FrameOfDiscernment, Proposition, Subsets, MAX_FRAME_SIZE};
pub use jousselme::{jousselme_distance, JaccardMatrix};
pub use serde_boe::BoeJson;

/// Tolerance for algebraic identities (mass sums, exact reductions).
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance for quantities produced by long iterations.
pub const ITERATED_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DstError {
    #[error("frame size {0} outside 1..=16")]
    InvalidFrameSize(usize),
    #[error("cannot parse proposition {0:?}")]
    BadProposition(String),
    #[error("proposition bitmask {0:#b} lies outside the frame")]
    PropositionOutOfFrame(u32),
    #[error("bodies of evidence are defined on different frames")]
    FrameMismatch,
    #[error("conditioning on {0:#b} which has zero belief")]
    ConditioningNotSupported(u32),
    #[error("not a belief function: recovered mass {mass} for {proposition:#b}")]
    NotABeliefFunction { proposition: u32, mass: f64 },
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("mixture needs at least one component")]
    EmptyMixture,
}
