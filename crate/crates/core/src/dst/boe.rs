use serde::Serialize;

use super::frame::{FrameOfDiscernment, Proposition};
use super::{DstError, ALGEBRAIC_TOL};

/// Mass recovered by Möbius inversion below this is a genuine violation,
/// not rounding.
pub const MOBIUS_NEGATIVE_TOL: f64 = 1e-9;

/// An agent opinion: a mass assignment over every subset of the frame,
/// stored densely in bitmask order.
#[derive(Clone, Debug, PartialEq)]
pub struct BodyOfEvidence {
    frame: FrameOfDiscernment,
    masses: Vec<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoeClass {
    Vacuous,
    Bayesian,
    Dirichlet,
    General,
}

/// Outcome of [`validate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidityReport {
    pub empty_set_zero: bool,
    pub sums_to_one: bool,
    pub non_negative: bool,
    pub valid: bool,
    pub total_mass: f64,
    pub class: BoeClass,
    pub bayesian: bool,
    pub dirichlet: bool,
    pub vacuous: bool,
}

impl BodyOfEvidence {
    /// Wraps a dense mass vector. Only the length is checked here; use
    /// [`validate`] for the mass-function axioms.
    pub fn from_masses(frame: FrameOfDiscernment, masses: Vec<f64>) -> Result<Self, DstError> {
        if masses.len() != frame.power_set_len() {
            return Err(DstError::LengthMismatch {
                expected: frame.power_set_len(),
                found: masses.len(),
            });
        }
        Ok(Self { frame, masses })
    }

    /// Builds from `(proposition, mass)` pairs; repeated propositions add up.
    pub fn from_pairs(
        frame: FrameOfDiscernment,
        pairs: &[(Proposition, f64)],
    ) -> Result<Self, DstError> {
        let mut masses = vec![0.0; frame.power_set_len()];
        for &(prop, mass) in pairs {
            if !frame.contains(prop) {
                return Err(DstError::PropositionOutOfFrame(prop.bits()));
            }
            masses[prop.index()] += mass;
        }
        Ok(Self { frame, masses })
    }

    pub fn vacuous(frame: FrameOfDiscernment) -> Self {
        let mut masses = vec![0.0; frame.power_set_len()];
        masses[frame.full().index()] = 1.0;
        Self { frame, masses }
    }

    /// A p.m.f. over the singletons.
    pub fn bayesian(frame: FrameOfDiscernment, probabilities: &[f64]) -> Result<Self, DstError> {
        if probabilities.len() != frame.size() {
            return Err(DstError::LengthMismatch {
                expected: frame.size(),
                found: probabilities.len(),
            });
        }
        let mut masses = vec![0.0; frame.power_set_len()];
        for (p, &value) in probabilities.iter().enumerate() {
            masses[Proposition::singleton(p).index()] = value;
        }
        Ok(Self { frame, masses })
    }

    /// Singleton masses plus the remainder on `Θ`.
    pub fn dirichlet(
        frame: FrameOfDiscernment,
        singletons: &[f64],
        ignorance: f64,
    ) -> Result<Self, DstError> {
        let mut boe = Self::bayesian(frame, singletons)?;
        let full = boe.frame.full().index();
        boe.masses[full] += ignorance;
        Ok(boe)
    }

    pub fn frame(&self) -> &FrameOfDiscernment {
        &self.frame
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn into_masses(self) -> Vec<f64> {
        self.masses
    }

    pub fn mass(&self, prop: Proposition) -> f64 {
        self.masses[prop.index()]
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Propositions with mass above `tol`.
    pub fn focal_elements(&self, tol: f64) -> impl Iterator<Item = Proposition> + '_ {
        self.masses
            .iter()
            .enumerate()
            .filter(move |(_, &m)| m > tol)
            .map(|(i, _)| Proposition(i as u32))
    }

    pub fn belief(&self, prop: Proposition) -> f64 {
        prop.subsets().map(|b| self.masses[b.index()]).sum()
    }

    pub fn plausibility(&self, prop: Proposition) -> f64 {
        if prop.is_empty() {
            return 0.0;
        }
        1.0 - self.belief(self.frame.complement(prop))
    }

    /// Full belief function via the subset-sum transform, `O(M 2^M)`.
    pub fn belief_function(&self) -> BeliefFunction {
        let mut beliefs = self.masses.clone();
        for bit in 0..self.frame.size() {
            let step = 1 << bit;
            for set in 0..beliefs.len() {
                if set & step != 0 {
                    beliefs[set] += beliefs[set ^ step];
                }
            }
        }
        BeliefFunction {
            frame: self.frame.clone(),
            beliefs,
        }
    }

    pub fn is_bayesian(&self, tol: f64) -> bool {
        self.focal_elements(tol).all(|a| a.is_singleton())
    }

    pub fn is_dirichlet(&self, tol: f64) -> bool {
        let full = self.frame.full();
        self.focal_elements(tol)
            .all(|a| a.is_singleton() || a == full)
    }

    /// Mass vector listed in canonical order (`∅`, singletons, pairs, …, `Θ`).
    pub fn canonical_masses(&self) -> Vec<(Proposition, f64)> {
        self.frame
            .canonical_order()
            .into_iter()
            .map(|p| (p, self.masses[p.index()]))
            .collect()
    }

    /// Elementwise convex combination `Σ w_k E_k`; weights must sum to one.
    pub fn mixture(parts: &[(f64, &BodyOfEvidence)]) -> Result<Self, DstError> {
        let first = parts.first().ok_or(DstError::EmptyMixture)?.1;
        let mut masses = vec![0.0; first.masses.len()];
        for &(w, boe) in parts {
            if !boe.frame.same_as(&first.frame) {
                return Err(DstError::FrameMismatch);
            }
            for (acc, m) in masses.iter_mut().zip(&boe.masses) {
                *acc += w * m;
            }
        }
        Ok(Self {
            frame: first.frame.clone(),
            masses,
        })
    }
}

/// Check the mass-function axioms and classify the focal structure.
pub fn validate(boe: &BodyOfEvidence) -> ValidityReport {
    let total = boe.total_mass();
    let empty_set_zero = boe.masses[0] == 0.0;
    let sums_to_one = (total - 1.0).abs() <= ALGEBRAIC_TOL;
    let non_negative = boe.masses.iter().all(|&m| m >= -ALGEBRAIC_TOL);
    let full = boe.frame.full();
    let vacuous = (boe.mass(full) - 1.0).abs() <= ALGEBRAIC_TOL;
    let bayesian = boe.is_bayesian(ALGEBRAIC_TOL);
    let dirichlet = boe.is_dirichlet(ALGEBRAIC_TOL);
    // A one-element frame makes Θ a singleton; report it as vacuous.
    let class = if vacuous {
        BoeClass::Vacuous
    } else if bayesian {
        BoeClass::Bayesian
    } else if dirichlet {
        BoeClass::Dirichlet
    } else {
        BoeClass::General
    };
    ValidityReport {
        empty_set_zero,
        sums_to_one,
        non_negative,
        valid: empty_set_zero && sums_to_one && non_negative,
        total_mass: total,
        class,
        bayesian,
        dirichlet,
        vacuous,
    }
}

/// Dense belief values `Bl(A)` for every `A ⊆ Θ`.
#[derive(Clone, Debug)]
pub struct BeliefFunction {
    frame: FrameOfDiscernment,
    beliefs: Vec<f64>,
}

impl BeliefFunction {
    pub fn frame(&self) -> &FrameOfDiscernment {
        &self.frame
    }

    pub fn values(&self) -> &[f64] {
        &self.beliefs
    }

    pub fn belief(&self, prop: Proposition) -> f64 {
        self.beliefs[prop.index()]
    }

    /// `Pl(A) = 1 − Bl(Ā)`, with `Pl(∅) = 0` exactly.
    pub fn plausibility(&self, prop: Proposition) -> f64 {
        if prop.is_empty() {
            return 0.0;
        }
        1.0 - self.beliefs[self.frame.complement(prop).index()]
    }

    /// Fagin-Halpern conditional belief `Bl(B|A)`.
    pub fn conditional_belief(&self, b: Proposition, a: Proposition) -> Result<f64, DstError> {
        self.check_conditioning(a)?;
        // Bl(B|Θ) = Bl(B); skip the ratio so the identity is exact.
        if a == self.frame.full() {
            return Ok(self.belief(b));
        }
        let inside = self.belief(a.intersect(b));
        let outside = self.plausibility(a.intersect(self.frame.complement(b)));
        Ok(self.ratio(inside, outside, a))
    }

    /// Fagin-Halpern conditional plausibility `Pl(B|A)`.
    pub fn conditional_plausibility(
        &self,
        b: Proposition,
        a: Proposition,
    ) -> Result<f64, DstError> {
        self.check_conditioning(a)?;
        if a == self.frame.full() {
            return Ok(self.plausibility(b));
        }
        let inside = self.plausibility(a.intersect(b));
        let outside = self.belief(a.intersect(self.frame.complement(b)));
        Ok(self.ratio(inside, outside, a))
    }

    /// Conditional beliefs `Bl(·|A)` for every `B`, in bitmask order.
    pub fn conditional_beliefs(&self, a: Proposition) -> Result<Vec<f64>, DstError> {
        self.check_conditioning(a)?;
        if a == self.frame.full() {
            return Ok(self.beliefs.clone());
        }
        Ok(self
            .frame
            .propositions()
            .map(|b| {
                let inside = self.belief(a.intersect(b));
                let outside = self.plausibility(a.intersect(self.frame.complement(b)));
                self.ratio(inside, outside, a)
            })
            .collect())
    }

    fn check_conditioning(&self, a: Proposition) -> Result<(), DstError> {
        if !self.frame.contains(a) {
            return Err(DstError::PropositionOutOfFrame(a.bits()));
        }
        if self.belief(a) <= 0.0 {
            return Err(DstError::ConditioningNotSupported(a.bits()));
        }
        Ok(())
    }

    fn ratio(&self, num: f64, other: f64, a: Proposition) -> f64 {
        let den = num + other;
        if den <= 0.0 {
            // Bl(A) > 0 bounds the denominator away from zero.
            debug_assert!(
                self.belief(a) <= ALGEBRAIC_TOL,
                "zero FH denominator with Bl(A) = {}",
                self.belief(a)
            );
            return 0.0;
        }
        num / den
    }
}

/// Möbius inversion: recover masses from a belief function.
///
/// Rounding residue down to `-1e-9` is clamped to zero and the result is
/// renormalized to unit total mass.
pub fn masses_from_beliefs(
    frame: &FrameOfDiscernment,
    beliefs: &[f64],
) -> Result<BodyOfEvidence, DstError> {
    if beliefs.len() != frame.power_set_len() {
        return Err(DstError::LengthMismatch {
            expected: frame.power_set_len(),
            found: beliefs.len(),
        });
    }
    let mut masses = beliefs.to_vec();
    for bit in 0..frame.size() {
        let step = 1 << bit;
        for set in 0..masses.len() {
            if set & step != 0 {
                masses[set] -= masses[set ^ step];
            }
        }
    }
    for (set, m) in masses.iter_mut().enumerate() {
        if *m < -MOBIUS_NEGATIVE_TOL {
            return Err(DstError::NotABeliefFunction {
                proposition: set as u32,
                mass: *m,
            });
        }
        if *m < 0.0 {
            *m = 0.0;
        }
    }
    if masses[0].abs() > MOBIUS_NEGATIVE_TOL {
        return Err(DstError::NotABeliefFunction {
            proposition: 0,
            mass: masses[0],
        });
    }
    masses[0] = 0.0;
    let total: f64 = masses.iter().sum();
    if total <= 0.0 {
        return Err(DstError::NotABeliefFunction {
            proposition: frame.full().bits(),
            mass: total,
        });
    }
    for m in &mut masses {
        *m /= total;
    }
    BodyOfEvidence::from_masses(frame.clone(), masses)
}
