use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::dst::{BodyOfEvidence, FrameOfDiscernment, Proposition};

use super::HarnessError;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingKind {
    Dirichlet,
}

/// Random opinion: a Dirichlet draw spread over the target propositions in
/// the order listed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    pub kind: SamplingKind,
    pub concentration: Vec<f64>,
    /// Propositions in the `"1,3"` / `"*"` notation.
    pub targets: Vec<String>,
}

/// A [`SamplingSpec`] checked against a frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Sampler {
    frame: FrameOfDiscernment,
    gammas: Vec<Gamma<f64>>,
    targets: Vec<Proposition>,
}

impl SamplingSpec {
    pub fn sampler(&self, frame: &FrameOfDiscernment) -> Result<Sampler, HarnessError> {
        let bad = |msg: String| HarnessError::InvalidScenario {
            path: "sample".into(),
            message: msg,
        };
        if self.concentration.is_empty() || self.concentration.len() != self.targets.len() {
            return Err(bad(format!(
                "{} concentration parameters for {} targets",
                self.concentration.len(),
                self.targets.len()
            )));
        }
        let mut gammas = Vec::with_capacity(self.concentration.len());
        for &a in &self.concentration {
            if !(a > 0.0 && a.is_finite()) {
                return Err(bad(format!("concentration {a} must be positive")));
            }
            gammas.push(Gamma::new(a, 1.0).map_err(|e| bad(e.to_string()))?);
        }
        let mut targets = Vec::with_capacity(self.targets.len());
        for t in &self.targets {
            let p = frame.parse_proposition(t).map_err(|e| bad(e.to_string()))?;
            if p.is_empty() || targets.contains(&p) {
                return Err(bad(format!("target {t:?} is empty or repeated")));
            }
            targets.push(p);
        }
        Ok(Sampler {
            frame: frame.clone(),
            gammas,
            targets,
        })
    }
}

impl Sampler {
    /// Independent gamma variates normalized to sum one.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BodyOfEvidence {
        let draws: Vec<f64> = self.gammas.iter().map(|g| g.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        let pairs: Vec<(Proposition, f64)> = self
            .targets
            .iter()
            .zip(&draws)
            .map(|(&p, &x)| (p, x / total))
            .collect();
        BodyOfEvidence::from_pairs(self.frame.clone(), &pairs).expect("targets lie in the frame")
    }
}

/// Draw one opinion from `spec`.
pub fn sample_boe<R: Rng + ?Sized>(
    spec: &SamplingSpec,
    frame: &FrameOfDiscernment,
    rng: &mut R,
) -> Result<BodyOfEvidence, HarnessError> {
    Ok(spec.sampler(frame)?.sample(rng))
}
