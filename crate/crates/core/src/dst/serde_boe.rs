use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::boe::BodyOfEvidence;
use super::frame::FrameOfDiscernment;
use super::DstError;

/// Wire form of a body of evidence: `{"frame_size": M, "masses": {"1,3": 0.2, "*": 0.8}}`.
/// Omitted propositions carry zero mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoeJson {
    pub frame_size: usize,
    pub masses: BTreeMap<String, f64>,
}

impl BoeJson {
    pub fn into_boe(self) -> Result<BodyOfEvidence, DstError> {
        let frame = FrameOfDiscernment::new(self.frame_size)?;
        let mut pairs = Vec::with_capacity(self.masses.len());
        for (key, mass) in &self.masses {
            pairs.push((frame.parse_proposition(key)?, *mass));
        }
        BodyOfEvidence::from_pairs(frame, &pairs)
    }
}

impl From<&BodyOfEvidence> for BoeJson {
    fn from(boe: &BodyOfEvidence) -> Self {
        let frame = boe.frame();
        let masses = boe
            .canonical_masses()
            .into_iter()
            .filter(|&(_, m)| m != 0.0)
            .map(|(p, m)| (frame.format_proposition(p), m))
            .collect();
        BoeJson {
            frame_size: frame.size(),
            masses,
        }
    }
}

impl Serialize for BodyOfEvidence {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        BoeJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BodyOfEvidence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        BoeJson::deserialize(deserializer)?
            .into_boe()
            .map_err(serde::de::Error::custom)
    }
}
