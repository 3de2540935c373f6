use std::fmt;
use std::sync::Arc;

use super::DstError;

/// Largest supported frame. Mass vectors are dense, so `2^M` entries must fit.
pub const MAX_FRAME_SIZE: usize = 16;

/// A finite set of mutually exclusive singleton hypotheses `θ1 … θM`.
#[derive(Clone, Debug)]
pub struct FrameOfDiscernment {
    size: usize,
    labels: Option<Arc<[String]>>,
}

impl FrameOfDiscernment {
    pub fn new(size: usize) -> Result<Self, DstError> {
        if size == 0 || size > MAX_FRAME_SIZE {
            return Err(DstError::InvalidFrameSize(size));
        }
        Ok(Self { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self, DstError> {
        let mut frame = Self::new(labels.len())?;
        frame.labels = Some(labels.into());
        Ok(frame)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Number of subsets, `2^M`.
    pub fn power_set_len(&self) -> usize {
        1 << self.size
    }

    /// The whole frame `Θ`.
    pub fn full(&self) -> Proposition {
        Proposition((1u32 << self.size) - 1)
    }

    pub fn singletons(&self) -> impl Iterator<Item = Proposition> {
        (0..self.size).map(Proposition::singleton)
    }

    /// All subsets in bitmask order, starting from `∅`.
    pub fn propositions(&self) -> impl Iterator<Item = Proposition> {
        (0..self.power_set_len() as u32).map(Proposition)
    }

    pub fn contains(&self, prop: Proposition) -> bool {
        (prop.0 as usize) < self.power_set_len()
    }

    pub fn complement(&self, prop: Proposition) -> Proposition {
        Proposition(!prop.0 & self.full().0)
    }

    /// Subsets ordered by cardinality, then lexicographically by member
    /// indices: `∅, θ1, …, θM, θ1θ2, …, Θ`. Used for display and
    /// serialization; storage stays in bitmask order.
    pub fn canonical_order(&self) -> Vec<Proposition> {
        let mut props: Vec<Proposition> = self.propositions().collect();
        props.sort_by(|a, b| {
            a.cardinality()
                .cmp(&b.cardinality())
                .then_with(|| a.members().cmp(b.members()))
        });
        props
    }

    /// Parse a proposition written as comma separated 1-based singleton
    /// indices (`"1,3"`), or `"*"` for `Θ`. An empty string denotes `∅`.
    pub fn parse_proposition(&self, text: &str) -> Result<Proposition, DstError> {
        let text = text.trim();
        if text == "*" {
            return Ok(self.full());
        }
        if text.is_empty() || text == "∅" {
            return Ok(Proposition::EMPTY);
        }
        let mut bits = 0u32;
        for part in text.split(',') {
            let part = part.trim();
            let index: usize = part
                .parse()
                .map_err(|_| DstError::BadProposition(text.to_string()))?;
            if index == 0 || index > self.size {
                return Err(DstError::BadProposition(text.to_string()));
            }
            bits |= 1 << (index - 1);
        }
        Ok(Proposition(bits))
    }

    /// Inverse of [`parse_proposition`](Self::parse_proposition).
    pub fn format_proposition(&self, prop: Proposition) -> String {
        if prop == self.full() {
            return "*".to_string();
        }
        prop.members()
            .map(|i| (i + 1).to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn same_as(&self, other: &FrameOfDiscernment) -> bool {
        self.size == other.size
    }
}

impl PartialEq for FrameOfDiscernment {
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size
    }
}

impl Eq for FrameOfDiscernment {}

/// A subset of the frame as a bitmask; bit `p` set means `θ(p+1)` belongs to it.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Proposition(pub u32);

impl Proposition {
    pub const EMPTY: Proposition = Proposition(0);

    /// Singleton for the 0-based hypothesis index `p`.
    pub fn singleton(p: usize) -> Self {
        Proposition(1 << p)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn cardinality(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_singleton(self) -> bool {
        self.cardinality() == 1
    }

    pub fn intersect(self, other: Proposition) -> Proposition {
        Proposition(self.0 & other.0)
    }

    pub fn union(self, other: Proposition) -> Proposition {
        Proposition(self.0 | other.0)
    }

    pub fn is_subset_of(self, other: Proposition) -> bool {
        self.0 & !other.0 == 0
    }

    /// 0-based indices of the member singletons, ascending.
    pub fn members(self) -> impl Iterator<Item = usize> + Clone {
        (0..32).filter(move |p| self.0 >> p & 1 == 1)
    }

    /// Every subset of `self`, including `∅` and `self`.
    pub fn subsets(self) -> Subsets {
        Subsets {
            full: self.0,
            next: Some(self.0),
        }
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "∅");
        }
        for p in self.members() {
            write!(f, "θ{}", p + 1)?;
        }
        Ok(())
    }
}

/// Submask enumeration, descending from the full mask to `∅`.
pub struct Subsets {
    full: u32,
    next: Option<u32>,
}

impl Iterator for Subsets {
    type Item = Proposition;

    fn next(&mut self) -> Option<Proposition> {
        let current = self.next?;
        self.next = if current == 0 {
            None
        } else {
            Some((current - 1) & self.full)
        };
        Some(Proposition(current))
    }
}
