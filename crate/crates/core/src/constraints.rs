use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::itemset::{ItemSet, ItemUniverse};

/// One target `(I_i, s_i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportConstraint {
    pub itemset: ItemSet,
    pub support: u64,
}

/// Record left on a constraint set by [`crate::privacy::scrub_constraints`].
/// It travels through the `.cst` header so that a second scrub can be refused.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScrubMarker {
    pub seed: u64,
    pub sensitive: ItemSet,
}

/// An instance: target size `n` and `m ≥ 1` support constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet {
    universe: ItemUniverse,
    n: u64,
    constraints: Vec<SupportConstraint>,
    scrub_marker: Option<ScrubMarker>,
}

impl ConstraintSet {
    pub fn new(universe: ItemUniverse, n: u64, constraints: Vec<SupportConstraint>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("target transaction count n must be at least 1"));
        }
        if constraints.is_empty() {
            return Err(Error::NoConstraints("a constraint set needs m >= 1".into()));
        }
        let mut seen = HashSet::with_capacity(constraints.len());
        for c in &constraints {
            if c.itemset.universe_size() != universe.size() {
                return Err(Error::Dimension {
                    expected: universe.size(),
                    found: c.itemset.universe_size(),
                });
            }
            if c.itemset.is_empty() {
                return Err(Error::invalid("constraint on the empty itemset"));
            }
            if c.support > n {
                return Err(Error::invalid(format!(
                    "support {} of {{{}}} exceeds n = {n}",
                    c.support, c.itemset
                )));
            }
            if !seen.insert(&c.itemset) {
                return Err(Error::invalid(format!(
                    "duplicate constraint itemset {{{}}}",
                    c.itemset
                )));
            }
        }
        Ok(Self {
            universe,
            n,
            constraints,
            scrub_marker: None,
        })
    }

    /// Builds a set without the duplicate-itemset check. Used for the
    /// augmented programs of the privacy audit, where the rule itemset may
    /// already be constrained.
    pub(crate) fn new_allow_duplicates(
        universe: ItemUniverse,
        n: u64,
        constraints: Vec<SupportConstraint>,
    ) -> Self {
        Self {
            universe,
            n,
            constraints,
            scrub_marker: None,
        }
    }

    pub fn universe(&self) -> &ItemUniverse {
        &self.universe
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of constraints `m`.
    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[SupportConstraint] {
        &self.constraints
    }

    pub fn itemset(&self, i: usize) -> &ItemSet {
        &self.constraints[i].itemset
    }

    pub fn target(&self, i: usize) -> u64 {
        self.constraints[i].support
    }

    pub fn scrub_marker(&self) -> Option<&ScrubMarker> {
        self.scrub_marker.as_ref()
    }

    pub fn with_scrub_marker(mut self, marker: Option<ScrubMarker>) -> Self {
        self.scrub_marker = marker;
        self
    }
}
