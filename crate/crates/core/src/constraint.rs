//! Per-box requirements describing events such as "box (i,j) holds an α".

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tableau::{BoxIndex, Cell, Tableau};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Requirement {
    MustAlpha,
    MustBeta,
    MustNonEmpty,
    MustEmpty,
    Free,
}

impl Requirement {
    pub fn allows(self, c: Cell) -> bool {
        match self {
            Requirement::MustAlpha => c == Cell::Alpha,
            Requirement::MustBeta => c == Cell::Beta,
            Requirement::MustNonEmpty => !c.is_empty(),
            Requirement::MustEmpty => c.is_empty(),
            Requirement::Free => true,
        }
    }
}

/// At most one requirement per box; unlisted boxes are free.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ConstraintSet {
    reqs: BTreeMap<BoxIndex, Requirement>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        ConstraintSet::default()
    }

    /// Adds a requirement; re-stating the same one is allowed, a different
    /// one on the same box is an error.
    pub fn require(mut self, b: BoxIndex, r: Requirement) -> Result<Self> {
        match self.reqs.get(&b) {
            Some(&old) if old != r => return Err(Error::ConflictingConstraint(b)),
            _ => {}
        }
        self.reqs.insert(b, r);
        Ok(self)
    }

    /// Infallible builder for literals in tests and examples; panics on conflict.
    pub fn with(self, i: usize, j: usize, r: Requirement) -> Self {
        self.require(BoxIndex::new(i, j), r)
            .expect("conflicting requirement")
    }

    pub fn get(&self, b: BoxIndex) -> Requirement {
        self.reqs.get(&b).copied().unwrap_or(Requirement::Free)
    }

    pub fn is_empty(&self) -> bool {
        self.reqs.values().all(|&r| r == Requirement::Free)
    }

    pub fn len(&self) -> usize {
        self.reqs.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (BoxIndex, Requirement)> + '_ {
        self.reqs.iter().map(|(&b, &r)| (b, r))
    }

    /// Every listed box must lie in the size-`n` staircase.
    pub fn check_shape(&self, n: usize) -> Result<()> {
        match self.reqs.keys().find(|b| !b.in_shape(n)) {
            Some(&b) => Err(Error::BoxOutOfShape(b, n)),
            None => Ok(()),
        }
    }

    pub fn satisfied_by(&self, t: &Tableau) -> bool {
        self.reqs
            .iter()
            .all(|(&b, r)| t.get(b).is_some_and(|c| r.allows(c)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conflicts_are_rejected() {
        let c = ConstraintSet::new().with(1, 1, Requirement::MustAlpha);
        assert!(c
            .clone()
            .require(BoxIndex::new(1, 1), Requirement::MustAlpha)
            .is_ok());
        assert_eq!(
            c.require(BoxIndex::new(1, 1), Requirement::MustBeta),
            Err(Error::ConflictingConstraint(BoxIndex::new(1, 1)))
        );
    }

    #[test]
    fn shape_check() {
        let c = ConstraintSet::new().with(2, 2, Requirement::MustEmpty);
        assert!(c.check_shape(3).is_ok());
        assert!(c.check_shape(2).is_err());
    }
}
