use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One neighbor reference inside a milieu.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Link {
    /// 0-based entity index.
    Entity(usize),
    /// A phantom neighbor outside the lattice, always in the ground state of
    /// the state set. Produced by fixed-boundary builders.
    Boundary,
}

/// The milieus tuple `M`: for each entity, the ordered tuple of its
/// neighbors. An entity never lists itself; its own state reaches the update
/// function separately.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Milieus {
    lists: Vec<Vec<Link>>,
}

impl Milieus {
    pub fn new(lists: Vec<Vec<Link>>) -> Self {
        Milieus { lists }
    }

    /// Builds milieus from 0-based index lists.
    pub fn from_indices(lists: Vec<Vec<usize>>) -> Self {
        Milieus {
            lists: lists
                .into_iter()
                .map(|l| l.into_iter().map(Link::Entity).collect())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    /// The milieu of the entity at 0-based index `i`.
    pub fn get(&self, i: usize) -> Option<&[Link]> {
        self.lists.get(i).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Link]> {
        self.lists.iter().map(Vec::as_slice)
    }

    /// `Some(m)` when every milieu has exactly `m` neighbors.
    pub fn uniform_arity(&self) -> Option<usize> {
        let first = self.lists.first()?.len();
        self.lists.iter().all(|l| l.len() == first).then_some(first)
    }

    pub fn has_boundary(&self) -> bool {
        self.lists.iter().flatten().any(|l| *l == Link::Boundary)
    }

    /// 0-based index lists, or `None` if any link is a boundary link.
    pub fn to_indices(&self) -> Option<Vec<Vec<usize>>> {
        self.lists
            .iter()
            .map(|l| {
                l.iter()
                    .map(|link| match link {
                        Link::Entity(i) => Some(*i),
                        Link::Boundary => None,
                    })
                    .collect()
            })
            .collect()
    }

    /// Checks the milieus against an entity count `e`: one milieu per entity,
    /// every index in range, no self references.
    pub fn validate(&self, e: usize) -> Result<()> {
        if self.lists.len() != e {
            return Err(Error::Validation(format!(
                "{} milieus for {} entities",
                self.lists.len(),
                e
            )));
        }
        for (i, list) in self.lists.iter().enumerate() {
            for link in list {
                if let Link::Entity(j) = *link {
                    if j >= e {
                        return Err(Error::Validation(format!(
                            "milieu of entity {} references index {} outside 1..={}",
                            i + 1,
                            j + 1,
                            e
                        )));
                    }
                    if j == i {
                        return Err(Error::Validation(format!(
                            "milieu of entity {} contains the entity itself",
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn dangling_index_rejected() {
        let m = Milieus::from_indices(vec![vec![1], vec![6]]);
        assert!(matches!(m.validate(2), Err(Error::Validation(_))));
    }

    #[test]
    fn self_reference_rejected() {
        let m = Milieus::from_indices(vec![vec![0], vec![0]]);
        assert!(m.validate(2).is_err());
    }

    #[test]
    fn arity() {
        let m = Milieus::from_indices(vec![vec![1, 2], vec![0, 2], vec![0, 1]]);
        assert_eq!(m.uniform_arity(), Some(2));
        let m = Milieus::new(vec![vec![Link::Boundary], vec![]]);
        assert_eq!(m.uniform_arity(), None);
        assert!(m.has_boundary());
        assert!(m.to_indices().is_none());
    }
}
