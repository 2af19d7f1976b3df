use alloc::format;
use alloc::vec::Vec;
use core::ops::Deref;

use crate::error::{Error, Result};

/// A single entity state. Finite state sets hold integer-valued symbols,
/// continuous ones hold reals from an interval.
pub type State = f64;

/// The set `Q` of possible entity states.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSet {
    /// `k` pairwise distinct states. Their order fixes the digit used for
    /// each state in rule-table keys.
    Finite(Vec<State>),
    /// The closed real interval `[lo, hi]`.
    Interval { lo: f64, hi: f64 },
}

impl StateSet {
    pub fn finite(states: Vec<State>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Validation("finite state set must not be empty".into()));
        }
        for (i, s) in states.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::Validation(format!("state {s} is not a finite number")));
            }
            if states[..i].contains(s) {
                return Err(Error::Validation(format!("duplicate state {s}")));
            }
        }
        Ok(StateSet::Finite(states))
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::Validation(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(StateSet::Interval { lo, hi })
    }

    /// `{0, 1}`.
    pub fn binary() -> Self {
        StateSet::Finite(alloc::vec![0.0, 1.0])
    }

    /// `[0, 1]`.
    pub fn unit_interval() -> Self {
        StateSet::Interval { lo: 0.0, hi: 1.0 }
    }

    /// Number of states `k`, or `None` for a continuous set.
    pub fn k(&self) -> Option<usize> {
        match self {
            StateSet::Finite(states) => Some(states.len()),
            StateSet::Interval { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, StateSet::Finite(_))
    }

    pub fn contains(&self, state: State) -> bool {
        match self {
            StateSet::Finite(states) => states.contains(&state),
            StateSet::Interval { lo, hi } => *lo <= state && state <= *hi,
        }
    }

    /// Position of `state` in a finite set.
    pub fn index_of(&self, state: State) -> Option<usize> {
        match self {
            StateSet::Finite(states) => states.iter().position(|s| *s == state),
            StateSet::Interval { .. } => None,
        }
    }

    /// The state at position `index` of a finite set.
    pub fn state_at(&self, index: usize) -> Option<State> {
        match self {
            StateSet::Finite(states) => states.get(index).copied(),
            StateSet::Interval { .. } => None,
        }
    }

    /// The state used for phantom boundary neighbors: the first element of a
    /// finite set, the lower bound of an interval.
    pub fn ground(&self) -> State {
        match self {
            StateSet::Finite(states) => states[0],
            StateSet::Interval { lo, .. } => *lo,
        }
    }

    /// Set equality for finite sets (order ignored), bound equality for
    /// intervals.
    pub fn same_extension(&self, other: &StateSet) -> bool {
        match (self, other) {
            (StateSet::Finite(a), StateSet::Finite(b)) => {
                a.len() == b.len() && a.iter().all(|s| b.contains(s))
            }
            (StateSet::Interval { lo: a, hi: b }, StateSet::Interval { lo: c, hi: d }) => {
                a == c && b == d
            }
            _ => false,
        }
    }
}

/// The entities tuple `E`: one state per entity, `e >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Entities(Vec<State>);

impl Entities {
    pub fn new(states: Vec<State>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Validation("entities tuple must not be empty".into()));
        }
        Ok(Entities(states))
    }

    /// Number of entities `e`.
    pub fn e(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[State] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<State> {
        self.0
    }

    /// Checks that every entity state belongs to `set`.
    pub fn check_membership(&self, set: &StateSet) -> Result<()> {
        match self.0.iter().position(|s| !set.contains(*s)) {
            None => Ok(()),
            Some(i) => Err(Error::Validation(format!(
                "entity {} has state {} outside the state set",
                i + 1,
                self.0[i]
            ))),
        }
    }
}

impl Deref for Entities {
    type Target = [State];

    fn deref(&self) -> &[State] {
        &self.0
    }
}

impl TryFrom<Vec<State>> for Entities {
    type Error = Error;

    fn try_from(states: Vec<State>) -> Result<Self> {
        Entities::new(states)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn finite_rejects_duplicates_and_empty() {
        assert!(StateSet::finite(vec![0.0, 1.0, 0.0]).is_err());
        assert!(StateSet::finite(vec![]).is_err());
        assert_eq!(StateSet::finite(vec![2.0, 5.0]).unwrap().k(), Some(2));
    }

    #[test]
    fn interval_bounds() {
        assert!(StateSet::interval(1.0, 0.0).is_err());
        let unit = StateSet::interval(0.0, 1.0).unwrap();
        assert!(unit.contains(0.0) && unit.contains(1.0) && !unit.contains(1.5));
        assert_eq!(unit.k(), None);
    }

    #[test]
    fn same_extension_ignores_order() {
        let a = StateSet::finite(vec![0.0, 1.0]).unwrap();
        let b = StateSet::finite(vec![1.0, 0.0]).unwrap();
        assert!(a.same_extension(&b));
        assert!(!a.same_extension(&StateSet::unit_interval()));
    }

    #[test]
    fn entities_membership() {
        let e = Entities::new(vec![0.0, 1.0, 2.0]).unwrap();
        assert!(e.check_membership(&StateSet::binary()).is_err());
        assert!(Entities::new(vec![]).is_err());
    }
}
