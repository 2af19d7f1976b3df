//! Cellular automata `(C, K, N, delta)` and their embedding into the system
//! metamodel.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::milieu::{Link, Milieus};
use crate::model::{
    ConcreteParameters, OperationKind, Regime, StructureKind, SystemModel, UpdateFunction,
};
use crate::state::{Entities, State, StateSet};

pub use crate::rule_table::RuleTable;

/// How neighborhoods treat the lattice edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Indices wrap around (ring or torus).
    #[default]
    Periodic,
    /// Neighbors past the edge are phantom cells fixed in the ground state.
    Fixed,
}

/// A cellular automaton with a finite state set and an extensional
/// transition function.
#[derive(Debug, Clone, PartialEq)]
pub struct CellularAutomaton {
    cells: Vec<State>,
    states: StateSet,
    neighborhoods: Milieus,
    transition: RuleTable,
}

impl CellularAutomaton {
    pub fn new(
        cells: Vec<State>,
        states: StateSet,
        neighborhoods: Milieus,
        transition: RuleTable,
    ) -> Result<Self> {
        let k = states
            .k()
            .ok_or_else(|| Error::Validation("cellular automata need a finite state set".into()))?;
        let cells_e = Entities::new(cells)?;
        cells_e.check_membership(&states)?;
        neighborhoods.validate(cells_e.e())?;
        let n = neighborhoods
            .uniform_arity()
            .ok_or_else(|| Error::Validation("neighborhoods differ in size".into()))?;
        if transition.k() != k || transition.arity() != n + 1 {
            return Err(Error::Validation(format!(
                "transition over k={}, arity {} does not fit k={k}, n={n}",
                transition.k(),
                transition.arity()
            )));
        }
        Ok(CellularAutomaton {
            cells: cells_e.into_vec(),
            states,
            neighborhoods,
            transition,
        })
    }

    /// An elementary automaton: binary states, radius-1 ring and a Wolfram
    /// rule number.
    pub fn elementary(rule: u32, cells: Vec<State>, boundary: Boundary) -> Result<Self> {
        let c = cells.len();
        CellularAutomaton::new(
            cells,
            StateSet::binary(),
            ring_milieu_with(c, 1, boundary)?,
            RuleTable::elementary(rule)?,
        )
    }

    /// Conway's Life on a `width x height` torus, cells in row-major order.
    pub fn life(width: usize, height: usize, cells: Vec<State>) -> Result<Self> {
        if cells.len() != width * height {
            return Err(Error::Dimension {
                expected: width * height,
                found: cells.len(),
            });
        }
        CellularAutomaton::new(
            cells,
            StateSet::binary(),
            moore_milieu(width, height)?,
            life_rule_table(),
        )
    }

    pub fn cells(&self) -> &[State] {
        &self.cells
    }

    pub fn states(&self) -> &StateSet {
        &self.states
    }

    pub fn neighborhoods(&self) -> &Milieus {
        &self.neighborhoods
    }

    pub fn transition(&self) -> &RuleTable {
        &self.transition
    }
}

/// The total elementary table for `rule_number` in Wolfram's convention.
pub fn elementary_rule_table(rule_number: u32) -> Result<RuleTable> {
    RuleTable::elementary(rule_number)
}

/// The B3/S23 Life table, keys laid out to match [`moore_milieu`].
pub fn life_rule_table() -> RuleTable {
    RuleTable::life()
}

/// Periodic 1-D neighborhoods: cell `i` sees `i-radius..i-1` then
/// `i+1..i+radius`, wrapped modulo `c`.
pub fn ring_milieu(c: usize, radius: usize) -> Result<Milieus> {
    ring_milieu_with(c, radius, Boundary::Periodic)
}

pub fn ring_milieu_with(c: usize, radius: usize, boundary: Boundary) -> Result<Milieus> {
    if radius == 0 {
        return Err(Error::Size("ring radius must be at least 1".into()));
    }
    match boundary {
        Boundary::Periodic if c < 2 * radius + 1 => {
            return Err(Error::Size(format!(
                "ring of {c} cells cannot hold radius {radius} (needs {})",
                2 * radius + 1
            )))
        }
        Boundary::Fixed if c == 0 => return Err(Error::Size("empty lattice".into())),
        _ => {}
    }
    let offsets = (1..=radius).rev().map(|d| -(d as isize)).chain(1..=radius as isize);
    let lists = (0..c)
        .map(|i| {
            offsets
                .clone()
                .map(|d| {
                    let j = i as isize + d;
                    match boundary {
                        Boundary::Periodic => Link::Entity(j.rem_euclid(c as isize) as usize),
                        Boundary::Fixed if (0..c as isize).contains(&j) => {
                            Link::Entity(j as usize)
                        }
                        Boundary::Fixed => Link::Boundary,
                    }
                })
                .collect()
        })
        .collect();
    Ok(Milieus::new(lists))
}

/// Toroidal Moore neighborhoods on a row-major grid, neighbor order
/// NW, N, NE, W, E, SW, S, SE.
pub fn moore_milieu(width: usize, height: usize) -> Result<Milieus> {
    if width < 3 || height < 3 {
        return Err(Error::Size(format!(
            "Moore grid {width}x{height} must be at least 3x3"
        )));
    }
    const OFFSETS: [(isize, isize); 8] = [
        (-1, -1),
        (-1, 0),
        (-1, 1),
        (0, -1),
        (0, 1),
        (1, -1),
        (1, 0),
        (1, 1),
    ];
    let (w, h) = (width as isize, height as isize);
    let lists = (0..height as isize)
        .flat_map(|row| (0..w).map(move |col| (row, col)))
        .map(|(row, col)| {
            OFFSETS
                .iter()
                .map(|(dr, dc)| {
                    let r = (row + dr).rem_euclid(h);
                    let c = (col + dc).rem_euclid(w);
                    Link::Entity((r * w + c) as usize)
                })
                .collect()
        })
        .collect();
    Ok(Milieus::new(lists))
}

/// Builds the metastable system model of a cellular automaton: entities are
/// the cells, `Q = K`, milieus are the neighborhoods and the update function
/// looks up `delta`. There is no adaptation function, no adaptation
/// structures and no further structures or operations; the table lives in the
/// rule set but is implicit in the update function rather than a declared
/// structure.
pub fn ca_to_system_model(ca: &CellularAutomaton) -> SystemModel {
    let mut params = ConcreteParameters::new(
        Entities::new(ca.cells.clone()).expect("validated cells"),
        ca.states.clone(),
        ca.neighborhoods.clone(),
        UpdateFunction::RuleTable,
    );
    params.rules.update_rules = Some(ca.transition.clone());
    SystemModel::metastable(ca_structures(), vec![OperationKind::UpdateFn], params)
        .expect("a valid automaton yields valid parameters")
}

pub(crate) fn ca_structures() -> Vec<StructureKind> {
    vec![
        StructureKind::Entities,
        StructureKind::States,
        StructureKind::Milieus,
    ]
}

/// Recovers the automaton from a rule-table system model. Executed models
/// yield the automaton at their initial state.
pub fn system_model_to_ca(model: &SystemModel) -> Result<CellularAutomaton> {
    if model.regime() == Regime::Virtual {
        return Err(Error::Regime {
            expected: "metastable or actual",
            found: model.regime(),
        });
    }
    let p = model.params();
    if p.update_fn != UpdateFunction::RuleTable {
        return Err(Error::Capability(format!(
            "update function {} is not a rule table",
            p.update_fn.id()
        )));
    }
    if p.adaptation_fn.is_some() || !p.extra_operations.is_empty() {
        return Err(Error::Capability(
            "cellular automata carry no adaptation or further operations".into(),
        ));
    }
    CellularAutomaton::new(
        p.entities.as_slice().to_vec(),
        p.state_set.clone(),
        p.milieus.clone(),
        p.table().cloned().ok_or_else(|| Error::Binding("update-rules".into()))?,
    )
}
