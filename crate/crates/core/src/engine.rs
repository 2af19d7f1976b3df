use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::milieu::Link;
use crate::model::{ConcreteParameters, Regime, SystemModel, UpdateFunction};
use crate::state::{Entities, State};

impl ConcreteParameters {
    /// Applies the update function to entity `i` (0-based) given its own
    /// state and the states of its milieu, in milieu order.
    pub fn update_entity(&self, i: usize, own: State, milieu: &[State], t: usize) -> Result<State> {
        let _ = t; // both bound update functions are time-invariant
        match &self.update_fn {
            UpdateFunction::RuleTable => {
                let table = self
                    .table()
                    .ok_or_else(|| Error::Binding("update-rules".into()))?;
                let undefined = || Error::UndefinedTransition {
                    entity: i + 1,
                    neighborhood: key_states(table.self_position(), own, milieu),
                };
                let q = &self.state_set;
                let own_index = q.index_of(own).ok_or_else(undefined)?;
                let mut digits = Vec::with_capacity(milieu.len());
                for s in milieu {
                    digits.push(q.index_of(*s).ok_or_else(undefined)?);
                }
                let out = table.lookup(own_index, digits).ok_or_else(undefined)?;
                Ok(q.state_at(out).expect("table outputs are below k"))
            }
            UpdateFunction::Neural(update) => update.apply(i, own, milieu),
        }
    }

    /// Milieu states of entity `i` read from `snapshot`.
    pub(crate) fn gather(&self, i: usize, snapshot: &[State], out: &mut Vec<State>) {
        out.clear();
        let ground = self.state_set.ground();
        out.extend(
            self.milieus
                .get(i)
                .unwrap_or(&[])
                .iter()
                .map(|link| match *link {
                    Link::Entity(j) => snapshot[j],
                    Link::Boundary => ground,
                }),
        );
    }

    /// One synchronous update of every entity from `snapshot`.
    pub(crate) fn next_states(&self, snapshot: &[State], t: usize) -> Result<Vec<State>> {
        let mut milieu = Vec::new();
        let mut next = Vec::with_capacity(snapshot.len());
        for (i, &own) in snapshot.iter().enumerate() {
            self.gather(i, snapshot, &mut milieu);
            next.push(self.update_entity(i, own, &milieu, t)?);
        }
        Ok(next)
    }
}

fn key_states(self_position: usize, own: State, milieu: &[State]) -> Vec<State> {
    let mut key = milieu.to_vec();
    key.insert(self_position.min(key.len()), own);
    key
}

/// Advances a metastable or actual model by one synchronous time step.
///
/// Every entity reads only the pre-step snapshot. The new row is appended to
/// the trajectory and the result is in the actual regime.
pub fn step(model: &SystemModel) -> Result<SystemModel> {
    let params = model.expect_concrete()?;
    let snapshot = model
        .current_entities()
        .expect("concrete models have entities");
    let next = params.next_states(snapshot, model.current_step())?;
    Ok(model.advance(Entities::new(next)?))
}

/// Executes a metastable model for `t` steps.
pub fn actualize(model: &SystemModel, t: usize) -> Result<SystemModel> {
    model.expect_regime(Regime::Metastable)?;
    if t < 1 {
        return Err(Error::Precondition("actualize needs t >= 1".into()));
    }
    let params = model.params();
    let mut rows = Vec::with_capacity(t);
    let mut current = params.entities.as_slice().to_vec();
    for now in 0..t {
        current = params.next_states(&current, now).map_err(|e| Error::AtStep {
            step: now,
            source: Box::new(e),
        })?;
        rows.push(current.clone());
    }
    let mut out = model.clone();
    for row in rows {
        out = out.advance(Entities::new(row)?);
    }
    Ok(out)
}

/// Runs `params` for `t` steps and returns only the final row.
pub(crate) fn final_row(params: &ConcreteParameters, t: usize) -> Result<Vec<State>> {
    let mut current = params.entities.as_slice().to_vec();
    for now in 0..t {
        current = params.next_states(&current, now)?;
    }
    Ok(current)
}
