use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::adaptation::{Mutation, Strategy};
use crate::ann::{LearnSettings, NeuralUpdate};
use crate::error::{Error, Result};
use crate::milieu::Milieus;
use crate::rule_table::RuleTable;
use crate::state::{Entities, State, StateSet};

/// Lifecycle stage of a [`SystemModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Regime {
    /// Declared structure and operation kinds, no parameters.
    Virtual,
    /// Fully parameterized, not yet executed.
    Metastable,
    /// Executed; carries a trajectory.
    Actual,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Virtual => "virtual",
            Regime::Metastable => "metastable",
            Regime::Actual => "actual",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StructureKind {
    Entities,
    States,
    Milieus,
    UpdateRules,
    AdaptationRules,
    AdaptationEnd,
    Extra(String),
}

impl StructureKind {
    pub fn name(&self) -> &str {
        match self {
            StructureKind::Entities => "entities",
            StructureKind::States => "states",
            StructureKind::Milieus => "milieus",
            StructureKind::UpdateRules => "update-rules",
            StructureKind::AdaptationRules => "adaptation-rules",
            StructureKind::AdaptationEnd => "adaptation-end",
            StructureKind::Extra(name) => name,
        }
    }

    /// Parses a kind name; unknown names become [`StructureKind::Extra`].
    pub fn parse(name: &str) -> Self {
        match name {
            "entities" => StructureKind::Entities,
            "states" => StructureKind::States,
            "milieus" => StructureKind::Milieus,
            "update-rules" => StructureKind::UpdateRules,
            "adaptation-rules" => StructureKind::AdaptationRules,
            "adaptation-end" => StructureKind::AdaptationEnd,
            other => StructureKind::Extra(other.into()),
        }
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OperationKind {
    UpdateFn,
    AdaptationFn,
    Extra(String),
}

impl OperationKind {
    pub fn name(&self) -> &str {
        match self {
            OperationKind::UpdateFn => "update-fn",
            OperationKind::AdaptationFn => "adaptation-fn",
            OperationKind::Extra(name) => name,
        }
    }

    pub fn parse(name: &str) -> Self {
        match name {
            "update-fn" => OperationKind::UpdateFn,
            "adaptation-fn" => OperationKind::AdaptationFn,
            other => OperationKind::Extra(other.into()),
        }
    }
}

impl fmt::Display for OperationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComparisonScope {
    /// Targets are compared against the final entity states (`p = e`).
    FinalState,
    /// Targets describe a trajectory row. Typed but not supported by the
    /// adaptation functions.
    TrajectoryRow,
}

/// The adaptation end `P`: the target an adaptation function drives toward.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationEnd {
    pub targets: Vec<State>,
    pub scope: ComparisonScope,
}

impl AdaptationEnd {
    pub fn final_state(targets: Vec<State>) -> Self {
        AdaptationEnd {
            targets,
            scope: ComparisonScope::FinalState,
        }
    }

    /// Number of targets `p`.
    pub fn p(&self) -> usize {
        self.targets.len()
    }
}

/// Update rules `U` and adaptation rules `A`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RuleSet {
    /// The rule table for finite models. Each defined entry is one update
    /// rule. Function-encoded models (neural networks) leave this empty.
    pub update_rules: Option<RuleTable>,
    /// Mutation operators available to rule evolution.
    pub adaptation_rules: Vec<Mutation>,
}

impl RuleSet {
    /// Number of update rules `u`.
    pub fn u(&self) -> usize {
        self.update_rules.as_ref().map_or(0, RuleTable::defined)
    }

    /// Number of adaptation rules `a`.
    pub fn a(&self) -> usize {
        self.adaptation_rules.len()
    }
}

/// The registered update function `phi`.
#[derive(Debug, Clone, PartialEq)]
pub enum UpdateFunction {
    /// Lookup into the model's rule table.
    RuleTable,
    /// Weighted input followed by an activation, per unit.
    Neural(NeuralUpdate),
}

impl UpdateFunction {
    pub fn id(&self) -> &'static str {
        match self {
            UpdateFunction::RuleTable => "rule-table",
            UpdateFunction::Neural(_) => "neural",
        }
    }
}

/// The registered adaptation function `psi`.
#[derive(Debug, Clone, PartialEq)]
pub enum AdaptationFunction {
    /// Evolutionary search over rule tables.
    EvolveRules {
        strategy: Strategy,
        mutation: Mutation,
        seed: u64,
    },
    /// Weight learning for neural networks.
    Learn(LearnSettings),
}

impl AdaptationFunction {
    pub fn id(&self) -> &'static str {
        match self {
            AdaptationFunction::EvolveRules { .. } => "evolve-rules",
            AdaptationFunction::Learn(_) => "learn",
        }
    }
}

/// Everything needed to turn a virtual model into a metastable one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcreteParameters {
    /// Initial entity states.
    pub entities: Entities,
    pub state_set: StateSet,
    pub milieus: Milieus,
    pub rules: RuleSet,
    pub adaptation_end: Option<AdaptationEnd>,
    pub update_fn: UpdateFunction,
    pub adaptation_fn: Option<AdaptationFunction>,
    pub extra_structures: BTreeMap<String, Vec<State>>,
    pub extra_operations: BTreeSet<String>,
    /// Total time steps.
    pub t: usize,
    /// Maximum adaptation iterations.
    pub g: usize,
    /// Loss tolerance.
    pub l: f64,
}

impl ConcreteParameters {
    /// Parameters with no rules, no adaptation and `t = g = 1`, `l = 0`.
    pub fn new(
        entities: Entities,
        state_set: StateSet,
        milieus: Milieus,
        update_fn: UpdateFunction,
    ) -> Self {
        ConcreteParameters {
            entities,
            state_set,
            milieus,
            rules: RuleSet::default(),
            adaptation_end: None,
            update_fn,
            adaptation_fn: None,
            extra_structures: BTreeMap::new(),
            extra_operations: BTreeSet::new(),
            t: 1,
            g: 1,
            l: 0.0,
        }
    }

    /// The rule table, when one is bound.
    pub fn table(&self) -> Option<&RuleTable> {
        self.rules.update_rules.as_ref()
    }

    /// Checks internal consistency of all parameters.
    pub fn validate(&self) -> Result<()> {
        let e = self.entities.e();
        self.milieus.validate(e)?;
        self.entities.check_membership(&self.state_set)?;
        if self.t < 1 {
            return Err(Error::Validation("t must be at least 1".into()));
        }
        if !(self.l.is_finite() && self.l >= 0.0) {
            return Err(Error::Validation(format!("loss tolerance {} must be >= 0", self.l)));
        }
        if self.adaptation_fn.is_some() && self.g < 1 {
            return Err(Error::Validation("g must be at least 1".into()));
        }
        if let Some(table) = self.table() {
            let k = self.state_set.k().ok_or_else(|| {
                Error::Validation("rule tables need a finite state set".into())
            })?;
            if table.k() != k {
                return Err(Error::Validation(format!(
                    "rule table has k = {}, state set has k = {k}",
                    table.k()
                )));
            }
        }
        match &self.update_fn {
            UpdateFunction::RuleTable => {
                let table = self.table().ok_or_else(|| {
                    Error::Binding("update-rules (rule-table update function)".into())
                })?;
                for (i, milieu) in self.milieus.iter().enumerate() {
                    if milieu.len() + 1 != table.arity() {
                        return Err(Error::Validation(format!(
                            "entity {} has {} neighbors, rule table expects {}",
                            i + 1,
                            milieu.len(),
                            table.arity() - 1
                        )));
                    }
                }
            }
            UpdateFunction::Neural(update) => update.validate(&self.milieus, &self.state_set)?,
        }
        for rule in &self.rules.adaptation_rules {
            rule.validate()?;
        }
        if let Some(end) = &self.adaptation_end {
            if end.targets.is_empty() {
                return Err(Error::Validation("adaptation end needs p >= 1 targets".into()));
            }
            if end.scope == ComparisonScope::FinalState && end.p() != e {
                return Err(Error::Validation(format!(
                    "final-state adaptation end has p = {} targets for e = {e} entities",
                    end.p()
                )));
            }
            if let Some(bad) = end.targets.iter().find(|s| !self.state_set.contains(**s)) {
                return Err(Error::Validation(format!("target {bad} outside the state set")));
            }
        }
        match (&self.adaptation_fn, &self.update_fn) {
            (Some(AdaptationFunction::EvolveRules { mutation, .. }), UpdateFunction::RuleTable) => {
                mutation.validate()?
            }
            (Some(AdaptationFunction::Learn(settings)), UpdateFunction::Neural(_)) => {
                settings.validate()?
            }
            (Some(psi), phi) => {
                return Err(Error::Validation(format!(
                    "adaptation function {} cannot adapt update function {}",
                    psi.id(),
                    phi.id()
                )))
            }
            (None, _) => {}
        }
        Ok(())
    }

    pub fn binds_structure(&self, kind: &StructureKind) -> bool {
        match kind {
            StructureKind::Entities | StructureKind::States | StructureKind::Milieus => true,
            StructureKind::UpdateRules => self.rules.update_rules.is_some(),
            StructureKind::AdaptationRules => !self.rules.adaptation_rules.is_empty(),
            StructureKind::AdaptationEnd => self.adaptation_end.is_some(),
            StructureKind::Extra(name) => self.extra_structures.contains_key(name),
        }
    }

    pub fn binds_operation(&self, kind: &OperationKind) -> bool {
        match kind {
            OperationKind::UpdateFn => true,
            OperationKind::AdaptationFn => self.adaptation_fn.is_some(),
            OperationKind::Extra(name) => self.extra_operations.contains(name),
        }
    }
}

/// Identifies a rule table in adaptation logs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableId {
    Wolfram(u64),
    /// FNV-1a fingerprint, for tables without a 64-bit Wolfram number.
    Hash(u64),
}

impl TableId {
    pub fn of(table: &RuleTable) -> Self {
        table
            .wolfram_number()
            .map_or_else(|| TableId::Hash(table.fingerprint()), TableId::Wolfram)
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableId::Wolfram(n) => write!(f, "{n}"),
            TableId::Hash(h) => write!(f, "h:{h:016x}"),
        }
    }
}

/// One adaptation iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationRecord {
    pub iteration: usize,
    pub loss: f64,
    pub accepted: bool,
    /// The candidate rule table, for rule evolution.
    pub table: Option<TableId>,
}

/// Entity snapshots for time steps `0..=t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    rows: Vec<Entities>,
    pub adaptation_log: Option<Vec<AdaptationRecord>>,
}

impl Trajectory {
    pub fn start(initial: Entities) -> Self {
        Trajectory {
            rows: alloc::vec![initial],
            adaptation_log: None,
        }
    }

    /// Rebuilds a trajectory from stored rows (row 0 first).
    pub fn from_rows(rows: Vec<Entities>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Validation("trajectory needs at least one row".into()));
        }
        Ok(Trajectory {
            rows,
            adaptation_log: None,
        })
    }

    pub fn rows(&self) -> &[Entities] {
        &self.rows
    }

    /// Current time step: the number of completed steps.
    pub fn t(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn last(&self) -> &Entities {
        self.rows.last().expect("trajectory is never empty")
    }

    pub(crate) fn push(&mut self, row: Entities) {
        self.rows.push(row);
    }
}

/// The system model: declared structure and operation kinds, plus
/// parameters and a trajectory depending on the regime.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    regime: Regime,
    structures: Vec<StructureKind>,
    operations: Vec<OperationKind>,
    params: Option<ConcreteParameters>,
    trajectory: Option<Trajectory>,
}

impl SystemModel {
    /// Declares a virtual model with at least one structure and one
    /// operation.
    pub fn new_virtual(
        structures: Vec<StructureKind>,
        operations: Vec<OperationKind>,
    ) -> Result<Self> {
        if structures.is_empty() {
            return Err(Error::Constraint("a model needs at least one structure (s >= 1)".into()));
        }
        if operations.is_empty() {
            return Err(Error::Constraint("a model needs at least one operation (o >= 1)".into()));
        }
        if let Some(dup) = first_duplicate(&structures) {
            return Err(Error::Constraint(format!("structure {dup} declared twice")));
        }
        if let Some(dup) = first_duplicate(&operations) {
            return Err(Error::Constraint(format!("operation {dup} declared twice")));
        }
        Ok(SystemModel {
            regime: Regime::Virtual,
            structures,
            operations,
            params: None,
            trajectory: None,
        })
    }

    /// Feeds concrete parameters into a virtual model, yielding a metastable
    /// one. `self` is left untouched.
    pub fn concretize(&self, params: ConcreteParameters) -> Result<SystemModel> {
        self.expect_regime(Regime::Virtual)?;
        params.validate()?;
        if let Some(kind) = self.structures.iter().find(|k| !params.binds_structure(k)) {
            return Err(Error::Binding(format!("structure {kind}")));
        }
        if let Some(kind) = self.operations.iter().find(|k| !params.binds_operation(k)) {
            return Err(Error::Binding(format!("operation {kind}")));
        }
        Ok(SystemModel {
            regime: Regime::Metastable,
            structures: self.structures.clone(),
            operations: self.operations.clone(),
            params: Some(params),
            trajectory: None,
        })
    }

    /// Declares and concretizes in one go.
    pub fn metastable(
        structures: Vec<StructureKind>,
        operations: Vec<OperationKind>,
        params: ConcreteParameters,
    ) -> Result<SystemModel> {
        SystemModel::new_virtual(structures, operations)?.concretize(params)
    }

    /// Restores an executed model, e.g. from a file. The trajectory's first
    /// row must equal the initial entities.
    pub fn actual(
        structures: Vec<StructureKind>,
        operations: Vec<OperationKind>,
        params: ConcreteParameters,
        trajectory: Trajectory,
    ) -> Result<SystemModel> {
        let mut model = SystemModel::metastable(structures, operations, params)?;
        if trajectory.rows()[0] != model.params().entities {
            return Err(Error::Validation(
                "trajectory row 0 differs from the initial entities".into(),
            ));
        }
        let e = model.params().entities.e();
        if let Some(row) = trajectory.rows().iter().find(|r| r.e() != e) {
            return Err(Error::Dimension {
                expected: e,
                found: row.e(),
            });
        }
        model.regime = Regime::Actual;
        model.trajectory = Some(trajectory);
        Ok(model)
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn structures(&self) -> &[StructureKind] {
        &self.structures
    }

    pub fn operations(&self) -> &[OperationKind] {
        &self.operations
    }

    /// Number of declared structures `s`.
    pub fn s(&self) -> usize {
        self.structures.len()
    }

    /// Number of declared operations `o`.
    pub fn o(&self) -> usize {
        self.operations.len()
    }

    pub fn declares_structure(&self, kind: &StructureKind) -> bool {
        self.structures.contains(kind)
    }

    pub fn declares_operation(&self, kind: &OperationKind) -> bool {
        self.operations.contains(kind)
    }

    pub fn concrete_params(&self) -> Option<&ConcreteParameters> {
        self.params.as_ref()
    }

    pub fn trajectory(&self) -> Option<&Trajectory> {
        self.trajectory.as_ref()
    }

    /// Parameters of a metastable or actual model.
    ///
    /// # Panics
    /// On a virtual model.
    pub fn params(&self) -> &ConcreteParameters {
        self.params.as_ref().expect("virtual models carry no parameters")
    }

    /// Current time step `t̄`.
    pub fn current_step(&self) -> usize {
        self.trajectory.as_ref().map_or(0, Trajectory::t)
    }

    /// Entity states at the current time step.
    pub fn current_entities(&self) -> Option<&Entities> {
        match &self.trajectory {
            Some(tr) => Some(tr.last()),
            None => self.params.as_ref().map(|p| &p.entities),
        }
    }

    pub(crate) fn expect_regime(&self, expected: Regime) -> Result<()> {
        if self.regime == expected {
            Ok(())
        } else {
            Err(Error::Regime {
                expected: expected.name(),
                found: self.regime,
            })
        }
    }

    pub(crate) fn expect_concrete(&self) -> Result<&ConcreteParameters> {
        self.params.as_ref().ok_or(Error::Regime {
            expected: "metastable or actual",
            found: self.regime,
        })
    }

    /// A copy of a metastable model with replaced parameters.
    pub(crate) fn with_params(&self, params: ConcreteParameters) -> Result<SystemModel> {
        self.expect_regime(Regime::Metastable)?;
        params.validate()?;
        Ok(SystemModel {
            params: Some(params),
            ..self.clone()
        })
    }

    pub(crate) fn advance(&self, row: Entities) -> SystemModel {
        let mut next = self.clone();
        let trajectory = next
            .trajectory
            .get_or_insert_with(|| Trajectory::start(self.params().entities.clone()));
        trajectory.push(row);
        next.regime = Regime::Actual;
        next
    }
}

fn first_duplicate<T: PartialEq>(items: &[T]) -> Option<&T> {
    items
        .iter()
        .enumerate()
        .find(|(i, item)| items[..*i].contains(item))
        .map(|(_, item)| item)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ca_kinds() -> (Vec<StructureKind>, Vec<OperationKind>) {
        (
            vec![
                StructureKind::Entities,
                StructureKind::States,
                StructureKind::Milieus,
                StructureKind::UpdateRules,
            ],
            vec![OperationKind::UpdateFn],
        )
    }

    fn ring_params(e: usize, rule: u32) -> ConcreteParameters {
        let milieus = Milieus::from_indices(
            (0..e).map(|i| vec![(i + e - 1) % e, (i + 1) % e]).collect(),
        );
        let mut entities = vec![0.0; e];
        entities[e / 2] = 1.0;
        let mut p = ConcreteParameters::new(
            Entities::new(entities).unwrap(),
            StateSet::binary(),
            milieus,
            UpdateFunction::RuleTable,
        );
        p.rules.update_rules = Some(RuleTable::elementary(rule).unwrap());
        p.t = 3;
        p
    }

    #[test]
    fn minimal_virtual_model() {
        let (s, o) = ca_kinds();
        let m = SystemModel::new_virtual(s.clone(), o).unwrap();
        assert_eq!(m.regime(), Regime::Virtual);
        assert_eq!((m.s(), m.o()), (4, 1));
        assert_eq!(m.structures(), &s[..]);
        assert!(m.concrete_params().is_none());
    }

    #[test]
    fn full_virtual_model() {
        let m = SystemModel::new_virtual(
            vec![
                StructureKind::Entities,
                StructureKind::States,
                StructureKind::Milieus,
                StructureKind::UpdateRules,
                StructureKind::AdaptationRules,
                StructureKind::AdaptationEnd,
            ],
            vec![OperationKind::UpdateFn, OperationKind::AdaptationFn],
        )
        .unwrap();
        assert_eq!((m.s(), m.o()), (6, 2));
    }

    #[test]
    fn empty_kind_lists_rejected() {
        assert!(matches!(
            SystemModel::new_virtual(vec![], vec![OperationKind::UpdateFn]),
            Err(Error::Constraint(_))
        ));
        assert!(matches!(
            SystemModel::new_virtual(vec![StructureKind::Entities], vec![]),
            Err(Error::Constraint(_))
        ));
    }

    #[test]
    fn concretize_keeps_original() {
        let (s, o) = ca_kinds();
        let virt = SystemModel::new_virtual(s, o).unwrap();
        let meta = virt.concretize(ring_params(5, 110)).unwrap();
        assert_eq!(meta.regime(), Regime::Metastable);
        assert_eq!(virt.regime(), Regime::Virtual);
        assert!(meta.trajectory().is_none());
        assert_eq!(meta.params().rules.u(), 8);
    }

    #[test]
    fn concretize_rejects_dangling_milieu() {
        let (s, o) = ca_kinds();
        let virt = SystemModel::new_virtual(s, o).unwrap();
        let mut p = ring_params(5, 110);
        p.milieus = Milieus::from_indices(
            (0..5).map(|i| vec![if i == 0 { 6 } else { i - 1 }, (i + 1) % 5]).collect(),
        );
        assert!(matches!(virt.concretize(p), Err(Error::Validation(_))));
    }

    #[test]
    fn concretize_rejects_non_virtual() {
        let (s, o) = ca_kinds();
        let meta = SystemModel::metastable(s, o, ring_params(5, 110)).unwrap();
        assert!(matches!(
            meta.concretize(ring_params(5, 110)),
            Err(Error::Regime { .. })
        ));
    }

    #[test]
    fn concretize_names_missing_binding() {
        let virt = SystemModel::new_virtual(
            vec![StructureKind::Entities, StructureKind::AdaptationEnd],
            vec![OperationKind::UpdateFn],
        )
        .unwrap();
        match virt.concretize(ring_params(5, 110)) {
            Err(Error::Binding(what)) => assert!(what.contains("adaptation-end")),
            other => panic!("expected binding error, got {other:?}"),
        }
        let virt = SystemModel::new_virtual(
            vec![StructureKind::Entities],
            vec![OperationKind::UpdateFn, OperationKind::AdaptationFn],
        )
        .unwrap();
        assert!(matches!(virt.concretize(ring_params(5, 110)), Err(Error::Binding(_))));
    }

    #[test]
    fn state_outside_set_rejected() {
        let mut p = ring_params(5, 110);
        p.entities = Entities::new(vec![0.0, 2.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(p.validate(), Err(Error::Validation(_))));
    }

    #[test]
    fn table_arity_must_match_milieus() {
        let mut p = ring_params(5, 110);
        p.rules.update_rules = Some(RuleTable::from_wolfram(2, 2, 0, 6).unwrap());
        assert!(p.validate().is_err());
    }

    #[test]
    fn table_id_display() {
        let t = RuleTable::elementary(110).unwrap();
        assert_eq!(alloc::format!("{}", TableId::of(&t)), "110");
        let mut partial = t.clone();
        partial.set_index(0, None).unwrap();
        assert!(alloc::format!("{}", TableId::of(&partial)).starts_with("h:"));
    }
}
