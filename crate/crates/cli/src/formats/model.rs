//! Model documents.
//!
//! A model is one JSON object. Virtual models carry only the declared kind
//! names; metastable models add the bound parameters; actual models also
//! carry their trajectory. Entity references in milieus are 1-based and `0`
//! stands for a fixed boundary cell. Serialization is deterministic: the
//! same model always yields the same bytes.

use std::collections::BTreeMap;

use metamodel_core::adaptation::{Mutation, Strategy};
use metamodel_core::ann::{ActivationKind, LearnSettings, NeuralUpdate};
use metamodel_core::{
    AdaptationEnd, AdaptationFunction, ComparisonScope, ConcreteParameters, Entities, Link,
    Milieus, OperationKind, Regime, RuleSet, RuleTable, StateSet, StructureKind, SystemModel,
    Trajectory, UpdateFunction,
};
use serde::{Deserialize, Serialize};

use super::rules;
use crate::error::{FileError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub regime: String,
    pub structures: StructuresDoc,
    pub operations: OperationsDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructuresDoc {
    pub declared: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entities: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<StatesDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub milieus: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub update_rules: Option<RuleTableDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub adaptation_rules: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptation_end: Option<AdaptationEndDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum StatesDoc {
    Finite(Vec<f64>),
    Interval([f64; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleTableDoc {
    pub arity: usize,
    pub self_position: usize,
    pub rules: RulesDoc,
}

/// Either `"wolfram:<n>"` or a list of rule lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RulesDoc {
    Number(String),
    Lines(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptationEndDoc {
    pub targets: Vec<f64>,
    #[serde(default = "final_state")]
    pub scope: String,
}

fn final_state() -> String {
    "final-state".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationsDoc {
    pub declared: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub update_fn: Option<UpdateFnDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptation_fn: Option<AdaptationFnDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum UpdateFnDoc {
    RuleTable,
    Neural(NeuralDoc),
}

/// Weights and activation of a network's units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralDoc {
    /// `threshold` or `logistic`.
    pub activation: String,
    /// `weights[j][p]` weighs the `p`-th incoming link of unit `j`.
    pub weights: Vec<Vec<f64>>,
    pub self_weights: Vec<f64>,
    /// Per-unit thresholds (`threshold`) or biases (`logistic`).
    pub params: Vec<f64>,
    /// Feed-forward layers of 1-based unit numbers; absent for lattices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AdaptationFnDoc {
    EvolveRules {
        strategy: String,
        mutation: String,
        seed: u64,
    },
    Learn {
        learning_rate: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDoc {
    pub t: usize,
    pub g: usize,
    pub l: f64,
}

pub fn strategy_name(strategy: Strategy) -> &'static str {
    match strategy {
        Strategy::HillClimb => "hill",
        Strategy::Exhaustive => "exhaustive",
    }
}

pub fn parse_strategy(name: &str) -> Result<Strategy> {
    match name {
        "hill" => Ok(Strategy::HillClimb),
        "exhaustive" => Ok(Strategy::Exhaustive),
        other => Err(FileError::malformed(format!("unknown strategy {other:?}"))),
    }
}

pub fn mutation_name(mutation: Mutation) -> String {
    match mutation {
        Mutation::SingleBitFlip => "single-bit-flip".into(),
        Mutation::KBitFlip(k) => format!("k-bit-flip:{k}"),
    }
}

pub fn parse_mutation(name: &str) -> Result<Mutation> {
    if name == "single-bit-flip" {
        return Ok(Mutation::SingleBitFlip);
    }
    name.strip_prefix("k-bit-flip:")
        .and_then(|k| k.parse().ok())
        .map(Mutation::KBitFlip)
        .ok_or_else(|| FileError::malformed(format!("unknown mutation {name:?}")))
}

impl StatesDoc {
    pub fn of(set: &StateSet) -> Self {
        match set {
            StateSet::Finite(states) => StatesDoc::Finite(states.clone()),
            StateSet::Interval { lo, hi } => StatesDoc::Interval([*lo, *hi]),
        }
    }

    pub fn to_state_set(&self) -> Result<StateSet> {
        Ok(match self {
            StatesDoc::Finite(states) => StateSet::finite(states.clone())?,
            StatesDoc::Interval([lo, hi]) => StateSet::interval(*lo, *hi)?,
        })
    }
}

impl NeuralDoc {
    pub fn of(update: &NeuralUpdate) -> Self {
        let (activation, params) = match &update.activation {
            ActivationKind::Threshold { theta } => ("threshold", theta.clone()),
            ActivationKind::Logistic { bias } => ("logistic", bias.clone()),
        };
        NeuralDoc {
            activation: activation.into(),
            weights: update.weights.clone(),
            self_weights: update.self_weights.clone(),
            params,
            layers: update.layers.as_ref().map(|layers| {
                layers
                    .iter()
                    .map(|layer| layer.iter().map(|u| u + 1).collect())
                    .collect()
            }),
        }
    }

    pub fn to_update(&self) -> Result<NeuralUpdate> {
        let activation = match self.activation.as_str() {
            "threshold" => ActivationKind::Threshold {
                theta: self.params.clone(),
            },
            "logistic" => ActivationKind::Logistic {
                bias: self.params.clone(),
            },
            other => return Err(FileError::malformed(format!("unknown activation {other:?}"))),
        };
        let layers = self
            .layers
            .as_ref()
            .map(|layers| layers.iter().map(|l| to_zero_based(l, "layers")).collect())
            .transpose()?;
        Ok(NeuralUpdate {
            weights: self.weights.clone(),
            self_weights: self.self_weights.clone(),
            activation,
            layers,
        })
    }
}

pub(crate) fn to_zero_based(units: &[usize], what: &str) -> Result<Vec<usize>> {
    units
        .iter()
        .map(|&u| {
            u.checked_sub(1)
                .ok_or_else(|| FileError::malformed(format!("{what}: unit numbers start at 1")))
        })
        .collect()
}

fn rule_table_doc(table: &RuleTable) -> Result<RuleTableDoc> {
    let rules = match table.wolfram_number() {
        Some(n) => RulesDoc::Number(format!("wolfram:{n}")),
        None => RulesDoc::Lines(rules::write_lines(table)?),
    };
    Ok(RuleTableDoc {
        arity: table.arity(),
        self_position: table.self_position(),
        rules,
    })
}

fn rule_table_from_doc(doc: &RuleTableDoc, k: usize) -> Result<RuleTable> {
    match &doc.rules {
        RulesDoc::Number(text) => rules::parse_rule_table(text, k, doc.arity, doc.self_position),
        RulesDoc::Lines(lines) => rules::parse_lines(
            lines.iter().enumerate().map(|(i, l)| (i + 1, l.as_str())),
            k,
            doc.arity,
            doc.self_position,
        ),
    }
}

impl ModelFile {
    pub fn of(model: &SystemModel) -> Result<Self> {
        let mut file = ModelFile {
            regime: model.regime().name().into(),
            structures: StructuresDoc {
                declared: model.structures().iter().map(|k| k.name().into()).collect(),
                entities: None,
                states: None,
                milieus: None,
                update_rules: None,
                adaptation_rules: Vec::new(),
                adaptation_end: None,
                extra: BTreeMap::new(),
            },
            operations: OperationsDoc {
                declared: model.operations().iter().map(|k| k.name().into()).collect(),
                update_fn: None,
                adaptation_fn: None,
                extra: Vec::new(),
            },
            params: None,
            trajectory: model
                .trajectory()
                .map(|tr| tr.rows().iter().map(|r| r.as_slice().to_vec()).collect()),
        };
        let Some(p) = model.concrete_params() else {
            return Ok(file);
        };
        let s = &mut file.structures;
        s.entities = Some(p.entities.as_slice().to_vec());
        s.states = Some(StatesDoc::of(&p.state_set));
        s.milieus = Some(
            p.milieus
                .iter()
                .map(|links| {
                    links
                        .iter()
                        .map(|link| match link {
                            Link::Entity(j) => j + 1,
                            Link::Boundary => 0,
                        })
                        .collect()
                })
                .collect(),
        );
        s.update_rules = p.table().map(rule_table_doc).transpose()?;
        s.adaptation_rules = p.rules.adaptation_rules.iter().map(|m| mutation_name(*m)).collect();
        s.adaptation_end = p.adaptation_end.as_ref().map(|end| AdaptationEndDoc {
            targets: end.targets.clone(),
            scope: match end.scope {
                ComparisonScope::FinalState => "final-state".into(),
                ComparisonScope::TrajectoryRow => "trajectory-row".into(),
            },
        });
        s.extra = p.extra_structures.clone().into_iter().collect();
        let o = &mut file.operations;
        o.update_fn = Some(match &p.update_fn {
            UpdateFunction::RuleTable => UpdateFnDoc::RuleTable,
            UpdateFunction::Neural(update) => UpdateFnDoc::Neural(NeuralDoc::of(update)),
        });
        o.adaptation_fn = p.adaptation_fn.as_ref().map(|psi| match psi {
            AdaptationFunction::EvolveRules {
                strategy,
                mutation,
                seed,
            } => AdaptationFnDoc::EvolveRules {
                strategy: strategy_name(*strategy).into(),
                mutation: mutation_name(*mutation),
                seed: *seed,
            },
            AdaptationFunction::Learn(settings) => AdaptationFnDoc::Learn {
                learning_rate: settings.learning_rate,
                seed: settings.seed,
            },
        });
        o.extra = p.extra_operations.iter().cloned().collect();
        file.params = Some(ParamsDoc {
            t: p.t,
            g: p.g,
            l: p.l,
        });
        Ok(file)
    }

    pub fn to_model(&self) -> Result<SystemModel> {
        let structures: Vec<StructureKind> =
            self.structures.declared.iter().map(|n| StructureKind::parse(n)).collect();
        let operations: Vec<OperationKind> =
            self.operations.declared.iter().map(|n| OperationKind::parse(n)).collect();
        let regime = match self.regime.as_str() {
            "virtual" => Regime::Virtual,
            "metastable" => Regime::Metastable,
            "actual" => Regime::Actual,
            other => return Err(FileError::malformed(format!("unknown regime {other:?}"))),
        };
        if regime == Regime::Virtual {
            if self.params.is_some() || self.trajectory.is_some() {
                return Err(FileError::malformed("a virtual model carries no parameters"));
            }
            return Ok(SystemModel::new_virtual(structures, operations)?);
        }
        let params = self.params()?;
        match (regime, &self.trajectory) {
            (Regime::Metastable, None) => Ok(SystemModel::metastable(structures, operations, params)?),
            (Regime::Actual, Some(rows)) => {
                let rows = rows
                    .iter()
                    .map(|r| Entities::new(r.clone()))
                    .collect::<metamodel_core::Result<Vec<_>>>()?;
                let trajectory = Trajectory::from_rows(rows)?;
                for row in trajectory.rows() {
                    row.check_membership(&params.state_set)?;
                }
                Ok(SystemModel::actual(structures, operations, params, trajectory)?)
            }
            (Regime::Metastable, Some(_)) => {
                Err(FileError::malformed("a metastable model has no trajectory"))
            }
            _ => Err(FileError::malformed("an actual model needs a trajectory")),
        }
    }

    fn params(&self) -> Result<ConcreteParameters> {
        let missing = |what: &str| FileError::malformed(format!("missing {what}"));
        let s = &self.structures;
        let o = &self.operations;
        let entities = Entities::new(s.entities.clone().ok_or_else(|| missing("structures.entities"))?)?;
        let state_set = s.states.as_ref().ok_or_else(|| missing("structures.states"))?.to_state_set()?;
        let milieus = Milieus::new(
            s.milieus
                .as_ref()
                .ok_or_else(|| missing("structures.milieus"))?
                .iter()
                .map(|links| {
                    links
                        .iter()
                        .map(|&j| match j {
                            0 => Link::Boundary,
                            j => Link::Entity(j - 1),
                        })
                        .collect()
                })
                .collect(),
        );
        let update_fn = match o.update_fn.as_ref().ok_or_else(|| missing("operations.update_fn"))? {
            UpdateFnDoc::RuleTable => UpdateFunction::RuleTable,
            UpdateFnDoc::Neural(doc) => UpdateFunction::Neural(doc.to_update()?),
        };
        let mut params = ConcreteParameters::new(entities, state_set, milieus, update_fn);
        let k = params.state_set.k();
        params.rules = RuleSet {
            update_rules: s
                .update_rules
                .as_ref()
                .map(|doc| {
                    let k = k.ok_or_else(|| {
                        FileError::malformed("rule tables need a finite state set")
                    })?;
                    rule_table_from_doc(doc, k)
                })
                .transpose()?,
            adaptation_rules: s
                .adaptation_rules
                .iter()
                .map(|m| parse_mutation(m))
                .collect::<Result<_>>()?,
        };
        params.adaptation_end = s
            .adaptation_end
            .as_ref()
            .map(|doc| -> Result<AdaptationEnd> {
                let scope = match doc.scope.as_str() {
                    "final-state" => ComparisonScope::FinalState,
                    "trajectory-row" => ComparisonScope::TrajectoryRow,
                    other => return Err(FileError::malformed(format!("unknown scope {other:?}"))),
                };
                Ok(AdaptationEnd {
                    targets: doc.targets.clone(),
                    scope,
                })
            })
            .transpose()?;
        params.adaptation_fn = o
            .adaptation_fn
            .as_ref()
            .map(|doc| -> Result<AdaptationFunction> {
                Ok(match doc {
                    AdaptationFnDoc::EvolveRules {
                        strategy,
                        mutation,
                        seed,
                    } => AdaptationFunction::EvolveRules {
                        strategy: parse_strategy(strategy)?,
                        mutation: parse_mutation(mutation)?,
                        seed: *seed,
                    },
                    AdaptationFnDoc::Learn {
                        learning_rate,
                        seed,
                    } => AdaptationFunction::Learn(LearnSettings {
                        learning_rate: *learning_rate,
                        seed: *seed,
                    }),
                })
            })
            .transpose()?;
        params.extra_structures = s.extra.clone().into_iter().collect();
        params.extra_operations = o.extra.iter().cloned().collect();
        let p = self.params.ok_or_else(|| missing("params"))?;
        params.t = p.t;
        params.g = p.g;
        params.l = p.l;
        Ok(params)
    }
}

/// Serializes a model to pretty-printed JSON with a trailing newline.
pub fn write_model(model: &SystemModel) -> Result<String> {
    let mut text = serde_json::to_string_pretty(&ModelFile::of(model)?)?;
    text.push('\n');
    Ok(text)
}

pub fn read_model(text: &str) -> Result<SystemModel> {
    let file: ModelFile = serde_json::from_str(text)?;
    file.to_model()
}
