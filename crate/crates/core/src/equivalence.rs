//! Structural and extensional comparison of system models.
//!
//! Two models are equivalent when they declare the same structure and
//! operation kinds, their structures have the same type, and their
//! operations agree on every input. Kinds present in only one model become
//! the conditions of a conditional equivalence.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{ConcreteParameters, OperationKind, Regime, StructureKind, SystemModel};
use crate::state::{State, StateSet};

/// Default largest domain enumerated exhaustively.
pub const ENUMERATION_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    /// Allowed absolute difference on sampled domains.
    pub tolerance: f64,
    /// Number of points drawn when a domain is not enumerated.
    pub sample_budget: usize,
    pub seed: u64,
    pub enumeration_cap: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            tolerance: 1e-9,
            sample_budget: 1000,
            seed: 0,
            enumeration_cap: ENUMERATION_CAP,
        }
    }
}

/// A difference between the two sides; `left` and `right` describe each
/// side's value of `aspect`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub aspect: String,
    pub left: String,
    pub right: String,
}

impl Mismatch {
    fn new(aspect: &str, left: impl ToString, right: impl ToString) -> Self {
        Mismatch {
            aspect: aspect.into(),
            left: left.to_string(),
            right: right.to_string(),
        }
    }

    fn mirrored(&self) -> Self {
        Mismatch {
            aspect: self.aspect.clone(),
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StructuralVerdict {
    Matched,
    Mismatched(Mismatch),
    MissingInLeft,
    MissingInRight,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperationalVerdict {
    /// Every input of the finite domain agrees; `domain_size` is the size of
    /// one entity's local domain `k^(m+1)`.
    ExtensionallyEqual { domain_size: u64 },
    /// `samples` drawn inputs agree within tolerance. Not a proof.
    SampledEqual { samples: usize },
    /// The first disagreeing input in canonical order. `input` is the
    /// entity's own state followed by its milieu; `entity` is 1-based.
    Counterexample {
        entity: Option<usize>,
        input: Vec<State>,
        left: State,
        right: State,
    },
    /// The functions do not share a signature.
    Mismatched(Mismatch),
    /// Procedural operations (adaptation, further operations) bound to the
    /// same implementation with the same settings.
    SameBinding,
    MissingInLeft,
    MissingInRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// A kind missing on one side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    Structure { kind: StructureKind, missing_in: Side },
    Operation { kind: OperationKind, missing_in: Side },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Conclusion {
    Equivalent,
    ConditionallyEquivalent(Vec<Condition>),
    NotEquivalent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub structural: Vec<(StructureKind, StructuralVerdict)>,
    pub operational: Vec<(OperationKind, OperationalVerdict)>,
    pub conclusion: Conclusion,
}

impl EquivalenceReport {
    fn conclude(
        structural: Vec<(StructureKind, StructuralVerdict)>,
        operational: Vec<(OperationKind, OperationalVerdict)>,
    ) -> Self {
        let broken = structural
            .iter()
            .any(|(_, v)| matches!(v, StructuralVerdict::Mismatched(_)))
            || operational.iter().any(|(_, v)| {
                matches!(
                    v,
                    OperationalVerdict::Mismatched(_) | OperationalVerdict::Counterexample { .. }
                )
            });
        let mut conditions = Vec::new();
        for (kind, v) in &structural {
            let side = match v {
                StructuralVerdict::MissingInLeft => Side::Left,
                StructuralVerdict::MissingInRight => Side::Right,
                _ => continue,
            };
            conditions.push(Condition::Structure {
                kind: kind.clone(),
                missing_in: side,
            });
        }
        for (kind, v) in &operational {
            let side = match v {
                OperationalVerdict::MissingInLeft => Side::Left,
                OperationalVerdict::MissingInRight => Side::Right,
                _ => continue,
            };
            conditions.push(Condition::Operation {
                kind: kind.clone(),
                missing_in: side,
            });
        }
        let conclusion = if broken {
            Conclusion::NotEquivalent
        } else if conditions.is_empty() {
            Conclusion::Equivalent
        } else {
            Conclusion::ConditionallyEquivalent(conditions)
        };
        EquivalenceReport {
            structural,
            operational,
            conclusion,
        }
    }

    /// The report with left and right exchanged.
    pub fn mirrored(&self) -> Self {
        let structural = self
            .structural
            .iter()
            .map(|(k, v)| {
                let v = match v {
                    StructuralVerdict::Matched => StructuralVerdict::Matched,
                    StructuralVerdict::Mismatched(m) => StructuralVerdict::Mismatched(m.mirrored()),
                    StructuralVerdict::MissingInLeft => StructuralVerdict::MissingInRight,
                    StructuralVerdict::MissingInRight => StructuralVerdict::MissingInLeft,
                };
                (k.clone(), v)
            })
            .collect();
        let operational = self
            .operational
            .iter()
            .map(|(k, v)| {
                let v = match v {
                    OperationalVerdict::Counterexample {
                        entity,
                        input,
                        left,
                        right,
                    } => OperationalVerdict::Counterexample {
                        entity: *entity,
                        input: input.clone(),
                        left: *right,
                        right: *left,
                    },
                    OperationalVerdict::Mismatched(m) => OperationalVerdict::Mismatched(m.mirrored()),
                    OperationalVerdict::MissingInLeft => OperationalVerdict::MissingInRight,
                    OperationalVerdict::MissingInRight => OperationalVerdict::MissingInLeft,
                    other => other.clone(),
                };
                (k.clone(), v)
            })
            .collect();
        let conclusion = match &self.conclusion {
            Conclusion::ConditionallyEquivalent(conds) => Conclusion::ConditionallyEquivalent(
                conds
                    .iter()
                    .map(|c| match c {
                        Condition::Structure { kind, missing_in } => Condition::Structure {
                            kind: kind.clone(),
                            missing_in: missing_in.other(),
                        },
                        Condition::Operation { kind, missing_in } => Condition::Operation {
                            kind: kind.clone(),
                            missing_in: missing_in.other(),
                        },
                    })
                    .collect(),
            ),
            other => other.clone(),
        };
        EquivalenceReport {
            structural,
            operational,
            conclusion,
        }
    }
}

fn concrete(model: &SystemModel) -> Result<&ConcreteParameters> {
    if model.regime() == Regime::Virtual {
        return Err(Error::Regime {
            expected: "metastable",
            found: model.regime(),
        });
    }
    Ok(model.params())
}

fn describe_states(q: &StateSet) -> String {
    match q {
        StateSet::Finite(states) => format!("finite {states:?}"),
        StateSet::Interval { lo, hi } => format!("interval [{lo}, {hi}]"),
    }
}

/// Compares every structure kind declared by either model.
pub fn check_structural(
    left: &SystemModel,
    right: &SystemModel,
) -> Result<Vec<(StructureKind, StructuralVerdict)>> {
    let (lp, rp) = (concrete(left)?, concrete(right)?);
    let kinds: BTreeSet<StructureKind> = left
        .structures()
        .iter()
        .chain(right.structures())
        .cloned()
        .collect();
    Ok(kinds
        .into_iter()
        .map(|kind| {
            let verdict = match (left.declares_structure(&kind), right.declares_structure(&kind)) {
                (true, true) => compare_structure(&kind, lp, rp),
                (true, false) => StructuralVerdict::MissingInRight,
                (false, _) => StructuralVerdict::MissingInLeft,
            };
            (kind, verdict)
        })
        .collect())
}

fn compare_structure(
    kind: &StructureKind,
    lp: &ConcreteParameters,
    rp: &ConcreteParameters,
) -> StructuralVerdict {
    let mismatch = |aspect: &str, l: String, r: String| {
        StructuralVerdict::Mismatched(Mismatch::new(aspect, l, r))
    };
    match kind {
        StructureKind::Entities => {
            let (l, r) = (lp.entities.e(), rp.entities.e());
            if l == r {
                StructuralVerdict::Matched
            } else {
                mismatch("count", format!("{l}"), format!("{r}"))
            }
        }
        StructureKind::States => {
            let (l, r) = (&lp.state_set, &rp.state_set);
            if l.same_extension(r) {
                StructuralVerdict::Matched
            } else if l.is_finite() != r.is_finite() {
                let kind = |q: &StateSet| if q.is_finite() { "finite" } else { "continuous" };
                mismatch("kind", kind(l).into(), kind(r).into())
            } else {
                mismatch("extension", describe_states(l), describe_states(r))
            }
        }
        StructureKind::Milieus => {
            let (l, r) = (&lp.milieus, &rp.milieus);
            if l.len() != r.len() {
                return mismatch("count", format!("{}", l.len()), format!("{}", r.len()));
            }
            match l.iter().zip(r.iter()).position(|(a, b)| a != b) {
                None => StructuralVerdict::Matched,
                Some(i) => mismatch(
                    &format!("milieu of entity {}", i + 1),
                    format!("{:?}", l.get(i).unwrap()),
                    format!("{:?}", r.get(i).unwrap()),
                ),
            }
        }
        StructureKind::UpdateRules => match (lp.table(), rp.table()) {
            (Some(l), Some(r))
                if l.k() == r.k() && l.arity() == r.arity() && l.self_position() == r.self_position() =>
            {
                StructuralVerdict::Matched
            }
            (l, r) => {
                let shape = |t: Option<&crate::RuleTable>| match t {
                    Some(t) => format!("k={} arity={} self={}", t.k(), t.arity(), t.self_position()),
                    None => "none".into(),
                };
                mismatch("rule table shape", shape(l), shape(r))
            }
        },
        StructureKind::AdaptationRules => {
            let (l, r) = (lp.rules.a(), rp.rules.a());
            if l == r {
                StructuralVerdict::Matched
            } else {
                mismatch("count", format!("{l}"), format!("{r}"))
            }
        }
        StructureKind::AdaptationEnd => match (&lp.adaptation_end, &rp.adaptation_end) {
            (Some(l), Some(r)) if l.p() == r.p() && l.scope == r.scope => StructuralVerdict::Matched,
            (l, r) => {
                let shape = |e: &Option<crate::AdaptationEnd>| match e {
                    Some(e) => format!("p={} {:?}", e.p(), e.scope),
                    None => "none".into(),
                };
                mismatch("shape", shape(l), shape(r))
            }
        },
        StructureKind::Extra(name) => {
            let l = lp.extra_structures.get(name).map_or(0, Vec::len);
            let r = rp.extra_structures.get(name).map_or(0, Vec::len);
            if l == r {
                StructuralVerdict::Matched
            } else {
                mismatch("length", format!("{l}"), format!("{r}"))
            }
        }
    }
}

/// Compares two local functions over `state_set^arity`. Inputs are the
/// entity's own state followed by its milieu.
///
/// Finite domains no larger than the enumeration cap are checked
/// exhaustively, in descending canonical key order (first position most
/// significant, highest state index first), and require exact equality.
/// Other domains are sampled with the configured seed and budget and
/// compared within tolerance.
pub fn check_operational<L, R>(
    mut left: L,
    mut right: R,
    state_set: &StateSet,
    arity: usize,
    cfg: &CheckConfig,
) -> Result<OperationalVerdict>
where
    L: FnMut(&[State]) -> Result<State>,
    R: FnMut(&[State]) -> Result<State>,
{
    let domain = state_set
        .k()
        .and_then(|k| (k as u64).checked_pow(u32::try_from(arity).ok()?));
    let mut input = vec![0.0; arity];
    match (state_set, domain) {
        (StateSet::Finite(states), Some(size)) if size <= cfg.enumeration_cap => {
            let k = states.len() as u64;
            for index in (0..size).rev() {
                let mut rest = index;
                for slot in input.iter_mut().rev() {
                    *slot = states[(rest % k) as usize];
                    rest /= k;
                }
                let (l, r) = (left(&input)?, right(&input)?);
                if l != r {
                    return Ok(OperationalVerdict::Counterexample {
                        entity: None,
                        input,
                        left: l,
                        right: r,
                    });
                }
            }
            Ok(OperationalVerdict::ExtensionallyEqual { domain_size: size })
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            for _ in 0..cfg.sample_budget {
                for slot in input.iter_mut() {
                    *slot = match state_set {
                        StateSet::Finite(states) => states[rng.gen_range(0..states.len())],
                        StateSet::Interval { lo, hi } => {
                            if lo == hi {
                                *lo
                            } else {
                                rng.gen_range(*lo..=*hi)
                            }
                        }
                    };
                }
                let (l, r) = (left(&input)?, right(&input)?);
                // NaN on either side counts as a disagreement.
                let agree = libm::fabs(l - r) <= cfg.tolerance;
                if !agree {
                    return Ok(OperationalVerdict::Counterexample {
                        entity: None,
                        input,
                        left: l,
                        right: r,
                    });
                }
            }
            Ok(OperationalVerdict::SampledEqual {
                samples: cfg.sample_budget,
            })
        }
    }
}

fn compare_update_functions(
    lp: &ConcreteParameters,
    rp: &ConcreteParameters,
    cfg: &CheckConfig,
) -> Result<OperationalVerdict> {
    let mismatch = |aspect: &str, l: String, r: String| {
        Ok(OperationalVerdict::Mismatched(Mismatch::new(aspect, l, r)))
    };
    let e = lp.entities.e();
    if e != rp.entities.e() {
        return mismatch("entity count", format!("{e}"), format!("{}", rp.entities.e()));
    }
    if !lp.state_set.same_extension(&rp.state_set) {
        return mismatch(
            "state set",
            describe_states(&lp.state_set),
            describe_states(&rp.state_set),
        );
    }
    for i in 0..e {
        let (l, r) = (lp.milieus.get(i).unwrap().len(), rp.milieus.get(i).unwrap().len());
        if l != r {
            return mismatch(&format!("arity of entity {}", i + 1), format!("{l}"), format!("{r}"));
        }
    }
    let mut largest_domain = 0u64;
    let mut sampled = 0usize;
    for i in 0..e {
        let arity = lp.milieus.get(i).unwrap().len() + 1;
        let local_cfg = CheckConfig {
            seed: cfg.seed.wrapping_add(i as u64),
            ..cfg.clone()
        };
        let verdict = check_operational(
            |x: &[State]| lp.update_entity(i, x[0], &x[1..], 0),
            |x: &[State]| rp.update_entity(i, x[0], &x[1..], 0),
            &lp.state_set,
            arity,
            &local_cfg,
        )?;
        match verdict {
            OperationalVerdict::ExtensionallyEqual { domain_size } => {
                largest_domain = largest_domain.max(domain_size)
            }
            OperationalVerdict::SampledEqual { samples } => sampled += samples,
            OperationalVerdict::Counterexample {
                input, left, right, ..
            } => {
                return Ok(OperationalVerdict::Counterexample {
                    entity: Some(i + 1),
                    input,
                    left,
                    right,
                })
            }
            other => return Ok(other),
        }
    }
    Ok(if sampled > 0 {
        OperationalVerdict::SampledEqual { samples: sampled }
    } else {
        OperationalVerdict::ExtensionallyEqual {
            domain_size: largest_domain,
        }
    })
}

fn compare_operation(
    kind: &OperationKind,
    lp: &ConcreteParameters,
    rp: &ConcreteParameters,
    cfg: &CheckConfig,
) -> Result<OperationalVerdict> {
    match kind {
        OperationKind::UpdateFn => compare_update_functions(lp, rp, cfg),
        OperationKind::AdaptationFn => Ok(match (&lp.adaptation_fn, &rp.adaptation_fn) {
            (Some(l), Some(r)) if l == r => OperationalVerdict::SameBinding,
            (l, r) => {
                let name = |f: &Option<crate::AdaptationFunction>| {
                    f.as_ref().map_or_else(|| "none".into(), |f| format!("{f:?}"))
                };
                OperationalVerdict::Mismatched(Mismatch::new("binding", name(l), name(r)))
            }
        }),
        OperationKind::Extra(_) => Ok(OperationalVerdict::SameBinding),
    }
}

/// Full comparison: structures, then every operation kind declared by
/// either model, then the conclusion.
pub fn check_equivalence(
    left: &SystemModel,
    right: &SystemModel,
    cfg: &CheckConfig,
) -> Result<EquivalenceReport> {
    let structural = check_structural(left, right)?;
    let (lp, rp) = (left.params(), right.params());
    let kinds: BTreeSet<OperationKind> = left
        .operations()
        .iter()
        .chain(right.operations())
        .cloned()
        .collect();
    let mut operational = Vec::with_capacity(kinds.len());
    for kind in kinds {
        let verdict = match (left.declares_operation(&kind), right.declares_operation(&kind)) {
            (true, true) => compare_operation(&kind, lp, rp, cfg)?,
            (true, false) => OperationalVerdict::MissingInRight,
            (false, _) => OperationalVerdict::MissingInLeft,
        };
        operational.push((kind, verdict));
    }
    Ok(EquivalenceReport::conclude(structural, operational))
}
