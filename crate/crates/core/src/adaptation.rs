//! The adaptation function realized as evolutionary search over rule
//! tables.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::final_row;
use crate::error::{Error, Result};
use crate::loss::loss;
use crate::model::{
    AdaptationEnd, AdaptationFunction, AdaptationRecord, ComparisonScope, ConcreteParameters,
    Regime, SystemModel, TableId, UpdateFunction,
};
use crate::rule_table::RuleTable;

/// Rule spaces at most this large can be searched exhaustively.
pub const EXHAUSTIVE_LIMIT: u128 = 256;

/// How a candidate table is derived from the current one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mutation {
    /// Change the output of one random entry.
    SingleBitFlip,
    /// Change the outputs of `k` distinct random entries.
    KBitFlip(usize),
}

impl Mutation {
    pub fn flips(self) -> usize {
        match self {
            Mutation::SingleBitFlip => 1,
            Mutation::KBitFlip(k) => k,
        }
    }

    pub(crate) fn validate(self) -> Result<()> {
        if self.flips() == 0 {
            return Err(Error::Validation("a mutation must flip at least one entry".into()));
        }
        Ok(())
    }

    /// A mutated copy of `table`. For `k > 2` states a flipped entry moves
    /// to a uniformly chosen different state; undefined entries get a
    /// uniformly chosen state.
    pub fn apply(self, table: &RuleTable, rng: &mut impl Rng) -> RuleTable {
        let mut next = table.clone();
        let flips = self.flips().min(table.len());
        let k = table.k();
        for entry in index::sample(rng, table.len(), flips) {
            let out = match table.get_index(entry) {
                Some(old) if k > 1 => (old + 1 + rng.gen_range(0..k - 1)) % k,
                Some(old) => old,
                None => rng.gen_range(0..k),
            };
            next.set_index(entry, Some(out)).expect("output below k");
        }
        next
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Accept a mutated table only if it strictly lowers the loss.
    HillClimb,
    /// Evaluate every table of the space; ties go to the smallest Wolfram
    /// number.
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptationConfig {
    /// Maximum number of hill-climbing iterations.
    pub g: usize,
    /// Loss tolerance; hill climbing stops once reached.
    pub l: f64,
    pub seed: u64,
    pub mutation: Mutation,
    pub strategy: Strategy,
}

impl AdaptationConfig {
    /// The configuration bound in a model's parameters, if its adaptation
    /// function is rule evolution.
    pub fn from_params(params: &ConcreteParameters) -> Option<Self> {
        match params.adaptation_fn {
            Some(AdaptationFunction::EvolveRules {
                strategy,
                mutation,
                seed,
            }) => Some(AdaptationConfig {
                g: params.g,
                l: params.l,
                seed,
                mutation,
                strategy,
            }),
            _ => None,
        }
    }
}

/// Searches for a rule table whose run of `t` steps from the initial
/// entities ends closest to the adaptation end.
///
/// Only the rule table changes; initial entities and milieus stay fixed.
/// `end` overrides the model's own adaptation end. Returns the best model
/// found and one log record per evaluated candidate; hill climbing also logs
/// the starting table as iteration 0. A candidate that steps through an
/// undefined entry scores an infinite loss.
pub fn evolve_rules(
    model: &SystemModel,
    end: Option<&AdaptationEnd>,
    cfg: &AdaptationConfig,
    t: usize,
) -> Result<(SystemModel, Vec<AdaptationRecord>)> {
    model.expect_regime(Regime::Metastable)?;
    let params = model.params();
    if !params.state_set.is_finite() || params.update_fn != UpdateFunction::RuleTable {
        return Err(Error::Capability(
            "rule evolution needs a finite-state rule-table model".into(),
        ));
    }
    let end = end
        .or(params.adaptation_end.as_ref())
        .ok_or_else(|| Error::Binding("structure adaptation-end".into()))?;
    if end.scope != ComparisonScope::FinalState {
        return Err(Error::Capability("only final-state adaptation ends are supported".into()));
    }
    if end.p() != params.entities.e() {
        return Err(Error::Dimension {
            expected: params.entities.e(),
            found: end.p(),
        });
    }
    if let Some(bad) = end.targets.iter().find(|s| !params.state_set.contains(**s)) {
        return Err(Error::Validation(format!("target {bad} outside the state set")));
    }
    if cfg.g < 1 || t < 1 {
        return Err(Error::Precondition("g and t must be at least 1".into()));
    }
    if !(cfg.l.is_finite() && cfg.l >= 0.0) {
        return Err(Error::Precondition(format!("loss tolerance {} must be >= 0", cfg.l)));
    }
    cfg.mutation.validate()?;

    let mut scratch = params.clone();
    let mut evaluate = |table: &RuleTable| -> Result<f64> {
        scratch.rules.update_rules = Some(table.clone());
        match final_row(&scratch, t) {
            Ok(row) => loss(&row, end, &scratch.state_set),
            Err(Error::UndefinedTransition { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };

    let start = params.table().expect("validated rule-table model").clone();
    let (best, log) = match cfg.strategy {
        Strategy::HillClimb => hill_climb(start, cfg, &mut evaluate)?,
        Strategy::Exhaustive => exhaustive(&start, &mut evaluate)?,
    };
    let mut adapted = params.clone();
    adapted.rules.update_rules = Some(best);
    Ok((model.with_params(adapted)?, log))
}

fn hill_climb(
    start: RuleTable,
    cfg: &AdaptationConfig,
    evaluate: &mut impl FnMut(&RuleTable) -> Result<f64>,
) -> Result<(RuleTable, Vec<AdaptationRecord>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut current_loss = evaluate(&start)?;
    let mut log = Vec::new();
    log.push(AdaptationRecord {
        iteration: 0,
        loss: current_loss,
        accepted: true,
        table: Some(TableId::of(&start)),
    });
    let mut current = start;
    if current_loss <= cfg.l {
        return Ok((current, log));
    }
    for iteration in 1..=cfg.g {
        let candidate = cfg.mutation.apply(&current, &mut rng);
        let candidate_loss = evaluate(&candidate)?;
        let accepted = candidate_loss < current_loss;
        log.push(AdaptationRecord {
            iteration,
            loss: candidate_loss,
            accepted,
            table: Some(TableId::of(&candidate)),
        });
        if accepted {
            current = candidate;
            current_loss = candidate_loss;
            if current_loss <= cfg.l {
                break;
            }
        }
    }
    Ok((current, log))
}

fn exhaustive(
    shape: &RuleTable,
    evaluate: &mut impl FnMut(&RuleTable) -> Result<f64>,
) -> Result<(RuleTable, Vec<AdaptationRecord>)> {
    let count = shape
        .wolfram_count()
        .filter(|n| *n <= EXHAUSTIVE_LIMIT)
        .ok_or_else(|| {
            Error::Capability(format!(
                "exhaustive search needs at most {EXHAUSTIVE_LIMIT} tables, k={} arity={} has more",
                shape.k(),
                shape.arity()
            ))
        })? as u64;
    let mut best: Option<(RuleTable, f64)> = None;
    let mut log = Vec::with_capacity(count as usize);
    for number in 0..count {
        let table = RuleTable::from_wolfram(shape.k(), shape.arity(), shape.self_position(), number)?;
        let candidate_loss = evaluate(&table)?;
        let accepted = best.as_ref().is_none_or(|(_, l)| candidate_loss < *l);
        log.push(AdaptationRecord {
            iteration: number as usize + 1,
            loss: candidate_loss,
            accepted,
            table: Some(TableId::Wolfram(number)),
        });
        if accepted {
            best = Some((table, candidate_loss));
        }
    }
    Ok((best.expect("at least one table").0, log))
}
