//! Rule-table text: one `<neighborhood> -> <state>` line per defined entry,
//! or the single-line `wolfram:<number>` shorthand.
//!
//! Neighborhoods and outputs are written as state indices (positions in the
//! state set), one digit per key position, so lines need `k <= 10`. Lines
//! appear in descending key order (`111` first for elementary rules).
//! Missing lines are undefined entries.

use metamodel_core::RuleTable;

use super::content_lines;
use crate::error::{FileError, Result};

pub fn write_lines(table: &RuleTable) -> Result<Vec<String>> {
    if table.k() > 10 {
        return Err(FileError::malformed(format!(
            "rule lines need k <= 10, table has k = {}",
            table.k()
        )));
    }
    let mut lines = Vec::with_capacity(table.defined());
    for index in (0..table.len()).rev() {
        if let Some(out) = table.get_index(index) {
            let key: String = table
                .key_of(index)
                .iter()
                .map(|d| char::from_digit(*d as u32, 10).expect("k <= 10"))
                .collect();
            lines.push(format!("{key} -> {out}"));
        }
    }
    Ok(lines)
}

/// `wolfram:<n>` when the table is total and its number fits, else lines.
pub fn write_rule_table(table: &RuleTable) -> Result<String> {
    match table.wolfram_number() {
        Some(n) => Ok(format!("wolfram:{n}\n")),
        None => Ok(write_lines(table)?.join("\n") + "\n"),
    }
}

/// Parses rule text for a table over `k` states with keys of `arity`
/// positions.
pub fn parse_rule_table(text: &str, k: usize, arity: usize, self_position: usize) -> Result<RuleTable> {
    let lines: Vec<(usize, &str)> = content_lines(text).collect();
    if let [(_, single)] = lines.as_slice() {
        if let Some(number) = single.strip_prefix("wolfram:") {
            let number: u64 = number
                .trim()
                .parse()
                .map_err(|_| FileError::malformed(format!("bad rule number {number:?}")))?;
            return Ok(RuleTable::from_wolfram(k, arity, self_position, number)?);
        }
    }
    parse_lines(lines.iter().map(|(n, l)| (*n, *l)), k, arity, self_position)
}

pub fn parse_lines<'a>(
    lines: impl IntoIterator<Item = (usize, &'a str)>,
    k: usize,
    arity: usize,
    self_position: usize,
) -> Result<RuleTable> {
    let mut table = RuleTable::empty(k, arity, self_position)?;
    let mut seen = vec![false; table.len()];
    for (n, line) in lines {
        let bad = |why: &str| FileError::malformed(format!("rule line {n} {line:?}: {why}"));
        let (key, out) = line.split_once("->").ok_or_else(|| bad("expected `->`"))?;
        let digits: Vec<usize> = key
            .trim()
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as usize).filter(|d| *d < k))
            .collect::<Option<_>>()
            .ok_or_else(|| bad("key digits must be state indices"))?;
        let out: usize = out
            .trim()
            .parse()
            .ok()
            .filter(|o| *o < k)
            .ok_or_else(|| bad("output must be a state index"))?;
        let index = table
            .index_of(&digits)
            .ok_or_else(|| bad("wrong neighborhood size"))?;
        if std::mem::replace(&mut seen[index], true) {
            return Err(bad("duplicate neighborhood"));
        }
        table.set_index(index, Some(out))?;
    }
    Ok(table)
}
