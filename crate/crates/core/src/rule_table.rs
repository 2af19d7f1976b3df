use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Largest number of keys a table may have.
const MAX_KEYS: usize = 1 << 24;

/// An extensional transition function `K^(n+1) -> K`.
///
/// Keys are neighborhoods of `arity = n + 1` state indices (positions in the
/// finite state set). The entity's own state sits at `self_position` within
/// the key and its milieu fills the remaining positions in milieu order, so
/// an elementary automaton with milieu `(left, right)` and `self_position = 1`
/// reads keys as `(left, self, right)`.
///
/// A key maps to the table index `sum(digit_j * k^(arity - 1 - j))`, i.e. the
/// first position is the most significant digit. Entries may be missing while
/// a table is under construction; stepping through a missing entry is an
/// error.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RuleTable {
    k: usize,
    arity: usize,
    self_position: usize,
    outputs: Vec<Option<u32>>,
}

impl RuleTable {
    /// A table with no entries defined.
    pub fn empty(k: usize, arity: usize, self_position: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Validation("rule table needs at least one state".into()));
        }
        if arity == 0 || self_position >= arity {
            return Err(Error::Validation(format!(
                "self position {self_position} outside neighborhood of size {arity}"
            )));
        }
        let len = checked_pow(k, arity)
            .filter(|n| *n <= MAX_KEYS)
            .ok_or_else(|| Error::Size(format!("{k}^{arity} keys exceed the table limit")))?;
        Ok(RuleTable {
            k,
            arity,
            self_position,
            outputs: vec![None; len],
        })
    }

    /// A total table whose output for each key is `f(key)`.
    pub fn from_fn(
        k: usize,
        arity: usize,
        self_position: usize,
        mut f: impl FnMut(&[usize]) -> usize,
    ) -> Result<Self> {
        let mut table = RuleTable::empty(k, arity, self_position)?;
        let mut key = vec![0; arity];
        for index in 0..table.outputs.len() {
            table.fill_key(index, &mut key);
            let out = f(&key);
            if out >= k {
                return Err(Error::Range(format!("output state index {out} >= k = {k}")));
            }
            table.outputs[index] = Some(out as u32);
        }
        Ok(table)
    }

    /// The elementary (`k = 2`, `n = 2`) table for a Wolfram rule number.
    pub fn elementary(rule: u32) -> Result<Self> {
        if rule > 255 {
            return Err(Error::Range(format!("elementary rule {rule} not in 0..=255")));
        }
        RuleTable::from_wolfram(2, 3, 1, u64::from(rule))
    }

    /// Decodes a generalized Wolfram number: the output for the key with
    /// table index `v` is digit `v` of `number` in base `k`.
    pub fn from_wolfram(k: usize, arity: usize, self_position: usize, number: u64) -> Result<Self> {
        let mut table = RuleTable::empty(k, arity, self_position)?;
        if let Some(count) = table.wolfram_count() {
            if u128::from(number) >= count {
                return Err(Error::Range(format!(
                    "rule number {number} not below {count} for k={k}, arity={arity}"
                )));
            }
        }
        let mut rest = number;
        for out in table.outputs.iter_mut() {
            *out = Some((rest % k as u64) as u32);
            rest /= k as u64;
        }
        Ok(table)
    }

    /// The number of distinct total tables `k^(k^arity)`, when it fits in a
    /// `u128`.
    pub fn wolfram_count(&self) -> Option<u128> {
        let keys = u32::try_from(self.outputs.len()).ok()?;
        (self.k as u128).checked_pow(keys)
    }

    /// The Wolfram number of a total table, when it fits in a `u64`.
    pub fn wolfram_number(&self) -> Option<u64> {
        let mut number: u64 = 0;
        for out in self.outputs.iter().rev() {
            let digit = u64::from((*out)?);
            number = number.checked_mul(self.k as u64)?.checked_add(digit)?;
        }
        Some(number)
    }

    /// Conway's Life (B3/S23) on the Moore neighborhood: `k = 2`, keys are
    /// the 3x3 block in row-major order with the cell itself at position 4.
    pub fn life() -> Self {
        RuleTable::from_fn(2, 9, 4, |key| {
            let alive = key[4] == 1;
            let count: usize = key.iter().sum::<usize>() - key[4];
            usize::from(count == 3 || (alive && count == 2))
        })
        .expect("life table dimensions are valid")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Neighborhood size including the entity itself (`n + 1`).
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn self_position(&self) -> usize {
        self.self_position
    }

    /// Total number of keys `k^arity`.
    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// Number of defined entries (the rule count `u`).
    pub fn defined(&self) -> usize {
        self.outputs.iter().filter(|o| o.is_some()).count()
    }

    pub fn is_total(&self) -> bool {
        self.outputs.iter().all(Option::is_some)
    }

    /// Table index of a key, or `None` if the key is malformed.
    pub fn index_of(&self, key: &[usize]) -> Option<usize> {
        if key.len() != self.arity {
            return None;
        }
        key.iter().try_fold(0usize, |acc, &d| (d < self.k).then(|| acc * self.k + d))
    }

    /// Writes the key for table index `index` into `key` (length `arity`).
    pub fn fill_key(&self, mut index: usize, key: &mut [usize]) {
        for slot in key.iter_mut().rev() {
            *slot = index % self.k;
            index /= self.k;
        }
    }

    pub fn key_of(&self, index: usize) -> Vec<usize> {
        let mut key = vec![0; self.arity];
        self.fill_key(index, &mut key);
        key
    }

    pub fn get(&self, key: &[usize]) -> Option<usize> {
        self.get_index(self.index_of(key)?)
    }

    pub fn get_index(&self, index: usize) -> Option<usize> {
        self.outputs.get(index).copied().flatten().map(|o| o as usize)
    }

    pub fn set(&mut self, key: &[usize], output: Option<usize>) -> Result<()> {
        let index = self
            .index_of(key)
            .ok_or_else(|| Error::Validation(format!("malformed key {key:?}")))?;
        self.set_index(index, output)
    }

    pub fn set_index(&mut self, index: usize, output: Option<usize>) -> Result<()> {
        if let Some(o) = output {
            if o >= self.k {
                return Err(Error::Range(format!("output state index {o} >= k = {}", self.k)));
            }
        }
        let slot = self
            .outputs
            .get_mut(index)
            .ok_or_else(|| Error::Range(format!("table index {index} out of range")))?;
        *slot = output.map(|o| o as u32);
        Ok(())
    }

    /// Entries as `(table index, output)` in ascending index order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, Option<usize>)> + '_ {
        self.outputs
            .iter()
            .enumerate()
            .map(|(i, o)| (i, o.map(|o| o as usize)))
    }

    /// Looks up the output for an entity whose own state index is
    /// `own` and whose milieu state indices are `milieu`.
    pub fn lookup(&self, own: usize, milieu: impl IntoIterator<Item = usize>) -> Option<usize> {
        let mut index = 0usize;
        let mut rest = milieu.into_iter();
        for pos in 0..self.arity {
            let digit = if pos == self.self_position { own } else { rest.next()? };
            index = index * self.k + digit;
        }
        self.get_index(index)
    }

    /// A 64-bit FNV-1a fingerprint of the entries, for identifying tables
    /// too large for a Wolfram number.
    pub fn fingerprint(&self) -> u64 {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |byte: u8| {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        };
        for b in (self.k as u64).to_le_bytes() {
            feed(b);
        }
        for b in (self.arity as u64).to_le_bytes() {
            feed(b);
        }
        for out in &self.outputs {
            for b in out.map_or(u32::MAX, |o| o).to_le_bytes() {
                feed(b);
            }
        }
        hash
    }
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    base.checked_pow(u32::try_from(exp).ok()?)
}
