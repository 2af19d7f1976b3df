//! Trajectory files: a `# e=<e> k=<k> t=<t>` header, then one line per time
//! step (line 0 is the initial state) with states separated by single
//! spaces. `k=inf` marks a continuous state set.

use metamodel_core::{StateSet, Trajectory};

use super::{content_lines, join_numbers, parse_numbers};
use crate::error::{FileError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub e: usize,
    /// `None` for continuous state sets.
    pub k: Option<usize>,
    pub t: usize,
}

pub fn write_trajectory(trajectory: &Trajectory, states: &StateSet) -> String {
    let rows = trajectory.rows();
    let k = states.k().map_or_else(|| "inf".to_string(), |k| k.to_string());
    let mut out = format!("# e={} k={} t={}\n", rows[0].e(), k, trajectory.t());
    for row in rows {
        out.push_str(&join_numbers(row));
        out.push('\n');
    }
    out
}

/// Parses a trajectory file, checking the rows against the header.
pub fn read_trajectory(text: &str) -> Result<(Header, Vec<Vec<f64>>)> {
    let first = text
        .lines()
        .next()
        .ok_or_else(|| FileError::malformed("empty trajectory file"))?;
    let header = parse_header(first)?;
    let rows: Vec<Vec<f64>> = content_lines(text)
        .map(|(n, line)| parse_numbers(line, n))
        .collect::<Result<_>>()?;
    if rows.len() != header.t + 1 {
        return Err(FileError::malformed(format!(
            "header announces t={} but file has {} rows",
            header.t,
            rows.len()
        )));
    }
    if let Some(row) = rows.iter().find(|r| r.len() != header.e) {
        return Err(FileError::malformed(format!(
            "row with {} states, header announces e={}",
            row.len(),
            header.e
        )));
    }
    Ok((header, rows))
}

fn parse_header(line: &str) -> Result<Header> {
    let bad = || FileError::malformed(format!("bad trajectory header {line:?}"));
    let rest = line.strip_prefix('#').ok_or_else(bad)?;
    let (mut e, mut k, mut t) = (None, None, None);
    for field in rest.split_whitespace() {
        let (key, value) = field.split_once('=').ok_or_else(bad)?;
        match key {
            "e" => e = Some(value.parse().map_err(|_| bad())?),
            "k" if value == "inf" => k = Some(None),
            "k" => k = Some(Some(value.parse().map_err(|_| bad())?)),
            "t" => t = Some(value.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        }
    }
    Ok(Header {
        e: e.ok_or_else(bad)?,
        k: k.ok_or_else(bad)?,
        t: t.ok_or_else(bad)?,
    })
}

/// Reads a target state: the last data line of a trajectory file or of a
/// plain file of space-separated states.
pub fn read_target(text: &str) -> Result<Vec<f64>> {
    let (n, line) = content_lines(text)
        .last()
        .ok_or_else(|| FileError::malformed("target file has no states"))?;
    parse_numbers(line, n)
}
