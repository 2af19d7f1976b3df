//! Adaptation logs: one `<iteration> <loss> <accepted> <table>` line per
//! record. `accepted` is `1` or `0`; `table` is the Wolfram number, an
//! `h:`-prefixed fingerprint, or `-` when the record carries no table.

use metamodel_core::{AdaptationRecord, TableId};

use super::content_lines;
use crate::error::{FileError, Result};

pub fn write_log(records: &[AdaptationRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let table = r.table.map_or_else(|| "-".to_string(), |id| id.to_string());
        out.push_str(&format!("{} {} {} {}\n", r.iteration, r.loss, u8::from(r.accepted), table));
    }
    out
}

pub fn read_log(text: &str) -> Result<Vec<AdaptationRecord>> {
    content_lines(text)
        .map(|(n, line)| {
            let bad = || FileError::malformed(format!("log line {n}: {line:?}"));
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [iteration, loss, accepted, table] = fields.as_slice() else {
                return Err(bad());
            };
            let table = match *table {
                "-" => None,
                t => Some(match t.strip_prefix("h:") {
                    Some(hex) => TableId::Hash(u64::from_str_radix(hex, 16).map_err(|_| bad())?),
                    None => TableId::Wolfram(t.parse().map_err(|_| bad())?),
                }),
            };
            Ok(AdaptationRecord {
                iteration: iteration.parse().map_err(|_| bad())?,
                loss: loss.parse().map_err(|_| bad())?,
                accepted: match *accepted {
                    "1" => true,
                    "0" => false,
                    _ => return Err(bad()),
                },
                table,
            })
        })
        .collect()
}
