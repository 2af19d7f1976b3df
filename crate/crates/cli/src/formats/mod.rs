pub mod dataset;
pub mod log;
pub mod model;
pub mod network;
pub mod pbm;
pub mod report;
pub mod rules;
pub mod trajectory;

use std::path::Path;

use crate::error::{FileError, Result};

/// Reads a UTF-8 file, mapping a missing file to [`FileError::NotFound`].
pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            FileError::NotFound(path.to_path_buf())
        } else {
            FileError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Non-empty lines with `#` comments stripped.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(n, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((n + 1, line))
    })
}

pub(crate) fn parse_numbers(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| FileError::malformed(format!("line {lineno}: bad number {tok:?}")))
        })
        .collect()
}

pub(crate) fn join_numbers(values: &[f64]) -> String {
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&v.to_string());
    }
    out
}
