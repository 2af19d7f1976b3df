//! Training data: one `inputs | targets` line per sample, values separated
//! by whitespace.

use metamodel_core::ann::Sample;

use super::{content_lines, join_numbers, parse_numbers};
use crate::error::{FileError, Result};

pub fn read_dataset(text: &str) -> Result<Vec<Sample>> {
    let samples: Vec<Sample> = content_lines(text)
        .map(|(n, line)| {
            let (inputs, targets) = line
                .split_once('|')
                .ok_or_else(|| FileError::malformed(format!("line {n}: expected `inputs | targets`")))?;
            Ok(Sample::new(parse_numbers(inputs, n)?, parse_numbers(targets, n)?))
        })
        .collect::<Result<_>>()?;
    if samples.is_empty() {
        return Err(FileError::malformed("dataset has no samples"));
    }
    Ok(samples)
}

pub fn write_dataset(samples: &[Sample]) -> String {
    samples
        .iter()
        .map(|s| format!("{} | {}\n", join_numbers(&s.inputs), join_numbers(&s.targets)))
        .collect()
}
