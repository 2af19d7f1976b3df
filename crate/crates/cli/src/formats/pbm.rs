//! Plain PBM (P1) bitmaps of binary trajectories, `1` drawn black.
//!
//! A ring is drawn as a spacetime diagram, one image row per time step. A
//! grid is drawn frame by frame, frames stacked vertically.

use metamodel_core::{Entities, StateSet};

use crate::error::{FileError, Result};

fn bits(row: &Entities, states: &StateSet) -> Result<Vec<u8>> {
    if states.k() != Some(2) {
        return Err(FileError::malformed("PBM output needs a two-state set"));
    }
    row.iter()
        .map(|&s| match states.index_of(s) {
            Some(i) => Ok(i as u8),
            None => Err(FileError::malformed(format!("state {s} outside the state set"))),
        })
        .collect()
}

fn raster(width: usize, height: usize, pixels: impl Iterator<Item = u8>) -> String {
    let mut out = format!("P1\n{width} {height}\n");
    let pixels: Vec<u8> = pixels.collect();
    for line in pixels.chunks(width) {
        let line: Vec<String> = line.iter().map(u8::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn spacetime(rows: &[Entities], states: &StateSet) -> Result<String> {
    let width = rows.first().map_or(0, Entities::e);
    let mut pixels = Vec::new();
    for row in rows {
        pixels.extend(bits(row, states)?);
    }
    Ok(raster(width, rows.len(), pixels.into_iter()))
}

/// Frames of a `width x height` grid (row-major cells).
pub fn frames(rows: &[Entities], states: &StateSet, width: usize, height: usize) -> Result<String> {
    if let Some(row) = rows.iter().find(|r| r.e() != width * height) {
        return Err(FileError::malformed(format!(
            "grid {width}x{height} does not fit {} cells",
            row.e()
        )));
    }
    let mut pixels = Vec::new();
    for row in rows {
        pixels.extend(bits(row, states)?);
    }
    Ok(raster(width, height * rows.len(), pixels.into_iter()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacetime_layout() {
        let rows = vec![
            Entities::new(vec![0.0, 1.0, 0.0]).unwrap(),
            Entities::new(vec![1.0, 1.0, 1.0]).unwrap(),
        ];
        assert_eq!(spacetime(&rows, &StateSet::binary()).unwrap(), "P1\n3 2\n0 1 0\n1 1 1\n");
        assert!(frames(&rows, &StateSet::binary(), 2, 2).is_err());
        assert!(spacetime(&rows, &StateSet::unit_interval()).is_err());
    }
}
