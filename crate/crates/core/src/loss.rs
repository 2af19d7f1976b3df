use alloc::format;

use crate::error::{Error, Result};
use crate::model::{AdaptationEnd, ComparisonScope};
use crate::state::{State, StateSet};

/// Distance between entity states and an adaptation end.
///
/// Finite state sets use the normalized Hamming distance (mismatches / e,
/// in `[0, 1]`); continuous ones use the mean squared error.
pub fn loss(current: &[State], end: &AdaptationEnd, state_set: &StateSet) -> Result<f64> {
    if end.scope != ComparisonScope::FinalState {
        return Err(Error::Capability(format!(
            "loss for {:?} adaptation ends",
            end.scope
        )));
    }
    if current.len() != end.targets.len() || current.is_empty() {
        return Err(Error::Dimension {
            expected: end.targets.len(),
            found: current.len(),
        });
    }
    let pairs = current.iter().zip(&end.targets);
    let n = current.len() as f64;
    Ok(if state_set.is_finite() {
        pairs.filter(|(a, b)| a != b).count() as f64 / n
    } else {
        pairs.map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn end(targets: &[f64]) -> AdaptationEnd {
        AdaptationEnd::final_state(targets.to_vec())
    }

    #[test]
    fn hamming_examples() {
        let q = StateSet::binary();
        assert_eq!(loss(&[0.0, 1.0, 1.0, 0.0], &end(&[0.0, 1.0, 1.0, 0.0]), &q).unwrap(), 0.0);
        assert_eq!(loss(&[0.0; 4], &end(&[1.0; 4]), &q).unwrap(), 1.0);
        assert_eq!(loss(&[0.0, 1.0, 0.0, 0.0], &end(&[0.0, 1.0, 1.0, 0.0]), &q).unwrap(), 0.25);
    }

    #[test]
    fn mse_for_intervals() {
        let q = StateSet::unit_interval();
        let l = loss(&[0.5, 1.0], &end(&[0.0, 1.0]), &q).unwrap();
        assert!((l - 0.125).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        let err = loss(&[0.0, 1.0], &end(&[0.0]), &StateSet::binary()).unwrap_err();
        assert_eq!(err, Error::Dimension { expected: 1, found: 2 });
    }

    proptest! {
        #[test]
        fn finite_loss_reflexive_and_symmetric(
            pair in (1usize..32).prop_flat_map(|n| (
                proptest::collection::vec(0u8..2, n),
                proptest::collection::vec(0u8..2, n),
            ))
        ) {
            let q = StateSet::binary();
            let a: Vec<f64> = pair.0.iter().map(|&b| f64::from(b)).collect();
            let b: Vec<f64> = pair.1.iter().map(|&b| f64::from(b)).collect();
            prop_assert_eq!(loss(&a, &end(&a), &q).unwrap(), 0.0);
            prop_assert_eq!(loss(&a, &end(&b), &q).unwrap(), loss(&b, &end(&a), &q).unwrap());
            let l = loss(&a, &end(&b), &q).unwrap();
            prop_assert!((0.0..=1.0).contains(&l));
        }
    }

    #[test]
    fn trajectory_scope_unsupported() {
        let e = AdaptationEnd {
            targets: vec![0.0],
            scope: ComparisonScope::TrajectoryRow,
        };
        assert!(matches!(loss(&[0.0], &e, &StateSet::binary()), Err(Error::Capability(_))));
    }
}
