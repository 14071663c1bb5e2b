//! The threshold unit: fires 1 when the weighted input sum reaches theta.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdUnit {
    pub weights: Vec<f64>,
    pub theta: f64,
}

impl ThresholdUnit {
    pub fn new(weights: Vec<f64>, theta: f64) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) || !theta.is_finite() {
            return Err(Error::argument("threshold unit needs finite weights and theta"));
        }
        Ok(ThresholdUnit { weights, theta })
    }
}

/// 1 iff `dot(weights, inputs) >= theta`, else 0.
pub fn mp_fire(unit: &ThresholdUnit, inputs: &[f64]) -> Result<u8> {
    if inputs.len() != unit.weights.len() {
        return Err(Error::argument(format!(
            "input length {} does not match weight length {}",
            inputs.len(),
            unit.weights.len()
        )));
    }
    let dot: f64 = unit
        .weights
        .iter()
        .zip(inputs)
        .map(|(w, x)| w * x)
        .sum();
    Ok(u8::from(dot >= unit.theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(weights: &[f64], theta: f64) -> ThresholdUnit {
        ThresholdUnit::new(weights.to_vec(), theta).unwrap()
    }

    #[test]
    fn conjunction_needs_all_three_inputs() {
        let u = unit(&[1.0, 1.0, 1.0], 3.0);
        assert_eq!(mp_fire(&u, &[1.0, 1.0, 1.0]).unwrap(), 1);
        assert_eq!(mp_fire(&u, &[1.0, 1.0, 0.0]).unwrap(), 0);
    }

    #[test]
    fn disjunction_fires_on_any_input() {
        let u = unit(&[1.0, 1.0, 1.0], 1.0);
        assert_eq!(mp_fire(&u, &[0.0, 1.0, 0.0]).unwrap(), 1);
        assert_eq!(mp_fire(&u, &[0.0, 0.0, 0.0]).unwrap(), 0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let u = unit(&[1.0, 1.0], 1.0);
        assert!(mp_fire(&u, &[1.0]).is_err());
    }

    proptest! {
        // With non-negative weights, raising an input never un-fires the unit.
        #[test]
        fn firing_is_monotone_for_nonnegative_weights(
            weights in proptest::collection::vec(0.0f64..2.0, 1..8),
            inputs in proptest::collection::vec(0.0f64..2.0, 1..8),
            theta in -1.0f64..5.0,
            bump in 0.0f64..3.0,
        ) {
            let n = weights.len().min(inputs.len());
            let u = unit(&weights[..n], theta);
            let inputs = &inputs[..n];
            if mp_fire(&u, inputs).unwrap() == 1 {
                for i in 0..n {
                    let mut raised = inputs.to_vec();
                    raised[i] += bump;
                    prop_assert_eq!(mp_fire(&u, &raised).unwrap(), 1);
                }
            }
        }
    }
}
