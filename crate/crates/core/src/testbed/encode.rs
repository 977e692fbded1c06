//! Hyperparameter box encoding into [0, 10]^d.
//!
//! Categorical coordinates with k options own k disjoint equal-length
//! subintervals of [0, 10] and decode by interval membership; continuous
//! coordinates map affinely. This lets mixed search spaces run through the
//! same continuous-box machinery as everything else.

use crate::error::{Error, Result};

pub const BOX_SIDE: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub enum CoordinateSpec {
    Categorical { options: Vec<String> },
    Continuous { lower: f64, upper: f64 },
}

/// A decoded coordinate value.
#[derive(Debug, Clone, PartialEq)]
pub enum EncodedValue {
    /// Option index into the coordinate's option list.
    Category(usize),
    Number(f64),
}

#[derive(Debug, Clone)]
pub struct HyperparameterSpace {
    coords: Vec<CoordinateSpec>,
}

impl HyperparameterSpace {
    pub fn new(coords: Vec<CoordinateSpec>) -> Result<Self> {
        for (i, c) in coords.iter().enumerate() {
            match c {
                CoordinateSpec::Categorical { options } => {
                    if options.is_empty() {
                        return Err(Error::InvalidParameter(format!(
                            "coordinate {i}: categorical option list is empty"
                        )));
                    }
                }
                CoordinateSpec::Continuous { lower, upper } => {
                    if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
                        return Err(Error::InvalidParameter(format!(
                            "coordinate {i}: continuous bounds [{lower}, {upper}] are degenerate"
                        )));
                    }
                }
            }
        }
        Ok(HyperparameterSpace { coords })
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    /// Map one coordinate value into [0, 10]. Categorical values encode to the
    /// midpoint of their subinterval so decoding is exact.
    pub fn encode_coordinate(&self, coord: usize, value: &EncodedValue) -> Result<f64> {
        match (&self.coords[coord], value) {
            (CoordinateSpec::Categorical { options }, EncodedValue::Category(idx)) => {
                if *idx >= options.len() {
                    return Err(Error::InvalidParameter(format!(
                        "coordinate {coord}: option index {idx} out of {}",
                        options.len()
                    )));
                }
                let width = BOX_SIDE / options.len() as f64;
                Ok((*idx as f64 + 0.5) * width)
            }
            (CoordinateSpec::Continuous { lower, upper }, EncodedValue::Number(v)) => {
                Ok(BOX_SIDE * (v - lower) / (upper - lower))
            }
            _ => Err(Error::InvalidParameter(format!(
                "coordinate {coord}: value kind does not match the coordinate spec"
            ))),
        }
    }

    /// Decode a [0, 10] value back to the coordinate's native form.
    pub fn decode_coordinate(&self, coord: usize, encoded: f64) -> Result<EncodedValue> {
        if !(0.0..=BOX_SIDE).contains(&encoded) {
            return Err(Error::InvalidParameter(format!(
                "coordinate {coord}: encoded value {encoded} outside [0, {BOX_SIDE}]"
            )));
        }
        match &self.coords[coord] {
            CoordinateSpec::Categorical { options } => {
                let k = options.len();
                let width = BOX_SIDE / k as f64;
                let idx = ((encoded / width) as usize).min(k - 1);
                Ok(EncodedValue::Category(idx))
            }
            CoordinateSpec::Continuous { lower, upper } => {
                Ok(EncodedValue::Number(lower + encoded * (upper - lower) / BOX_SIDE))
            }
        }
    }

    pub fn encode(&self, values: &[EncodedValue]) -> Result<Vec<f64>> {
        if values.len() != self.coords.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coords.len(),
                got: values.len(),
            });
        }
        values
            .iter()
            .enumerate()
            .map(|(i, v)| self.encode_coordinate(i, v))
            .collect()
    }

    pub fn decode(&self, encoded: &[f64]) -> Result<Vec<EncodedValue>> {
        if encoded.len() != self.coords.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coords.len(),
                got: encoded.len(),
            });
        }
        encoded
            .iter()
            .enumerate()
            .map(|(i, v)| self.decode_coordinate(i, *v))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn boolean_space() -> HyperparameterSpace {
        HyperparameterSpace::new(vec![CoordinateSpec::Categorical {
            options: vec!["false".into(), "true".into()],
        }])
        .unwrap()
    }

    #[test]
    fn boolean_interval_rule() {
        // [0, 5) is option 1, [5, 10] is option 2
        let space = boolean_space();
        assert_eq!(space.decode_coordinate(0, 7.3).unwrap(), EncodedValue::Category(1));
        assert_eq!(space.decode_coordinate(0, 4.999).unwrap(), EncodedValue::Category(0));
        assert_eq!(space.decode_coordinate(0, 10.0).unwrap(), EncodedValue::Category(1));
    }

    #[test]
    fn continuous_unit_interval() {
        let space = HyperparameterSpace::new(vec![CoordinateSpec::Continuous {
            lower: 0.0,
            upper: 1.0,
        }])
        .unwrap();
        match space.decode_coordinate(0, 3.5).unwrap() {
            EncodedValue::Number(v) => assert_abs_diff_eq!(v, 0.35, epsilon = 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn continuous_endpoints() {
        let space = HyperparameterSpace::new(vec![CoordinateSpec::Continuous {
            lower: 100.0,
            upper: 300.0,
        }])
        .unwrap();
        assert_eq!(space.decode_coordinate(0, 0.0).unwrap(), EncodedValue::Number(100.0));
        assert_eq!(space.decode_coordinate(0, 10.0).unwrap(), EncodedValue::Number(300.0));
    }

    #[test]
    fn empty_options_and_degenerate_bounds_rejected() {
        assert!(HyperparameterSpace::new(vec![CoordinateSpec::Categorical { options: vec![] }])
            .is_err());
        assert!(HyperparameterSpace::new(vec![CoordinateSpec::Continuous {
            lower: 2.0,
            upper: 2.0
        }])
        .is_err());
    }

    #[test]
    fn categorical_round_trip_is_exact() {
        let space = HyperparameterSpace::new(vec![CoordinateSpec::Categorical {
            options: (0..7).map(|i| format!("opt{i}")).collect(),
        }])
        .unwrap();
        for idx in 0..7 {
            let e = space.encode_coordinate(0, &EncodedValue::Category(idx)).unwrap();
            assert_eq!(space.decode_coordinate(0, e).unwrap(), EncodedValue::Category(idx));
        }
    }

    proptest! {
        #[test]
        fn continuous_round_trip(lower in -1e3f64..1e3, width in 1e-3f64..1e3, frac in 0.0f64..=1.0) {
            let upper = lower + width;
            let space = HyperparameterSpace::new(vec![CoordinateSpec::Continuous { lower, upper }]).unwrap();
            let v = lower + frac * width;
            let e = space.encode_coordinate(0, &EncodedValue::Number(v)).unwrap();
            prop_assert!((0.0..=BOX_SIDE).contains(&e.clamp(0.0, BOX_SIDE)));
            match space.decode_coordinate(0, e.clamp(0.0, BOX_SIDE)).unwrap() {
                EncodedValue::Number(back) => {
                    let scale = v.abs().max(1.0);
                    prop_assert!((back - v).abs() / scale < 1e-12);
                }
                other => prop_assert!(false, "unexpected {other:?}"),
            }
        }
    }
}
