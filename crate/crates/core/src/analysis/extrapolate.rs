//! Polynomial extrapolation in 1/M to the thermodynamic limit.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    /// Fitted value at 1/M = 0.
    pub intercept: f64,
    /// Coefficients of 1, 1/M, 1/M², ….
    pub coefficients: Vec<f64>,
    pub degree: usize,
    /// Inputs are monotone in 1/M but the intercept leaves their range.
    pub unstable: bool,
}

impl Extrapolation {
    pub fn evaluate(&self, sites: f64) -> f64 {
        let x = 1.0 / sites;
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

/// Least-squares fit of `values` by a polynomial of `degree` in 1/M; an
/// exact interpolation when there are `degree + 1` points.
pub fn extrapolate(sizes: &[usize], values: &[f64], degree: usize) -> Result<Extrapolation> {
    if sizes.len() != values.len() {
        return Err(Error::Extrapolation(format!(
            "{} sizes but {} values",
            sizes.len(),
            values.len()
        )));
    }
    if sizes.len() < degree + 1 {
        return Err(Error::Extrapolation(format!(
            "degree {degree} needs at least {} points, got {}",
            degree + 1,
            sizes.len()
        )));
    }
    if sizes.contains(&0) {
        return Err(Error::Extrapolation("lattice size 0".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Extrapolation("non-finite input".into()));
    }
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Extrapolation("duplicate lattice sizes".into()));
    }

    let xs: Vec<f64> = sizes.iter().map(|&m| 1.0 / m as f64).collect();
    // columns scaled by max|x|^p to keep the Vandermonde system balanced
    let xmax = xs.iter().copied().fold(0.0, f64::max);
    let design = DMatrix::from_fn(xs.len(), degree + 1, |r, c| (xs[r] / xmax).powi(c as i32));
    let rhs = DVector::from_column_slice(values);
    let scaled = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Extrapolation(e.to_string()))?;
    let coefficients: Vec<f64> = scaled
        .iter()
        .enumerate()
        .map(|(p, c)| c / xmax.powi(p as i32))
        .collect();
    let intercept = coefficients[0];

    let mut by_x: Vec<(f64, f64)> = xs.iter().copied().zip(values.iter().copied()).collect();
    by_x.sort_by(|a, b| a.0.total_cmp(&b.0));
    let increasing = by_x.windows(2).all(|w| w[1].1 >= w[0].1);
    let decreasing = by_x.windows(2).all(|w| w[1].1 <= w[0].1);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let unstable = (increasing || decreasing) && (intercept < lo || intercept > hi);

    Ok(Extrapolation {
        intercept,
        coefficients,
        degree,
        unstable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_data() {
        let sizes = [4, 5, 6, 7, 8];
        for degree in 0..=4 {
            let e = extrapolate(&sizes, &[3.5; 5], degree).unwrap();
            assert!((e.intercept - 3.5).abs() < 1e-9, "degree {degree}: {}", e.intercept);
        }
    }

    #[test]
    fn linear_recovery() {
        let sizes = [4, 5, 6, 7, 8];
        let values: Vec<f64> = sizes.iter().map(|&m| 12.0 + 7.0 / m as f64).collect();
        let e = extrapolate(&sizes, &values, 1).unwrap();
        assert!((e.intercept - 12.0).abs() < 1e-12);
        assert!((e.coefficients[1] - 7.0).abs() < 1e-10);
        assert!(e.unstable, "monotone data extrapolated below its minimum");
    }

    #[test]
    fn quartic_interpolation_is_exact() {
        let sizes = [4, 5, 6, 7, 8];
        let poly = |x: f64| 50.0 - 30.0 * x + 80.0 * x * x - 5.0 * x.powi(3) + 200.0 * x.powi(4);
        let values: Vec<f64> = sizes.iter().map(|&m| poly(1.0 / m as f64)).collect();
        let e = extrapolate(&sizes, &values, 4).unwrap();
        assert!((e.intercept - 50.0).abs() < 1e-8);
        assert!((e.evaluate(6.0) - values[2]).abs() < 1e-10);
    }

    #[test]
    fn ill_posed_inputs() {
        assert!(extrapolate(&[4, 4, 5], &[1.0, 1.0, 1.0], 1).is_err());
        assert!(extrapolate(&[4, 5], &[1.0, 1.0], 2).is_err());
        assert!(extrapolate(&[4, 5], &[1.0], 0).is_err());
        assert!(extrapolate(&[4, 5], &[1.0, f64::NAN], 1).is_err());
    }

    proptest! {
        #[test]
        fn recovers_any_cubic(c in proptest::collection::vec(-100.0f64..100.0, 4)) {
            let sizes = [3, 4, 5, 6];
            let values: Vec<f64> = sizes
                .iter()
                .map(|&m| {
                    let x = 1.0 / m as f64;
                    c[0] + c[1] * x + c[2] * x * x + c[3] * x.powi(3)
                })
                .collect();
            let e = extrapolate(&sizes, &values, 3).unwrap();
            prop_assert!((e.intercept - c[0]).abs() < 1e-8 * (1.0 + c.iter().map(|v| v.abs()).sum::<f64>()));
        }
    }
}
