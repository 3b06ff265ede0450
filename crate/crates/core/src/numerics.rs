//! Small numerical helpers shared by the spectral and oracle modules.

use std::ops::{Mul, Sub};

/// Richardson extrapolation to `h → 0` of a sequence sampled at
/// `h, h/r, h/r², …`, assuming an error expansion in integer powers
/// `h, h², h³, …`. Returns the top of the Neville tableau.
pub fn richardson<T>(values: &[T], ratio: f64) -> T
where
    T: Copy + Sub<Output = T> + Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    assert!(!values.is_empty(), "richardson needs at least one value");
    assert!(ratio > 1.0, "step ratio must exceed 1");
    let mut table: Vec<T> = values.to_vec();
    let mut factor = 1.0;
    for level in 1..values.len() {
        factor *= ratio;
        for i in (level..values.len()).rev() {
            // table[i] holds the finer estimate at this level
            let improved = table[i] + (table[i] - table[i - 1]) * (1.0 / (factor - 1.0));
            table[i] = improved;
        }
    }
    table[values.len() - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn removes_polynomial_error_terms() {
        let exact = 2.5;
        let f = |h: f64| exact + 0.3 * h - 1.7 * h * h + 0.2 * h * h * h;
        let hs = [0.1, 0.05, 0.025, 0.0125];
        let v: Vec<f64> = hs.iter().map(|&h| f(h)).collect();
        assert!((richardson(&v, 2.0) - exact).abs() < 1e-14);
        assert!((richardson(&v[..2], 2.0) - exact).abs() < 1e-2);
    }

    #[test]
    fn works_for_complex_sequences() {
        let f = |h: f64| Complex64::new(1.0 + h, -2.0 + 3.0 * h * h);
        let v: Vec<Complex64> = [0.1, 0.01, 0.001].iter().map(|&h| f(h)).collect();
        let r = richardson(&v, 10.0);
        assert!((r - Complex64::new(1.0, -2.0)).norm() < 1e-14);
    }

    #[test]
    fn single_value_passes_through() {
        assert_eq!(richardson(&[3.0], 2.0), 3.0);
    }
}
