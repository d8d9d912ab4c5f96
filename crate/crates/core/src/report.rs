//! Fixed-format number rendering shared by all CSV and JSON writers.

/// Scientific notation with 9 significant digits.
pub fn sci(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.8e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Rounds to 9 significant digits, so JSON output is as stable as CSV output.
pub fn round9(x: f64) -> f64 {
    if x.is_finite() && x != 0.0 {
        format!("{x:.8e}").parse().unwrap_or(x)
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(sci(1.0), "1.00000000e0");
        assert_eq!(sci(-2.5e-12), "-2.50000000e-12");
        assert_eq!(sci(f64::INFINITY), "inf");
        assert_eq!(round9(1.234567891234), 1.23456789);
    }
}
