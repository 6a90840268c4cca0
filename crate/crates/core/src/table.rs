//! Plain CSV rows with shortest round-trip decimals.

/// Shortest digits that parse back to the same value; exponent form
/// outside [1e-5, 1e16).
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// One CSV line of [`fmt_f64`] values.
pub fn csv_row(values: &[f64]) -> String {
    let mut s = values.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let v = [0.1, 1.0 / 3.0, -2.5e-300, 1e21];
        let row = csv_row(&v);
        let back: Vec<f64> = row.trim().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(back, v);
        assert_eq!(row, "0.1,0.3333333333333333,-2.5e-300,1e21\n");
    }
}
