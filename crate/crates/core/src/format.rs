//! Locale-independent number formatting for CSV output.

/// Shortest decimal string that parses back to exactly `value`.
pub fn format_f64(value: f64) -> String {
    format!("{value:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for v in [0.1, 1.0, -2.5e-300, 1e21, 123456.789, f64::MIN_POSITIVE, 1.0 / 3.0] {
            assert_eq!(format_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_f64(0.25), "0.25");
    }
}
