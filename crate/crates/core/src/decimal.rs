//! Fixed-point rendering of rates. Lower bounds are truncated and upper
//! bounds rounded up, so a printed value is always a valid bound.

// Slack absorbing f64 noise in the scaled value.
const SLACK: f64 = 1e-7;

/// `x` rounded toward negative infinity at `digits` decimals.
pub fn truncate(x: f64, digits: usize) -> String {
    let scale = 10f64.powi(digits as i32);
    let v = (x * scale + SLACK).floor() / scale;
    format!("{v:.digits$}")
}

/// `x` rounded toward positive infinity at `digits` decimals.
pub fn round_up(x: f64, digits: usize) -> String {
    let scale = 10f64.powi(digits as i32);
    let v = (x * scale - SLACK).ceil() / scale;
    format!("{v:.digits$}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions() {
        assert_eq!(truncate(1.318446971988, 9), "1.318446971");
        assert_eq!(truncate(2.0, 4), "2.0000");
        assert_eq!(truncate(1.75, 4), "1.7500");
        assert_eq!(truncate(1.29248, 4), "1.2924");
        assert_eq!(round_up(1.5, 4), "1.5000");
        assert_eq!(round_up(1.81121, 4), "1.8113");
        assert_eq!(round_up(1.0, 1), "1.0");
    }
}
