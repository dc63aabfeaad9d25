//! Decimal formatting with a fixed number of significant digits.

use crate::Scalar;

/// Formats `v` with `digits` significant digits, `%g` style: fixed notation for
/// moderate exponents, scientific otherwise, trailing zeros trimmed.
///
/// With 17 digits the output parses back to the identical `f64`.
pub fn format_significant<T: Scalar>(v: T, digits: usize) -> String {
    let digits = digits.max(1);
    let v = v.as_f64();
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("LowerExp output has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, v))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

/// Rounds `v` to `digits` significant digits.
pub fn round_significant(v: f64, digits: usize) -> f64 {
    format_significant(v, digits).parse().unwrap_or(v)
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    trimmed.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_like_percent_g() {
        assert_eq!(format_significant(0.0f64, 17), "0");
        assert_eq!(format_significant(1.0f64, 17), "1");
        assert_eq!(format_significant(-2.5f64, 17), "-2.5");
        assert_eq!(format_significant(0.1f64, 17), "0.10000000000000001");
        assert_eq!(format_significant(1.0e-7f64, 17), "9.9999999999999995e-8");
        assert_eq!(format_significant(123456.0f64, 3), "1.23e5");
        assert_eq!(format_significant(0.191_666_666_666_666_66_f64, 12), "0.191666666667");
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for &v in &[0.1f64, 1.0 / 3.0, 1e-300, 6.02214076e23, -7.25, f64::MIN_POSITIVE, 123.456] {
            let s = format_significant(v, 17);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
    }
}
