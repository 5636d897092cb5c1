//! Locale-independent numeric formatting for CSV output.
//!
//! All CSV values are written with 12 significant digits, `.` decimal
//! separator, trailing zeros trimmed ("%.12g"-style), so that reruns are
//! byte-identical across machines.

/// Format with 12 significant digits.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let s = format!("{:.11e}", x);
    let (mantissa, exp) = s.split_once('e').expect("exponential format");
    let exp: i32 = exp.parse().expect("exponent");
    let neg = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let sign = if neg { "-" } else { "" };

    if (-4..12).contains(&exp) {
        if exp >= 0 {
            let int_len = (exp as usize) + 1;
            if digits.len() <= int_len {
                let mut out = digits.to_string();
                out.push_str(&"0".repeat(int_len - digits.len()));
                format!("{sign}{out}")
            } else {
                format!("{sign}{}.{}", &digits[..int_len], &digits[int_len..])
            }
        } else {
            let zeros = (-exp as usize) - 1;
            format!("{sign}0.{}{}", "0".repeat(zeros), digits)
        }
    } else {
        let mant = if digits.len() == 1 {
            digits.to_string()
        } else {
            format!("{}.{}", &digits[..1], &digits[1..])
        };
        format!("{sign}{mant}e{exp}")
    }
}
