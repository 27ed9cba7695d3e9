//! Locale-independent number formatting for CSV output.

/// Significant digits written for every CSV number.
pub const SIG_DIGITS: usize = 9;

/// Formats `x` with exactly nine significant digits.
///
/// Plain decimal notation is used for magnitudes in `[1e-5, 1e9)`, scientific
/// (`1.23456789e-7`) otherwise. Zero (of either sign) is written as
/// `0.00000000`. Non-finite values are `nan`, `inf` and `-inf`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return format!("{:.*}", SIG_DIGITS - 1, 0.0);
    }
    // round to the target precision first so that 9.999999999 -> 1.00000000e1
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..9).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        format!("{:.*}", decimals, x)
    } else {
        sci
    }
}

/// Joins formatted values with commas.
pub fn fmt_row(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| fmt_num(v))
        .collect::<Vec<_>>()
        .join(",")
}
