//! Number formatting and tolerant comparison helpers.

/// Relative tolerance used by `==` in the language and by conversions.
pub const REL_TOL: f64 = 1e-9;
/// Absolute floor for comparisons near zero.
pub const ABS_TOL: f64 = 1e-12;

/// `|a - b| <= max(rel * max(|a|, |b|), abs)`.
pub fn approx_eq_with(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    let diff = (a - b).abs();
    diff <= (rel * a.abs().max(b.abs())).max(abs)
}

pub fn approx_eq(a: f64, b: f64) -> bool {
    approx_eq_with(a, b, REL_TOL, ABS_TOL)
}

/// Relative error of `actual` against `expected`, falling back to the
/// absolute error when `expected` is zero.
pub fn rel_err(actual: f64, expected: f64) -> f64 {
    let diff = (actual - expected).abs();
    if expected == 0.0 {
        diff
    } else {
        diff / expected.abs()
    }
}

/// Positional decimal with exactly 17 significant digits.
pub fn sig17(x: f64) -> String {
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let body = if exp >= 0 {
        let point = exp as usize + 1;
        if point >= digits.len() {
            format!("{}{}.0", digits, "0".repeat(point - digits.len()))
        } else {
            format!("{}.{}", &digits[..point], &digits[point..])
        }
    } else {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    };
    format!("{sign}{body}")
}

/// Shortest decimal that round-trips to the same `f64`.
pub fn shortest(x: f64) -> String {
    format!("{x}")
}
