//! Fixed-precision number formatting for CSV output.

/// Formats `x` with 9 significant digits, dropping trailing zeros.
///
/// Values whose decimal exponent lies in `-5..9` print in positional
/// notation; everything else uses `e` notation.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // Round first so that e.g. 9.999999999 moves to the next exponent.
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

#[cfg(test)]
mod tests {
    use super::sig9;

    #[test]
    fn formats() {
        assert_eq!(sig9(2.892_000_000_000_000_3), "2.892");
        assert_eq!(sig9(3.1346), "3.1346");
        assert_eq!(sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(sig9(-1234.5), "-1234.5");
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(1e-12), "1e-12");
        assert_eq!(sig9(123_456_789_012.0), "1.23456789e11");
        assert_eq!(sig9(2.176_805_555_555_555_7), "2.17680556");
        assert_eq!(sig9(5.0), "5");
    }
}
