//! Locale-independent numeric formatting with 6 significant digits
//! ('.' decimal separator, trailing zeros trimmed), used for every CSV cell
//! and metric printout.

pub fn g6(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_decimal(format!("{v:.decimals$}"))
    } else {
        let s = format!("{v:.5e}");
        let (mantissa, exponent) = s.split_once('e').expect("e-notation");
        format!("{}e{}", trim_decimal(mantissa.to_string()), exponent)
    }
}

fn trim_decimal(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(g6(0.2), "0.2");
        assert_eq!(g6(35.562_012_3), "35.562");
        assert_eq!(g6(0.999_975), "0.999975");
        assert_eq!(g6(123_456.7), "123457");
        assert_eq!(g6(-1.5), "-1.5");
        assert_eq!(g6(0.0), "0");
        assert_eq!(g6(10.0), "10");
    }

    #[test]
    fn extreme_magnitudes_use_e_notation() {
        assert_eq!(g6(1e12), "1e12");
        assert_eq!(g6(2.5e-9), "2.5e-9");
        assert_eq!(g6(1.234567e8), "1.23457e8");
    }

    #[test]
    fn specials() {
        assert_eq!(g6(f64::INFINITY), "inf");
        assert_eq!(g6(f64::NEG_INFINITY), "-inf");
        assert_eq!(g6(f64::NAN), "nan");
    }
}
