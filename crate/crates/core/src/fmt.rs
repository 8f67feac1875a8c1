//! Number formatting shared by the CSV writers.

/// Formats `x` with 17 significant digits, `%.17g` style.
///
/// 17 digits round-trip every `f64`, so re-reading a written value gives
/// back the same bits.
pub fn sig17(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0');
    t.trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_like_printf_g17() {
        assert_eq!(sig17(0.78), "0.78000000000000003");
        assert_eq!(sig17(1.0), "1");
        assert_eq!(sig17(-2.5), "-2.5");
        assert_eq!(sig17(1e-7), "9.9999999999999995e-8");
        assert_eq!(sig17(0.0), "0");
        assert_eq!(sig17(f64::NAN), "nan");
    }

    #[test]
    fn round_trips() {
        for &x in &[0.1, 1.0 / 3.0, 123456.789, 6.02e23, -1.5e-300, 0.96] {
            let back: f64 = sig17(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
