//! Float text with 17 significant digits, enough to round-trip any `f64`.

/// Positional notation for moderate exponents, scientific otherwise; trailing
/// zeros of the 17-digit mantissa are dropped.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("exponent digits");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    if (-5..17).contains(&exp) {
        let point = exp + 1;
        let body = if point <= 0 {
            format!("0.{}{}", "0".repeat((-point) as usize), digits)
        } else if point as usize >= digits.len() {
            format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
        } else {
            let (a, b) = digits.split_at(point as usize);
            format!("{a}.{b}")
        };
        format!("{sign}{body}")
    } else {
        let (a, b) = digits.split_at(1);
        if b.is_empty() {
            format!("{sign}{a}e{exp}")
        } else {
            format!("{sign}{a}.{b}e{exp}")
        }
    }
}

/// Inverse of [`fmt17`], also accepting anything `f64::from_str` accepts.
pub fn parse_f64(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        _ => s.parse().ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(fmt17(1.0), "1");
        assert_eq!(fmt17(3.0), "3");
        assert_eq!(fmt17(0.5), "0.5");
        assert_eq!(fmt17(-250.0), "-250");
        assert_eq!(fmt17(0.1), "0.10000000000000001");
        assert_eq!(fmt17(1e-7), "9.9999999999999995e-8");
        assert_eq!(fmt17(1e20), "1e20");
        assert_eq!(fmt17(f64::INFINITY), "inf");
    }

    #[test]
    fn round_trips() {
        let mut x = 1.2345e-300_f64;
        while x < 1e300 {
            for v in [x, -x, x * std::f64::consts::PI, 1.0 / x] {
                assert_eq!(parse_f64(&fmt17(v)).unwrap().to_bits(), v.to_bits(), "{v}");
            }
            x *= 7.3;
        }
        for v in [0.0, -0.0, f64::MIN_POSITIVE, f64::MAX, 5e-324] {
            assert_eq!(parse_f64(&fmt17(v)).unwrap().to_bits(), v.to_bits(), "{v}");
        }
    }
}
