//! Fixed-width numeric formatting shared by every CSV and JSON writer.

use std::str::FromStr;

use serde_json::{Number, Value};

/// 17 significant digits in scientific notation.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// JSON number carrying exactly the `sig17` text; non-finite values become `null`.
pub fn json_num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Number::from_str(&sig17(x))
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// `[re, im]` pair.
pub fn json_complex(re: f64, im: f64) -> Value {
    Value::Array(vec![json_num(re), json_num(im)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(sig17(0.5), "5.0000000000000000e-1");
        assert_eq!(sig17(-1.0 / 3.0), "-3.3333333333333331e-1");
        assert_eq!(sig17(f64::NAN), "NaN");
    }

    #[test]
    fn json_keeps_digits() {
        let v = json_num(0.1);
        assert_eq!(v.to_string(), "1.0000000000000001e-1");
        assert_eq!(json_num(f64::INFINITY), Value::Null);
        assert_eq!(json_complex(1.0, 0.0).to_string(), "[1.0000000000000000e+0,0.0000000000000000e+0]");
    }

    #[test]
    fn round_trips() {
        for x in [1e-300, 3.14159, 2.0f64.sqrt(), 1e300] {
            assert_eq!(sig17(x).parse::<f64>().unwrap(), x);
        }
    }
}
