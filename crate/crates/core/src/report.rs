//! Number formatting shared by CSV and JSON outputs.

/// 17 significant digits, round-trip exact.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON number with 17 significant digits; non-finite values become `null`.
pub fn num17(x: f64) -> serde_json::Value {
    if !x.is_finite() {
        return serde_json::Value::Null;
    }
    let n: serde_json::Number = fmt17(x).parse().expect("formatted float parses as a JSON number");
    serde_json::Value::Number(n)
}
