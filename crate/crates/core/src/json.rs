//! JSON number helpers: non-finite distances travel as the string `"inf"`.

use serde_json::Value;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub fn num(v: f64) -> Value {
    if v.is_finite() {
        Value::from(v)
    } else if v == f64::INFINITY {
        Value::from("inf")
    } else if v == f64::NEG_INFINITY {
        Value::from("-inf")
    } else {
        Value::from("nan")
    }
}

pub fn nums(values: &[f64]) -> Value {
    Value::Array(values.iter().copied().map(num).collect())
}

pub fn matrix(m: &Matrix) -> Value {
    Value::Array(m.iter_rows().map(nums).collect())
}

pub fn parse_num(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::invalid(format!("number out of range: {n}"))),
        Value::String(s) if s == "inf" => Ok(f64::INFINITY),
        other => Err(Error::invalid(format!(
            "expected a number or \"inf\", got {other}"
        ))),
    }
}

pub fn to_string_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}
