use std::path::Path;

use ndarray::Array2;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

/// Compact JSON with sorted keys and shortest round-trip floats.
pub fn canonical(v: &Value) -> String {
    let mut s = serde_json::to_string(&sorted(v)).expect("values always serialize");
    s.push('\n');
    s
}

fn sorted(v: &Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            Value::Object(keys.into_iter().map(|k| (k.clone(), sorted(&m[k]))).collect::<Map<_, _>>())
        }
        Value::Array(a) => Value::Array(a.iter().map(sorted).collect()),
        other => other.clone(),
    }
}

/// Parse JSON text, reporting the position of syntax errors.
pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })
}

pub fn read_json(path: &Path) -> Result<Value> {
    parse_json(&std::fs::read_to_string(path)?)
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    std::fs::write(path, canonical(v))?;
    Ok(())
}

/// JSON number, mapping non-finite values to `null`.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

/// Row-major nested arrays.
pub fn matrix(m: &Array2<f64>) -> Value {
    Value::Array(m.rows().into_iter().map(|r| nums(&r.to_vec())).collect())
}

pub fn indices(v: &[usize]) -> Value {
    json!(v)
}
