use ndarray::{Array1, Array2};
use serde_json::Value;

use crate::error::{Error, Result};

/// A JSON value together with its path from the document root.
#[derive(Debug, Clone)]
pub struct Field<'a> {
    pub value: &'a Value,
    pub path: String,
}

fn child_path(parent: &str, key: &str) -> String {
    if parent.is_empty() {
        key.to_string()
    } else {
        format!("{parent}.{key}")
    }
}

impl<'a> Field<'a> {
    pub fn root(value: &'a Value) -> Self {
        Field {
            value,
            path: String::new(),
        }
    }

    pub fn err(&self, msg: impl Into<String>) -> Error {
        Error::schema(if self.path.is_empty() { "<root>" } else { &self.path }, msg)
    }

    fn object(&self) -> Result<&'a serde_json::Map<String, Value>> {
        self.value.as_object().ok_or_else(|| self.err("expected an object"))
    }

    pub fn get(&self, key: &str) -> Result<Field<'a>> {
        self.opt(key)?.ok_or_else(|| Error::schema(child_path(&self.path, key), "missing key"))
    }

    pub fn opt(&self, key: &str) -> Result<Option<Field<'a>>> {
        Ok(self.object()?.get(key).filter(|v| !v.is_null()).map(|value| Field {
            value,
            path: child_path(&self.path, key),
        }))
    }

    /// Reject keys outside `allowed`.
    pub fn only(&self, allowed: &[&str]) -> Result<()> {
        for k in self.object()?.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::schema(child_path(&self.path, k), "unknown key"));
            }
        }
        Ok(())
    }

    pub fn items(&self) -> Result<Vec<Field<'a>>> {
        let a = self.value.as_array().ok_or_else(|| self.err("expected an array"))?;
        Ok(a.iter()
            .enumerate()
            .map(|(i, value)| Field {
                value,
                path: format!("{}[{i}]", self.path),
            })
            .collect())
    }

    pub fn f64(&self) -> Result<f64> {
        let v = self.value.as_f64().ok_or_else(|| self.err("expected a number"))?;
        if !v.is_finite() {
            return Err(self.err("number must be finite"));
        }
        Ok(v)
    }

    pub fn nonneg(&self) -> Result<f64> {
        let v = self.f64()?;
        if v < 0.0 {
            return Err(self.err(format!("must be nonnegative, got {v}")));
        }
        Ok(v)
    }

    pub fn usize(&self) -> Result<usize> {
        self.value
            .as_u64()
            .and_then(|v| usize::try_from(v).ok())
            .ok_or_else(|| self.err("expected a nonnegative integer"))
    }

    pub fn u64(&self) -> Result<u64> {
        self.value.as_u64().ok_or_else(|| self.err("expected a nonnegative integer"))
    }

    pub fn str(&self) -> Result<&'a str> {
        self.value.as_str().ok_or_else(|| self.err("expected a string"))
    }

    pub fn vec(&self) -> Result<Vec<f64>> {
        self.items()?.iter().map(Field::f64).collect()
    }

    pub fn weights(&self) -> Result<Vec<f64>> {
        let w: Vec<f64> = self.items()?.iter().map(Field::nonneg).collect::<Result<_>>()?;
        if w.is_empty() {
            return Err(self.err("must not be empty"));
        }
        Ok(w)
    }

    pub fn indices(&self) -> Result<Vec<usize>> {
        self.items()?.iter().map(Field::usize).collect()
    }

    pub fn array1(&self) -> Result<Array1<f64>> {
        Ok(Array1::from(self.vec()?))
    }

    fn rows(&self, nonneg: bool) -> Result<Array2<f64>> {
        let rows = self.items()?;
        if rows.is_empty() {
            return Err(self.err("matrix must have at least one row"));
        }
        let mut width = None;
        let mut data = Vec::new();
        for r in &rows {
            let cells = r.items()?;
            match width {
                None => width = Some(cells.len()),
                Some(w) if w != cells.len() => {
                    return Err(r.err(format!("row has {} entries, expected {w}", cells.len())))
                }
                _ => {}
            }
            for c in &cells {
                data.push(if nonneg { c.nonneg()? } else { c.f64()? });
            }
        }
        let w = width.unwrap_or(0);
        if w == 0 {
            return Err(self.err("matrix rows must not be empty"));
        }
        Array2::from_shape_vec((rows.len(), w), data).map_err(|e| self.err(e.to_string()))
    }

    /// Rectangular matrix of finite numbers.
    pub fn matrix(&self) -> Result<Array2<f64>> {
        self.rows(false)
    }

    pub fn nonneg_matrix(&self) -> Result<Array2<f64>> {
        self.rows(true)
    }
}
