use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HyperValue {
    Int(i64),
    Real(f64),
    Text(String),
}

impl HyperValue {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            HyperValue::Int(i) => Some(i as f64),
            HyperValue::Real(x) => Some(x),
            HyperValue::Text(_) => None,
        }
    }

    pub fn as_usize(&self) -> Option<usize> {
        match *self {
            HyperValue::Int(i) if i >= 0 => Some(i as usize),
            HyperValue::Real(x) if x >= 0.0 && x.fract() == 0.0 => Some(x as usize),
            _ => None,
        }
    }
}

impl fmt::Display for HyperValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HyperValue::Int(i) => write!(f, "{i}"),
            HyperValue::Real(x) => write!(f, "{x}"),
            HyperValue::Text(s) => f.write_str(s),
        }
    }
}

impl From<i64> for HyperValue {
    fn from(v: i64) -> Self {
        HyperValue::Int(v)
    }
}

impl From<f64> for HyperValue {
    fn from(v: f64) -> Self {
        HyperValue::Real(v)
    }
}

impl From<&str> for HyperValue {
    fn from(v: &str) -> Self {
        HyperValue::Text(v.to_string())
    }
}

/// Named hyper-parameter values, ordered by name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HyperParams(BTreeMap<String, HyperValue>);

impl HyperParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: impl Into<HyperValue>) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: impl Into<HyperValue>) {
        self.0.insert(name.to_string(), value.into());
    }

    pub fn get(&self, name: &str) -> Option<&HyperValue> {
        self.0.get(name)
    }

    pub fn f64_or(&self, name: &str, default: f64) -> Result<f64> {
        match self.0.get(name) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| Error::Model(format!("hyper-parameter {name} must be numeric"))),
        }
    }

    pub fn usize_or(&self, name: &str, default: usize) -> Result<usize> {
        match self.0.get(name) {
            None => Ok(default),
            Some(v) => v.as_usize().ok_or_else(|| {
                Error::Model(format!("hyper-parameter {name} must be a nonnegative integer"))
            }),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &HyperValue)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }
}

impl fmt::Display for HyperParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// Candidate values per hyper-parameter name.
///
/// Points are enumerated as the Cartesian product with names in
/// alphabetical order (the first name varies slowest) and candidates in
/// listed order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HyperGrid(BTreeMap<String, Vec<HyperValue>>);

impl HyperGrid {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, candidates: Vec<HyperValue>) -> Self {
        self.0.insert(name.to_string(), candidates);
        self
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        crate::jsonio::read_json(path)
    }

    pub fn len(&self) -> usize {
        if self.0.is_empty() {
            0
        } else {
            self.0.values().map(Vec::len).product()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn candidates(&self, name: &str) -> Option<&[HyperValue]> {
        self.0.get(name).map(Vec::as_slice)
    }

    pub fn contains(&self, params: &HyperParams) -> bool {
        params.0.len() == self.0.len()
            && params
                .iter()
                .all(|(k, v)| self.0.get(k).is_some_and(|c| c.contains(v)))
    }

    pub fn points(&self) -> Vec<HyperParams> {
        let mut points = vec![HyperParams::new()];
        if self.is_empty() {
            return Vec::new();
        }
        for (name, candidates) in &self.0 {
            let mut next = Vec::with_capacity(points.len() * candidates.len());
            for p in &points {
                for c in candidates {
                    next.push(p.clone().with(name, c.clone()));
                }
            }
            points = next;
        }
        points
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_order() {
        let grid = HyperGrid::new()
            .with("lr", vec![0.1.into(), 0.01.into()])
            .with("depth", vec![2.into(), 0.into()]);
        let pts: Vec<String> = grid.points().iter().map(ToString::to_string).collect();
        assert_eq!(pts, ["depth=2,lr=0.1", "depth=2,lr=0.01", "depth=0,lr=0.1", "depth=0,lr=0.01"]);
        assert!(grid.points().iter().all(|p| grid.contains(p)));
    }

    #[test]
    fn empty_grids() {
        assert!(HyperGrid::new().points().is_empty());
        assert!(HyperGrid::new().with("a", vec![]).points().is_empty());
    }

    #[test]
    fn json_values_keep_their_type() {
        let grid: HyperGrid =
            serde_json::from_str(r#"{"depth":[0,2],"lr":[0.5],"act":["relu"]}"#).unwrap();
        assert_eq!(grid.candidates("depth").unwrap()[1], HyperValue::Int(2));
        assert_eq!(grid.candidates("lr").unwrap()[0], HyperValue::Real(0.5));
        assert_eq!(grid.len(), 2);
    }

    #[test]
    fn typed_access() {
        let p = HyperParams::new().with("depth", 2).with("lr", 0.5).with("act", "relu");
        assert_eq!(p.usize_or("depth", 0).unwrap(), 2);
        assert_eq!(p.f64_or("lr", 0.0).unwrap(), 0.5);
        assert_eq!(p.f64_or("missing", 7.0).unwrap(), 7.0);
        assert!(p.f64_or("act", 0.0).is_err());
    }
}
