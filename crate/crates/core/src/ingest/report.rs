use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::reference::OperatorKind;

/// Statistics transcribed from one manuscript, grouped by operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportedStats {
    pub source_id: String,
    pub groups: BTreeMap<OperatorKind, Vec<f64>>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl ReportedStats {
    /// Vector length behind the reported statistics, from the `n` metadata
    /// key when present.
    pub fn entries_per_vector(&self) -> Option<usize> {
        self.metadata
            .get("n")
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|n| n.is_finite() && *n >= 1.0)
            .map(|n| n.round() as usize)
    }
}

fn violation(pointer: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::SchemaViolation {
        pointer: pointer.into(),
        reason: reason.into(),
    }
}

/// JSON-pointer escaping of a single reference token.
fn escape(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

pub fn parse_report(text: &str) -> Result<ReportedStats> {
    let root: Value = serde_json::from_str(text).map_err(|e| violation("", e.to_string()))?;
    let obj = root
        .as_object()
        .ok_or_else(|| violation("", "expected an object"))?;

    let source_id = obj
        .get("source_id")
        .ok_or_else(|| violation("/source_id", "missing"))?
        .as_str()
        .ok_or_else(|| violation("/source_id", "expected a string"))?
        .to_string();

    let groups_value = obj
        .get("groups")
        .ok_or_else(|| violation("/groups", "missing"))?;
    let group_obj = groups_value
        .as_object()
        .ok_or_else(|| violation("/groups", "expected an object"))?;
    if group_obj.is_empty() {
        return Err(violation(
            "/groups",
            "at least one operator group is required",
        ));
    }
    let mut groups = BTreeMap::new();
    for (name, values) in group_obj {
        let op: OperatorKind = name.parse()?;
        let pointer = format!("/groups/{}", escape(name));
        let arr = values
            .as_array()
            .ok_or_else(|| violation(&pointer, "expected an array of numbers"))?;
        let parsed = arr
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.as_f64()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| violation(format!("{pointer}/{i}"), "expected a finite number"))
            })
            .collect::<Result<Vec<f64>>>()?;
        groups.insert(op, parsed);
    }

    let mut metadata = BTreeMap::new();
    if let Some(meta) = obj.get("metadata") {
        let meta = meta
            .as_object()
            .ok_or_else(|| violation("/metadata", "expected an object"))?;
        for (k, v) in meta {
            let s = v.as_str().ok_or_else(|| {
                violation(format!("/metadata/{}", escape(k)), "expected a string")
            })?;
            metadata.insert(k.clone(), s.to_string());
        }
    }

    Ok(ReportedStats {
        source_id,
        groups,
        metadata,
    })
}

pub fn load_report(path: &Path) -> Result<ReportedStats> {
    parse_report(&fs::read_to_string(path)?)
}
