//! Versioned JSON project documents.
//!
//! A document is the serialized [`Project`] plus a top-level `schemaVersion`,
//! written with object keys sorted at every level so re-saving an unchanged
//! project yields identical bytes.

use super::Project;
use crate::error::{Error, Result};
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u64 = 1;
const VERSION_KEY: &str = "schemaVersion";

pub fn save_project(project: &Project) -> String {
    let mut value = serde_json::to_value(project).expect("project serializes");
    if let Value::Object(map) = &mut value {
        map.insert(VERSION_KEY.to_string(), Value::from(SCHEMA_VERSION));
    }
    let mut out = serde_json::to_string_pretty(&canonicalize(value)).expect("value serializes");
    out.push('\n');
    out
}

pub fn load_project(document: &str) -> Result<Project> {
    let corrupt = |msg: String| Error::CorruptDocument(msg);
    let mut value: Value = serde_json::from_str(document).map_err(|e| corrupt(e.to_string()))?;
    let map = value
        .as_object_mut()
        .ok_or_else(|| corrupt("document is not a JSON object".into()))?;
    match map.remove(VERSION_KEY) {
        Some(Value::Number(n)) if n.as_u64() == Some(SCHEMA_VERSION) => {}
        Some(other) => return Err(corrupt(format!("unsupported schemaVersion {other}"))),
        None => return Err(corrupt("missing schemaVersion".into())),
    }
    let project: Project = serde_json::from_value(value).map_err(|e| corrupt(e.to_string()))?;
    project.check_integrity().map_err(corrupt)?;
    Ok(project)
}

/// Rebuilds every object with its keys in sorted order.
pub fn canonicalize(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut sorted = Map::new();
            for (k, v) in entries {
                sorted.insert(k, canonicalize(v));
            }
            Value::Object(sorted)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        other => other,
    }
}
