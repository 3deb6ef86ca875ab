//! Response schemas and the validator for them.
//!
//! Schemas are JSON documents shipped under `assets/schemas/`, one per
//! template, written in a small subset of JSON Schema: `type`, `properties`,
//! `required`, `additionalProperties` (boolean), `items`, `minItems`,
//! `minimum`, `maximum`, `minLength`, `enum` and `anyOf`. One extension,
//! `x-normalize`, names a label vocabulary (`facet` or `action`) whose
//! loose spellings are rewritten to canonical form before validation.

use super::TemplateId;
use crate::graph::FacetType;
use crate::suggest::SuggestionAction;
use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseSchema {
    pub template: TemplateId,
    pub version: u64,
    pub root: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum ViolationKind {
    Type,
    Missing,
    Unexpected,
    Enum,
    Range,
    Length,
    Cardinality,
    NoAlternative,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// JSON pointer to the offending value.
    pub path: String,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = if self.path.is_empty() { "/" } else { &self.path };
        write!(f, "{path}: {}", self.message)
    }
}

fn asset(template: TemplateId) -> Option<&'static str> {
    Some(match template {
        TemplateId::System => return None,
        TemplateId::PaperProcessing => include_str!("../../assets/schemas/paperProcessing.schema.json"),
        TemplateId::NodeSuggestion => include_str!("../../assets/schemas/nodeSuggestion.schema.json"),
        TemplateId::NodeGeneration => include_str!("../../assets/schemas/nodeGeneration.schema.json"),
        TemplateId::EdgeGeneration => include_str!("../../assets/schemas/edgeGeneration.schema.json"),
        TemplateId::BriefGeneration => include_str!("../../assets/schemas/briefGeneration.schema.json"),
        TemplateId::QaResponse => include_str!("../../assets/schemas/qaResponse.schema.json"),
        TemplateId::LitReviewSummary => include_str!("../../assets/schemas/litReviewSummary.schema.json"),
        TemplateId::LitReviewAnalysis => include_str!("../../assets/schemas/litReviewAnalysis.schema.json"),
        TemplateId::NodeLitReview => include_str!("../../assets/schemas/nodeLitReview.schema.json"),
    })
}

pub(crate) fn catalog(template: TemplateId) -> Option<&'static ResponseSchema> {
    static CATALOG: OnceLock<BTreeMap<TemplateId, ResponseSchema>> = OnceLock::new();
    CATALOG
        .get_or_init(|| {
            TemplateId::ALL
                .iter()
                .filter_map(|t| asset(*t).map(|text| (*t, text)))
                .map(|(t, text)| {
                    let root: Value = serde_json::from_str(text).expect("schema asset is valid JSON");
                    assert_eq!(root["$id"], t.as_str(), "schema asset id mismatch");
                    let version = root["version"].as_u64().expect("schema asset has a version");
                    (t, ResponseSchema { template: t, version, root })
                })
                .collect()
        })
        .get(&template)
}

impl ResponseSchema {
    /// Rewrites `x-normalize` fields to canonical labels where recognized.
    pub fn normalize(&self, value: &mut Value) {
        normalize(&self.root, value);
    }

    pub fn validate(&self, value: &Value) -> Vec<Violation> {
        let mut out = Vec::new();
        check(&self.root, value, "", &mut out);
        out
    }
}

fn normalize(schema: &Value, value: &mut Value) {
    if let Some(branches) = schema.get("anyOf").and_then(Value::as_array) {
        for branch in branches {
            normalize(branch, value);
        }
    }
    match value {
        Value::String(s) => {
            let canonical = match schema.get("x-normalize").and_then(Value::as_str) {
                Some("facet") => FacetType::parse_label(s).map(FacetType::label),
                Some("action") => SuggestionAction::parse_label(s).map(SuggestionAction::label),
                _ => None,
            };
            if let Some(label) = canonical {
                *s = label.to_string();
            }
        }
        Value::Object(map) => {
            if let Some(props) = schema.get("properties").and_then(Value::as_object) {
                for (key, sub) in props {
                    if let Some(v) = map.get_mut(key) {
                        normalize(sub, v);
                    }
                }
            }
        }
        Value::Array(items) => {
            if let Some(item_schema) = schema.get("items") {
                for item in items {
                    normalize(item_schema, item);
                }
            }
        }
        _ => {}
    }
}

fn type_name(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(n) if n.is_i64() || n.is_u64() => "integer",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn type_matches(expected: &str, value: &Value) -> bool {
    let actual = type_name(value);
    actual == expected || (expected == "number" && actual == "integer")
}

fn push(out: &mut Vec<Violation>, path: &str, kind: ViolationKind, message: String) {
    out.push(Violation {
        path: path.to_string(),
        kind,
        message,
    });
}

fn check(schema: &Value, value: &Value, path: &str, out: &mut Vec<Violation>) {
    if let Some(branches) = schema.get("anyOf").and_then(Value::as_array) {
        let matched = branches.iter().any(|b| {
            let mut scratch = Vec::new();
            check(b, value, path, &mut scratch);
            scratch.is_empty()
        });
        if !matched {
            push(out, path, ViolationKind::NoAlternative, "matches none of the allowed shapes".into());
        }
        return;
    }

    if let Some(expected) = schema.get("type") {
        let allowed: Vec<&str> = match expected {
            Value::String(s) => vec![s.as_str()],
            Value::Array(list) => list.iter().filter_map(Value::as_str).collect(),
            _ => Vec::new(),
        };
        if !allowed.iter().any(|t| type_matches(t, value)) {
            push(
                out,
                path,
                ViolationKind::Type,
                format!("expected {}, found {}", allowed.join(" or "), type_name(value)),
            );
            return;
        }
    }

    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(value) {
            push(out, path, ViolationKind::Enum, format!("{value} is not an allowed value"));
        }
    }

    match value {
        Value::Number(n) => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            if let Some(min) = schema.get("minimum").and_then(Value::as_f64) {
                if x.is_nan() || x < min {
                    push(out, path, ViolationKind::Range, format!("{x} is below the minimum {min}"));
                }
            }
            if let Some(max) = schema.get("maximum").and_then(Value::as_f64) {
                if x.is_nan() || x > max {
                    push(out, path, ViolationKind::Range, format!("{x} is above the maximum {max}"));
                }
            }
        }
        Value::String(s) => {
            if let Some(min) = schema.get("minLength").and_then(Value::as_u64) {
                if (s.trim().chars().count() as u64) < min {
                    push(out, path, ViolationKind::Length, format!("shorter than {min} characters"));
                }
            }
        }
        Value::Array(items) => {
            if let Some(min) = schema.get("minItems").and_then(Value::as_u64) {
                if (items.len() as u64) < min {
                    push(
                        out,
                        path,
                        ViolationKind::Cardinality,
                        format!("{} items, at least {min} required", items.len()),
                    );
                }
            }
            if let Some(item_schema) = schema.get("items") {
                for (i, item) in items.iter().enumerate() {
                    check(item_schema, item, &format!("{path}/{i}"), out);
                }
            }
        }
        Value::Object(map) => {
            let props = schema.get("properties").and_then(Value::as_object);
            if let Some(required) = schema.get("required").and_then(Value::as_array) {
                for key in required.iter().filter_map(Value::as_str) {
                    if !map.contains_key(key) {
                        push(
                            out,
                            &format!("{path}/{}", escape(key)),
                            ViolationKind::Missing,
                            "required field is missing".into(),
                        );
                    }
                }
            }
            let closed = schema.get("additionalProperties") == Some(&Value::Bool(false));
            for (key, v) in map {
                let child = format!("{path}/{}", escape(key));
                match props.and_then(|p| p.get(key)) {
                    Some(sub) => check(sub, v, &child, out),
                    None if closed => push(out, &child, ViolationKind::Unexpected, "unexpected field".into()),
                    None => {}
                }
            }
        }
        _ => {}
    }
}

fn escape(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}
