use super::schema::{Violation, ViolationKind};
use super::TemplateId;
use crate::error::Error;
use serde::Serialize;
use serde_json::Value;
use std::fmt;

/// At most this many mechanical rewrites are tried before giving up.
pub const MAX_MECHANICAL_REPAIRS: usize = 2;

pub const REPAIR_FENCE_STRIP: &str = "fence-strip";
pub const REPAIR_PROSE_STRIP: &str = "prose-strip";
pub const REPAIR_TRAILING_COMMA: &str = "trailing-comma";
pub const REPAIR_MISSING_COMMA: &str = "missing-comma";
pub const REPAIR_REASK: &str = "re-ask";

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ParsedResponse {
    pub schema: TemplateId,
    pub value: Value,
    pub repairs_applied: Vec<String>,
    pub raw_text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResponseError {
    /// No JSON document could be recovered.
    Malformed { reason: String, raw_text: String },
    /// JSON parsed but does not fit the schema.
    SchemaViolation {
        value: Value,
        violations: Vec<Violation>,
        repairs_applied: Vec<String>,
        raw_text: String,
    },
}

impl ResponseError {
    pub fn raw_text(&self) -> &str {
        match self {
            ResponseError::Malformed { raw_text, .. } | ResponseError::SchemaViolation { raw_text, .. } => raw_text,
        }
    }

    /// True when every violation is an out-of-range number.
    pub fn only_range_violations(&self) -> bool {
        match self {
            ResponseError::SchemaViolation { violations, .. } => {
                !violations.is_empty() && violations.iter().all(|v| v.kind == ViolationKind::Range)
            }
            ResponseError::Malformed { .. } => false,
        }
    }
}

impl fmt::Display for ResponseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResponseError::Malformed { reason, .. } => f.write_str(reason),
            ResponseError::SchemaViolation { violations, .. } => {
                let parts: Vec<String> = violations.iter().map(ToString::to_string).collect();
                f.write_str(&parts.join("; "))
            }
        }
    }
}

impl From<ResponseError> for Error {
    fn from(err: ResponseError) -> Self {
        match err {
            ResponseError::Malformed { .. } => Error::MalformedResponse(err.to_string()),
            ResponseError::SchemaViolation { .. } => Error::SchemaViolation(err.to_string()),
        }
    }
}

/// Recovers a JSON document from model output and validates it.
///
/// Pure: the model re-ask step lives with the caller that owns the session.
pub fn parse_json_response(raw_text: &str, schema_id: TemplateId) -> Result<ParsedResponse, ResponseError> {
    let malformed = |reason: String| ResponseError::Malformed {
        reason,
        raw_text: raw_text.to_string(),
    };
    let schema = schema_id
        .schema()
        .ok_or_else(|| malformed(format!("template {schema_id} has no response schema")))?;
    if raw_text.trim().is_empty() {
        return Err(malformed("empty response".into()));
    }

    let (mut value, repairs_applied) = recover_json(raw_text).map_err(malformed)?;
    schema.normalize(&mut value);
    let violations = schema.validate(&value);
    if !violations.is_empty() {
        return Err(ResponseError::SchemaViolation {
            value,
            violations,
            repairs_applied,
            raw_text: raw_text.to_string(),
        });
    }
    Ok(ParsedResponse {
        schema: schema_id,
        value,
        repairs_applied,
        raw_text: raw_text.to_string(),
    })
}

type Rewrite = fn(&str) -> Option<String>;

fn recover_json(raw: &str) -> Result<(Value, Vec<String>), String> {
    let mut text = raw.trim().to_string();
    let mut repairs: Vec<String> = Vec::new();
    let mut last_err = match serde_json::from_str::<Value>(&text) {
        Ok(v) => return Ok((v, repairs)),
        Err(e) => e.to_string(),
    };

    let extraction: (&str, Rewrite) = if text.contains("```") {
        (REPAIR_FENCE_STRIP, strip_fence)
    } else {
        (REPAIR_PROSE_STRIP, strip_prose)
    };
    let steps: [(&str, Rewrite); 3] = [
        extraction,
        (REPAIR_TRAILING_COMMA, remove_trailing_commas),
        (REPAIR_MISSING_COMMA, insert_missing_commas),
    ];
    for (name, rewrite) in steps {
        let Some(next) = rewrite(&text) else { continue };
        if next == text {
            continue;
        }
        if repairs.len() == MAX_MECHANICAL_REPAIRS {
            return Err(format!("repair budget exhausted: {last_err}"));
        }
        repairs.push(name.to_string());
        text = next;
        match serde_json::from_str::<Value>(&text) {
            Ok(v) => return Ok((v, repairs)),
            Err(e) => last_err = e.to_string(),
        }
    }
    Err(format!("invalid JSON: {last_err}"))
}

/// Body of the first fenced block; an unterminated fence runs to the end.
fn strip_fence(text: &str) -> Option<String> {
    let open = text.find("```")?;
    let after_marker = &text[open + 3..];
    let body_start = after_marker.find('\n').map(|i| i + 1).unwrap_or(after_marker.len());
    let body = &after_marker[body_start..];
    let body = match body.find("```") {
        Some(close) => &body[..close],
        None => body,
    };
    Some(body.trim().to_string())
}

/// Slice from the first `{` to the last `}`.
fn strip_prose(text: &str) -> Option<String> {
    let start = text.find('{')?;
    let end = text.rfind('}')?;
    (end > start).then(|| text[start..=end].to_string())
}

fn remove_trailing_commas(text: &str) -> Option<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut in_string = false;
    let mut escaped = false;
    for (i, &c) in chars.iter().enumerate() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            continue;
        }
        match c {
            '"' => {
                in_string = true;
                out.push(c);
            }
            ',' => {
                let next = chars[i + 1..].iter().find(|c| !c.is_whitespace());
                if !matches!(next, Some('}') | Some(']')) {
                    out.push(c);
                }
            }
            _ => out.push(c),
        }
    }
    Some(out)
}

/// Inserts a comma between two values separated only by a line break, as in
/// `"a": "x"\n "b": 1`.
fn insert_missing_commas(text: &str) -> Option<String> {
    let mut out = String::with_capacity(text.len() + 8);
    let mut in_string = false;
    let mut escaped = false;
    let mut after_value = false;
    let mut newline_since = false;
    for c in text.chars() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
                after_value = true;
                newline_since = false;
            }
            continue;
        }
        if c.is_whitespace() {
            newline_since |= c == '\n';
            out.push(c);
            continue;
        }
        if matches!(c, '"' | '{' | '[') && after_value && newline_since {
            let trimmed = out.trim_end().len();
            out.insert(trimmed, ',');
        }
        match c {
            '"' => in_string = true,
            '}' | ']' => after_value = true,
            ',' | ':' | '{' | '[' => after_value = false,
            _ => after_value = true,
        }
        newline_since = false;
        out.push(c);
    }
    Some(out)
}
