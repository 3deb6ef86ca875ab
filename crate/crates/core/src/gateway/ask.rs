use super::{ChatSession, Gateway};
use crate::error::{Error, Result};
use crate::prompt::{parse_json_response, ContextBundle, ResponseError, TemplateId, Violation, REPAIR_REASK};
use serde_json::Value;

/// Sent once, in the same session, when a reply cannot be used.
pub const REASK_PROMPT: &str = "Your previous reply could not be used: {problem}\nReply again with only the JSON object in the format requested above, with no other text.";

/// A usable model reply.
///
/// `out_of_range` lists numeric range violations, the one kind of schema
/// violation handed back to the caller instead of being re-asked, so that
/// callers with a clamping rule can apply it.
#[derive(Debug, Clone, PartialEq)]
pub struct Reply {
    pub template: TemplateId,
    pub value: Value,
    pub repairs_applied: Vec<String>,
    pub raw_text: String,
    pub out_of_range: Vec<Violation>,
}

impl Reply {
    /// Fails with `SchemaViolation` if any value was out of range.
    pub fn require_in_range(self) -> Result<Self> {
        if self.out_of_range.is_empty() {
            return Ok(self);
        }
        let parts: Vec<String> = self.out_of_range.iter().map(ToString::to_string).collect();
        Err(Error::SchemaViolation(parts.join("; ")))
    }
}

fn accept(result: std::result::Result<crate::prompt::ParsedResponse, ResponseError>) -> std::result::Result<Reply, ResponseError> {
    match result {
        Ok(parsed) => Ok(Reply {
            template: parsed.schema,
            value: parsed.value,
            repairs_applied: parsed.repairs_applied,
            raw_text: parsed.raw_text,
            out_of_range: Vec::new(),
        }),
        Err(err) if err.only_range_violations() => match err {
            ResponseError::SchemaViolation {
                value,
                violations,
                repairs_applied,
                raw_text,
            } => Ok(Reply {
                template: TemplateId::System,
                value,
                repairs_applied,
                raw_text,
                out_of_range: violations,
            }),
            ResponseError::Malformed { .. } => unreachable!("range violations imply a parsed document"),
        },
        Err(err) => Err(err),
    }
}

/// Renders `template`, completes it, and recovers a schema-valid document,
/// re-asking the model once if mechanical repair is not enough.
///
/// A reply that still fails after the re-ask is `MalformedResponse`.
pub fn ask_json(
    gateway: &Gateway,
    session: &mut ChatSession,
    template: TemplateId,
    bundle: &ContextBundle,
) -> Result<Reply> {
    let raw = gateway.complete_template(session, template, bundle)?;
    let first = match accept(parse_json_response(&raw, template)) {
        Ok(reply) => return Ok(with_template(reply, template)),
        Err(err) => err,
    };
    tracing::info!(%template, problem = %first, "re-asking after unusable reply");
    let prompt = REASK_PROMPT.replace("{problem}", &first.to_string());
    let raw = gateway.complete(session, &prompt, template.tier())?;
    match accept(parse_json_response(&raw, template)) {
        Ok(mut reply) => {
            let mut repairs = match &first {
                ResponseError::SchemaViolation { repairs_applied, .. } => repairs_applied.clone(),
                ResponseError::Malformed { .. } => Vec::new(),
            };
            repairs.push(REPAIR_REASK.to_string());
            repairs.append(&mut reply.repairs_applied);
            reply.repairs_applied = repairs;
            Ok(with_template(reply, template))
        }
        Err(second) => Err(Error::MalformedResponse(format!(
            "{template}: {second} (after re-ask; raw reply: {})",
            truncate(second.raw_text(), 200)
        ))),
    }
}

fn with_template(mut reply: Reply, template: TemplateId) -> Reply {
    reply.template = template;
    reply
}

fn truncate(text: &str, max: usize) -> &str {
    match text.char_indices().nth(max) {
        Some((i, _)) => &text[..i],
        None => text,
    }
}
