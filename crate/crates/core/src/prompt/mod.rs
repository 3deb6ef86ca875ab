//! Prompt templates, response schemas, JSON recovery and citation tags.

mod citation;
mod context;
mod response;
pub mod schema;
mod template;

pub use citation::{
    cited_ids, parse_citation_tags, resolve_citations, AnnotatedSegment, CitedText, Segment, TAG_OPEN,
};
pub use context::{format_ideas_context, format_node, format_paper, format_papers_context};
pub use response::{
    parse_json_response, ParsedResponse, ResponseError, MAX_MECHANICAL_REPAIRS, REPAIR_FENCE_STRIP,
    REPAIR_MISSING_COMMA, REPAIR_PROSE_STRIP, REPAIR_REASK, REPAIR_TRAILING_COMMA,
};
pub use schema::{ResponseSchema, Violation, ViolationKind};
pub use template::{render_prompt, ContextBundle, TemplateId};
