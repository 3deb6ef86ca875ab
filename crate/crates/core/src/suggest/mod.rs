//! Literature-grounded generation pipelines, implemented on [`crate::Studio`].
//!
//! Every pipeline follows the same shape: read a snapshot, render one
//! template, call the model through the project's session, parse and clamp
//! the reply, then commit against the live project.

mod brief;
mod edge;
mod generate;
mod literature;
mod qa;
mod suggestions;
mod types;

pub use brief::{bracket_citations, normalize_title, resolve_reference_title};
pub use generate::{GenerationAction, GenerationOutcome, GenerationRequest, ChainOutcome, ChainFailure};
pub use literature::LiteratureSummaryView;
pub use types::*;

use crate::graph::Project;
use crate::prompt::{format_papers_context, CitedText};

/// Upper bounds applied to model output.
pub const MAX_SUGGESTIONS: usize = 5;
pub const MAX_ALTERNATIVES: usize = 3;
pub const MAX_NEW_FACET_NODES: usize = 3;
pub const MAX_RELEVANT_SECTIONS: usize = 3;
pub const MAX_NODE_SUGGESTIONS: usize = 2;

/// Canvas spacing for generated nodes.
pub const ROW_HEIGHT: f64 = 200.0;
pub const COLUMN_WIDTH: f64 = 320.0;

pub(crate) fn papers_block(project: &Project) -> String {
    format_papers_context(&project.collection())
}

/// Corpus ids of citation tags in `text` that match no collected paper.
pub(crate) fn dangling_in(text: &str, project: &Project) -> Vec<String> {
    CitedText::new(text, project).dangling
}

/// Keeps the first `max` items and reports how many were dropped.
pub(crate) fn clamp<T>(items: &mut Vec<T>, max: usize) -> usize {
    let dropped = items.len().saturating_sub(max);
    items.truncate(max);
    dropped
}

/// Reads a string field, accepting a bare number as its decimal text.
pub(crate) fn text_field(value: &serde_json::Value) -> Option<String> {
    match value {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}
