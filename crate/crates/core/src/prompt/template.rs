use super::schema::{self, ResponseSchema};
use crate::error::{Error, Result};
use crate::gateway::ModelTier;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// The ten prompt templates the service sends to the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TemplateId {
    System,
    PaperProcessing,
    NodeSuggestion,
    NodeGeneration,
    EdgeGeneration,
    BriefGeneration,
    QaResponse,
    LitReviewSummary,
    LitReviewAnalysis,
    NodeLitReview,
}

impl TemplateId {
    pub const ALL: [TemplateId; 10] = [
        TemplateId::System,
        TemplateId::PaperProcessing,
        TemplateId::NodeSuggestion,
        TemplateId::NodeGeneration,
        TemplateId::EdgeGeneration,
        TemplateId::BriefGeneration,
        TemplateId::QaResponse,
        TemplateId::LitReviewSummary,
        TemplateId::LitReviewAnalysis,
        TemplateId::NodeLitReview,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::System => "system",
            TemplateId::PaperProcessing => "paperProcessing",
            TemplateId::NodeSuggestion => "nodeSuggestion",
            TemplateId::NodeGeneration => "nodeGeneration",
            TemplateId::EdgeGeneration => "edgeGeneration",
            TemplateId::BriefGeneration => "briefGeneration",
            TemplateId::QaResponse => "qaResponse",
            TemplateId::LitReviewSummary => "litReviewSummary",
            TemplateId::LitReviewAnalysis => "litReviewAnalysis",
            TemplateId::NodeLitReview => "nodeLitReview",
        }
    }

    pub fn body(self) -> &'static str {
        match self {
            TemplateId::System => include_str!("../../assets/templates/system.txt"),
            TemplateId::PaperProcessing => include_str!("../../assets/templates/paperProcessing.txt"),
            TemplateId::NodeSuggestion => include_str!("../../assets/templates/nodeSuggestion.txt"),
            TemplateId::NodeGeneration => include_str!("../../assets/templates/nodeGeneration.txt"),
            TemplateId::EdgeGeneration => include_str!("../../assets/templates/edgeGeneration.txt"),
            TemplateId::BriefGeneration => include_str!("../../assets/templates/briefGeneration.txt"),
            TemplateId::QaResponse => include_str!("../../assets/templates/qaResponse.txt"),
            TemplateId::LitReviewSummary => include_str!("../../assets/templates/litReviewSummary.txt"),
            TemplateId::LitReviewAnalysis => include_str!("../../assets/templates/litReviewAnalysis.txt"),
            TemplateId::NodeLitReview => include_str!("../../assets/templates/nodeLitReview.txt"),
        }
    }

    /// Slot names in order of first appearance.
    pub fn slots(self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for piece in pieces(self.body()) {
            if let Piece::Slot(name) = piece {
                if !out.contains(&name) {
                    out.push(name);
                }
            }
        }
        out
    }

    /// Response schema; the system prompt has none.
    pub fn schema(self) -> Option<&'static ResponseSchema> {
        schema::catalog(self)
    }

    /// Paper summarization runs on the cheaper tier; everything else on main.
    pub fn tier(self) -> ModelTier {
        match self {
            TemplateId::PaperProcessing => ModelTier::Summarizer,
            _ => ModelTier::Main,
        }
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Values for template slots.
///
/// `papers_data` and `paper_summaries` both take the papers block;
/// `research_ideas` takes the ideas block; every other slot is looked up in
/// `extra`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContextBundle {
    pub papers_block: Option<String>,
    pub ideas_block: Option<String>,
    pub extra: BTreeMap<String, String>,
}

impl ContextBundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn papers(mut self, block: impl Into<String>) -> Self {
        self.papers_block = Some(block.into());
        self
    }

    pub fn ideas(mut self, block: impl Into<String>) -> Self {
        self.ideas_block = Some(block.into());
        self
    }

    pub fn with(mut self, slot: &str, value: impl Into<String>) -> Self {
        self.extra.insert(slot.to_string(), value.into());
        self
    }

    fn lookup(&self, slot: &str) -> Option<&str> {
        match slot {
            "papers_data" | "paper_summaries" => self.papers_block.as_deref(),
            "research_ideas" => self.ideas_block.as_deref(),
            other => self.extra.get(other).map(String::as_str),
        }
    }
}

enum Piece<'a> {
    Text(&'a str),
    Slot(&'a str),
}

/// Splits a template into literal runs and `{slot}` references.
///
/// `{{` and `}}` are escaped braces. A brace that does not open a
/// `{identifier}` slot is literal text, so the raw JSON examples inside the
/// templates survive untouched.
fn pieces(body: &str) -> Vec<Piece<'_>> {
    let bytes = body.as_bytes();
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'{' | b'}' if bytes.get(i + 1) == Some(&bytes[i]) => {
                if start < i {
                    out.push(Piece::Text(&body[start..i]));
                }
                out.push(Piece::Text(&body[i..i + 1]));
                i += 2;
                start = i;
            }
            b'{' => {
                let name_len = bytes[i + 1..]
                    .iter()
                    .take_while(|b| b.is_ascii_alphanumeric() || **b == b'_')
                    .count();
                let close = i + 1 + name_len;
                let starts_ident = bytes.get(i + 1).is_some_and(|b| b.is_ascii_alphabetic() || *b == b'_');
                if starts_ident && bytes.get(close) == Some(&b'}') {
                    if start < i {
                        out.push(Piece::Text(&body[start..i]));
                    }
                    out.push(Piece::Slot(&body[i + 1..close]));
                    i = close + 1;
                    start = i;
                } else {
                    i += 1;
                }
            }
            _ => i += 1,
        }
    }
    if start < bytes.len() {
        out.push(Piece::Text(&body[start..]));
    }
    out
}

/// Substitutes every slot; fails on the first unbound one.
pub fn render_prompt(template: TemplateId, bundle: &ContextBundle) -> Result<String> {
    let mut out = String::with_capacity(template.body().len() + 1024);
    for piece in pieces(template.body()) {
        match piece {
            Piece::Text(t) => out.push_str(t),
            Piece::Slot(name) => {
                let value = bundle.lookup(name).ok_or_else(|| Error::MissingSlot(name.to_string()))?;
                out.push_str(value);
            }
        }
    }
    Ok(out)
}
