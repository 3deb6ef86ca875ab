use super::FacetType;
use crate::library::PaperRecord;
use crate::suggest::{LiteratureAnalysis, LiteratureSummary, NodeAnalysis, SuggestionSet};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Canvas coordinate in abstract units; y grows downward.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CreatedBy {
    User,
    Generated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct IdeaNode {
    pub id: String,
    pub facet: FacetType,
    pub title: String,
    pub content: String,
    pub position: Position,
    pub created_by: CreatedBy,
    /// Revision at which facet, title or content last changed.
    pub revised_at: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suggestion_cache: Option<SuggestionSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_analysis_cache: Option<NodeAnalysis>,
}

impl IdeaNode {
    pub fn has_content(&self) -> bool {
        !self.content.trim().is_empty()
    }

    pub fn suggestions_stale(&self) -> bool {
        self.suggestion_cache
            .as_ref()
            .is_some_and(|s| s.generated_at_revision < self.revised_at)
    }

    pub fn analysis_stale(&self) -> bool {
        self.node_analysis_cache
            .as_ref()
            .is_some_and(|a| a.generated_at_revision < self.revised_at)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct IdeaEdge {
    pub id: String,
    pub source: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suggestion: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assessed_at_revision: Option<u64>,
}

impl IdeaEdge {
    pub fn touches(&self, node_id: &str) -> bool {
        self.source == node_id || self.target == node_id
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LiteratureReference {
    pub citation_id: u32,
    /// Absent when the model's title matched no collected paper.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_id: Option<String>,
    pub paper_title: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ResearchBrief {
    pub id: String,
    pub title: String,
    pub problem_description: String,
    pub proposed_design: String,
    pub evaluation_method: String,
    pub contribution_impact: String,
    pub literature_references: Vec<LiteratureReference>,
    pub source_node_ids: Vec<String>,
    pub source_edge_ids: Vec<String>,
    /// Sources deleted from the canvas after the brief was written.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub detached_node_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub detached_edge_ids: Vec<String>,
    /// In-text citation indices with no matching reference entry.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unmatched_citations: Vec<u32>,
}

impl ResearchBrief {
    pub fn sections(&self) -> [&str; 4] {
        [
            &self.problem_description,
            &self.proposed_design,
            &self.evaluation_method,
            &self.contribution_impact,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Actor {
    User,
    System,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ActionLogEntry {
    pub timestamp: DateTime<Utc>,
    pub actor: Actor,
    pub action: String,
    pub payload: serde_json::Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub text: String,
}

/// All state of one ideation project.
///
/// `paper_ids` fixes collection order; `papers` holds the records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Project {
    pub id: String,
    pub name: String,
    pub nodes: Vec<IdeaNode>,
    pub edges: Vec<IdeaEdge>,
    pub paper_ids: Vec<String>,
    pub papers: BTreeMap<String, PaperRecord>,
    pub briefs: Vec<ResearchBrief>,
    pub chat_history: Vec<ChatMessage>,
    pub action_log: Vec<ActionLogEntry>,
    pub revision: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub literature_summary: Option<LiteratureSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub literature_analysis: Option<LiteratureAnalysis>,
}
