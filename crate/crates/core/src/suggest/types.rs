use crate::graph::FacetType;
use serde::{Deserialize, Serialize};

/// What a node suggestion proposes to do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SuggestionAction {
    #[serde(rename = "Regenerate Current Idea Facet")]
    RegenerateCurrentIdeaFacet,
    #[serde(rename = "Generate Alternatives")]
    GenerateAlternatives,
    #[serde(rename = "Generate New Idea Facets")]
    GenerateNewIdeaFacets,
}

impl SuggestionAction {
    pub const ALL: [SuggestionAction; 3] = [
        SuggestionAction::RegenerateCurrentIdeaFacet,
        SuggestionAction::GenerateAlternatives,
        SuggestionAction::GenerateNewIdeaFacets,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SuggestionAction::RegenerateCurrentIdeaFacet => "Regenerate Current Idea Facet",
            SuggestionAction::GenerateAlternatives => "Generate Alternatives",
            SuggestionAction::GenerateNewIdeaFacets => "Generate New Idea Facets",
        }
    }

    pub fn parse_label(label: &str) -> Option<SuggestionAction> {
        let key: String = label
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        match key.as_str() {
            "regeneratecurrentideafacet" | "regeneratecurrentnode" | "regenerate" => {
                Some(SuggestionAction::RegenerateCurrentIdeaFacet)
            }
            "generatealternatives" | "alternatives" => Some(SuggestionAction::GenerateAlternatives),
            "generatenewideafacets" | "generatenewideafacet" | "newfacet" => {
                Some(SuggestionAction::GenerateNewIdeaFacets)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SuggestionItem {
    pub idea_facet: FacetType,
    pub action: SuggestionAction,
    pub suggestion: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SuggestionSet {
    pub items: Vec<SuggestionItem>,
    pub generated_at_revision: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EdgeAssessment {
    pub connection_strength: f64,
    pub suggestion: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GeneratedNode {
    pub idea_facet: FacetType,
    pub title: String,
    pub content: String,
}

/// One entry of the canvas-level literature analysis panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AnalysisItem {
    pub section_title: String,
    pub paper_title: String,
    pub corpus_id: String,
    pub key_section: String,
    pub connection_to_ideas: String,
    pub next_steps: Vec<String>,
}

/// A paper section judged relevant to one node. `corpus_id` is only set
/// when the citation tag in `paper_title` resolves to a collected paper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RelevantSection {
    pub section_title: String,
    pub paper_title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_id: Option<String>,
    pub key_section: String,
    pub connection_to_ideas: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct NodeAnalysis {
    pub most_relevant_sections: Vec<RelevantSection>,
    pub suggestions: Vec<String>,
    pub generated_at_revision: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LiteratureSummary {
    pub text: String,
    pub corpus_ids: Vec<String>,
    pub generated_at_revision: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LiteratureAnalysis {
    pub items: Vec<AnalysisItem>,
    pub generated_at_revision: u64,
}
