use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum IngestState {
    MetadataOnly,
    FullText,
    Fallback,
}

/// Five per-paper paragraphs produced from the extracted body text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FacetSummaries {
    #[serde(rename = "problemDescriptionAndRQ")]
    pub problem_description_and_rq: String,
    pub proposed_design_and_solution: String,
    pub evaluation_method: String,
    pub contribution_and_impact: String,
    pub limitation_and_future_work: String,
}

impl FacetSummaries {
    /// Labels as the summarization prompt names them, in prompt order.
    pub const LABELS: [&'static str; 5] = [
        "Problem Description and RQ",
        "Proposed Design and Solution",
        "Evaluation Method",
        "Contribution and Impact",
        "Limitation and Future Work",
    ];

    pub fn paragraphs(&self) -> [(&'static str, &str); 5] {
        [
            (Self::LABELS[0], &self.problem_description_and_rq),
            (Self::LABELS[1], &self.proposed_design_and_solution),
            (Self::LABELS[2], &self.evaluation_method),
            (Self::LABELS[3], &self.contribution_and_impact),
            (Self::LABELS[4], &self.limitation_and_future_work),
        ]
    }
}

/// One collected paper. Metadata fields are copied from the scholarly index
/// and never filled in locally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PaperRecord {
    pub corpus_id: String,
    pub title: String,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r#abstract: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tldr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub open_access_pdf_url: Option<String>,
    pub ingest_state: IngestState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facet_summaries: Option<FacetSummaries>,
}

impl PaperRecord {
    pub fn metadata(corpus_id: impl Into<String>, title: impl Into<String>) -> Self {
        Self {
            corpus_id: corpus_id.into(),
            title: title.into(),
            authors: Vec::new(),
            year: None,
            r#abstract: None,
            tldr: None,
            open_access_pdf_url: None,
            ingest_state: IngestState::MetadataOnly,
            facet_summaries: None,
        }
    }

    /// Checks the state/summaries pairing.
    pub fn check(&self) -> Result<(), String> {
        if self.corpus_id.trim().is_empty() {
            return Err("paper without corpusId".into());
        }
        match (self.ingest_state, &self.facet_summaries) {
            (IngestState::FullText, None) => {
                Err(format!("paper {} is fullText without summaries", self.corpus_id))
            }
            (IngestState::FullText, Some(s)) if s.paragraphs().iter().any(|(_, p)| p.trim().is_empty()) => {
                Err(format!("paper {} has an empty facet summary", self.corpus_id))
            }
            (IngestState::Fallback | IngestState::MetadataOnly, Some(_)) => Err(format!(
                "paper {} carries summaries without full text",
                self.corpus_id
            )),
            _ => Ok(()),
        }
    }

    /// `Lastname et al.` / `Lastname` style label used in rendered context.
    pub fn author_line(&self) -> String {
        let names = self.authors.join(", ");
        match (names.is_empty(), self.year) {
            (false, Some(y)) => format!("{names} ({y})"),
            (false, None) => names,
            (true, Some(y)) => format!("({y})"),
            (true, None) => String::new(),
        }
    }
}
