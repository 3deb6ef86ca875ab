//! Paper collection: search, recommendation, ingestion and per-paper facet
//! summaries.

mod extract;
mod record;
mod scholar;

pub use extract::{join_sections, parse_tei, HttpPdfFetcher, PdfFetcher, Section, TeiExtractor, TextExtractor};
pub use record::{FacetSummaries, IngestState, PaperRecord};
pub use scholar::{record_from_json, ScholarIndex, SemanticScholarClient, DEFAULT_SCHOLAR_URL};

use crate::error::{Error, Result};
use crate::gateway::{ask_json, ChatSession, Gateway};
use crate::prompt::{format_papers_context, ContextBundle, TemplateId};
use serde_json::Value;
use std::collections::HashSet;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LibraryConfig {
    pub max_search_limit: usize,
    pub recommend_limit: usize,
    /// Budget for the rendered papers block, in tokens.
    pub token_budget: usize,
    pub chars_per_token: usize,
}

impl Default for LibraryConfig {
    fn default() -> Self {
        Self {
            max_search_limit: 20,
            recommend_limit: 10,
            token_budget: 100_000,
            chars_per_token: 4,
        }
    }
}

impl LibraryConfig {
    pub fn estimate_tokens(&self, text: &str) -> usize {
        text.chars().count().div_ceil(self.chars_per_token.max(1))
    }

    /// Fails if the papers block for `collection` plus `candidate` would
    /// exceed the budget.
    pub fn check_budget(&self, collection: &[&PaperRecord], candidate: &PaperRecord) -> Result<()> {
        let mut all: Vec<&PaperRecord> = collection.to_vec();
        all.push(candidate);
        let needed = self.estimate_tokens(&format_papers_context(&all));
        if needed > self.token_budget {
            return Err(Error::BudgetExceeded {
                needed,
                budget: self.token_budget,
            });
        }
        Ok(())
    }
}

/// Result of one ingestion attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestOutcome {
    pub record: PaperRecord,
    /// Why full-text ingestion fell back to abstract and TLDR.
    pub fallback_reason: Option<String>,
    /// False when the record was already ingested and nothing ran.
    pub changed: bool,
}

pub struct PaperLibrary {
    index: Arc<dyn ScholarIndex>,
    fetcher: Arc<dyn PdfFetcher>,
    extractor: Arc<dyn TextExtractor>,
    config: LibraryConfig,
}

impl std::fmt::Debug for PaperLibrary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PaperLibrary").field("config", &self.config).finish_non_exhaustive()
    }
}

impl PaperLibrary {
    pub fn new(
        index: Arc<dyn ScholarIndex>,
        fetcher: Arc<dyn PdfFetcher>,
        extractor: Arc<dyn TextExtractor>,
        config: LibraryConfig,
    ) -> Self {
        Self {
            index,
            fetcher,
            extractor,
            config,
        }
    }

    pub fn config(&self) -> &LibraryConfig {
        &self.config
    }

    pub fn search_papers(&self, query: &str, limit: usize) -> Result<Vec<PaperRecord>> {
        if query.trim().is_empty() {
            return Err(Error::EmptyQuery);
        }
        if limit == 0 || limit > self.config.max_search_limit {
            return Err(Error::InvalidRequest(format!(
                "limit must be between 1 and {}",
                self.config.max_search_limit
            )));
        }
        let mut hits = self.index.search(query.trim(), limit)?;
        hits.truncate(limit);
        Ok(hits)
    }

    /// Recommendations seeded by the collection, minus papers already in it.
    pub fn recommend_papers(&self, collection: &[&PaperRecord]) -> Result<Vec<PaperRecord>> {
        if collection.is_empty() {
            return Err(Error::EmptyCollection);
        }
        let ids: Vec<String> = collection.iter().map(|p| p.corpus_id.clone()).collect();
        let have: HashSet<&str> = ids.iter().map(String::as_str).collect();
        let mut seen = HashSet::new();
        let recs = self.index.recommend(&ids, self.config.recommend_limit)?;
        Ok(recs
            .into_iter()
            .filter(|r| !have.contains(r.corpus_id.as_str()) && seen.insert(r.corpus_id.clone()))
            .collect())
    }

    /// Fetches, extracts and summarizes an open-access PDF. Any failure on
    /// that path downgrades the record to the abstract/TLDR fallback instead
    /// of failing; only a missing replay fixture propagates.
    pub fn ingest_paper(&self, gateway: &Gateway, record: PaperRecord) -> Result<IngestOutcome> {
        if record.corpus_id.trim().is_empty() {
            return Err(Error::InvalidRequest("record has no corpusId".into()));
        }
        if record.ingest_state != IngestState::MetadataOnly {
            return Ok(IngestOutcome {
                record,
                fallback_reason: None,
                changed: false,
            });
        }
        let attempt = match &record.open_access_pdf_url {
            None => Err("no open-access PDF".to_string()),
            Some(url) => self.full_text_summaries(gateway, url),
        };
        let mut record = record;
        let fallback_reason = match attempt {
            Ok(summaries) => {
                record.ingest_state = IngestState::FullText;
                record.facet_summaries = Some(summaries);
                None
            }
            Err(reason) if reason.starts_with(FIXTURE_MISS) => {
                return Err(Error::FixtureMiss(reason[FIXTURE_MISS.len()..].to_string()));
            }
            Err(reason) => {
                tracing::info!(corpus_id = %record.corpus_id, %reason, "ingestion fell back to abstract");
                record.ingest_state = IngestState::Fallback;
                record.facet_summaries = None;
                Some(reason)
            }
        };
        Ok(IngestOutcome {
            record,
            fallback_reason,
            changed: true,
        })
    }

    fn full_text_summaries(&self, gateway: &Gateway, url: &str) -> std::result::Result<FacetSummaries, String> {
        let reason = |e: Error| match e {
            Error::FixtureMiss(d) => format!("{FIXTURE_MISS}{d}"),
            other => other.to_string(),
        };
        let pdf = self.fetcher.fetch(url).map_err(reason)?;
        let sections = self.extractor.extract(&pdf).map_err(reason)?;
        let text = join_sections(&sections);
        summarize_paper_facets(gateway, &text)
            .map_err(reason)?
            .ok_or_else(|| "summarizer found no answer in the text".to_string())
    }
}

const FIXTURE_MISS: &str = "fixture miss: ";

/// Runs the paper-processing prompt on the summarizer tier in a fresh
/// session. `None` means the model gave the no-answer sentinel.
pub fn summarize_paper_facets(gateway: &Gateway, full_text: &str) -> Result<Option<FacetSummaries>> {
    if full_text.trim().is_empty() {
        return Err(Error::EmptyText);
    }
    let mut session = ChatSession::new("paper-processing");
    let bundle = ContextBundle::new().with("full_text", full_text);
    let reply = ask_json(gateway, &mut session, TemplateId::PaperProcessing, &bundle)?;
    let value = &reply.value;
    if value.get("No answer").is_some() {
        return Ok(None);
    }
    let field = |i: usize| value[FacetSummaries::LABELS[i]].as_str().map(str::to_string);
    match (field(0), field(1), field(2), field(3), field(4)) {
        (Some(a), Some(b), Some(c), Some(d), Some(e)) => Ok(Some(FacetSummaries {
            problem_description_and_rq: a,
            proposed_design_and_solution: b,
            evaluation_method: c,
            contribution_and_impact: d,
            limitation_and_future_work: e,
        })),
        _ => Err(Error::MalformedResponse(format!(
            "paper summary lacks facet keys: {}",
            Value::Object(value.as_object().cloned().unwrap_or_default())
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{ChatProvider, ChatRequest};
    use parking_lot::Mutex;

    struct Queue(Mutex<Vec<String>>);

    impl ChatProvider for Queue {
        fn chat(&self, _: &ChatRequest) -> Result<String> {
            Ok(self.0.lock().remove(0))
        }
    }

    fn gw(replies: &[&str]) -> Gateway {
        Gateway::live(Arc::new(Queue(Mutex::new(replies.iter().map(|s| s.to_string()).collect()))))
    }

    const FIVE: &str = r#"{"Problem Description and RQ": "p", "Proposed Design and Solution": "d",
        "Evaluation Method": "e", "Contribution and Impact": "c", "Limitation and Future Work": "l"}"#;

    #[test]
    fn five_keys_map_to_summaries() {
        let s = summarize_paper_facets(&gw(&[FIVE]), "body").unwrap().unwrap();
        assert_eq!(s.evaluation_method, "e");
        assert_eq!(s.limitation_and_future_work, "l");
    }

    #[test]
    fn sentinel_means_absent() {
        assert_eq!(summarize_paper_facets(&gw(&[r#"{"No answer": ""}"#]), "body").unwrap(), None);
    }

    #[test]
    fn four_keys_is_malformed_after_reask() {
        let four = r#"{"Problem Description and RQ": "p", "Proposed Design and Solution": "d",
            "Evaluation Method": "e", "Contribution and Impact": "c"}"#;
        let g = gw(&[four, four]);
        let err = summarize_paper_facets(&g, "body").unwrap_err();
        assert_eq!(err.code(), "MalformedResponse");
        assert_eq!(g.call_count(), 2);
    }

    #[test]
    fn empty_text() {
        assert_eq!(summarize_paper_facets(&gw(&[]), " \n").unwrap_err(), Error::EmptyText);
    }

    #[test]
    fn budget_guard() {
        let config = LibraryConfig {
            token_budget: 10,
            ..LibraryConfig::default()
        };
        let small = PaperRecord::metadata("1", "T");
        config.check_budget(&[], &small).unwrap();
        let mut big = PaperRecord::metadata("2", "Big");
        big.r#abstract = Some("x".repeat(100));
        assert!(matches!(
            config.check_budget(&[&small], &big),
            Err(Error::BudgetExceeded { budget: 10, .. })
        ));
    }
}
