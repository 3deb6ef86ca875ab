//! Client for a Semantic Scholar compatible index.

use super::{IngestState, PaperRecord};
use crate::error::{Error, Result};
use crate::transport::{HttpRequest, HttpTransport, RetryPolicy};
use serde_json::{json, Value};
use std::sync::Arc;

pub const DEFAULT_SCHOLAR_URL: &str = "https://api.semanticscholar.org";
const FIELDS: &str = "corpusId,title,authors,year,abstract,tldr,openAccessPdf";

/// Paper search and one-hop recommendations.
pub trait ScholarIndex: Send + Sync {
    /// Results in provider relevance order.
    fn search(&self, query: &str, limit: usize) -> Result<Vec<PaperRecord>>;
    /// Papers related to the positive examples.
    fn recommend(&self, positive_corpus_ids: &[String], limit: usize) -> Result<Vec<PaperRecord>>;
}

pub struct SemanticScholarClient {
    base_url: String,
    api_key: Option<String>,
    transport: Arc<dyn HttpTransport>,
    retry: RetryPolicy,
}

impl SemanticScholarClient {
    pub fn new(base_url: impl Into<String>, api_key: Option<String>, transport: Arc<dyn HttpTransport>) -> Self {
        Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key,
            transport,
            retry: RetryPolicy::default(),
        }
    }

    /// `SCHOLAR_API_KEY` and optional `SCHOLAR_BASE_URL`.
    pub fn from_env(transport: Arc<dyn HttpTransport>) -> Self {
        let base = std::env::var("SCHOLAR_BASE_URL").unwrap_or_else(|_| DEFAULT_SCHOLAR_URL.into());
        let key = std::env::var("SCHOLAR_API_KEY").ok().filter(|k| !k.trim().is_empty());
        Self::new(base, key, transport)
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    fn send(&self, mut request: HttpRequest) -> Result<Value> {
        if let Some(key) = &self.api_key {
            request = request.header("x-api-key", key.clone());
        }
        let response = self.retry.execute(self.transport.as_ref(), &request)?;
        serde_json::from_slice(&response.body)
            .map_err(|e| Error::ProviderUnavailable(format!("index returned invalid JSON: {e}")))
    }

    fn url(&self, path: &str, params: &[(&str, String)]) -> Result<String> {
        reqwest::Url::parse_with_params(&format!("{}{path}", self.base_url), params)
            .map(String::from)
            .map_err(|e| Error::InvalidRequest(format!("bad index URL: {e}")))
    }
}

impl ScholarIndex for SemanticScholarClient {
    fn search(&self, query: &str, limit: usize) -> Result<Vec<PaperRecord>> {
        let url = self.url(
            "/graph/v1/paper/search",
            &[
                ("query", query.to_string()),
                ("limit", limit.to_string()),
                ("fields", FIELDS.to_string()),
            ],
        )?;
        let body = self.send(HttpRequest::get(url))?;
        Ok(records(&body["data"]))
    }

    fn recommend(&self, positive_corpus_ids: &[String], limit: usize) -> Result<Vec<PaperRecord>> {
        let url = self.url(
            "/recommendations/v1/papers",
            &[("limit", limit.to_string()), ("fields", FIELDS.to_string())],
        )?;
        let ids: Vec<String> = positive_corpus_ids.iter().map(|id| format!("CorpusId:{id}")).collect();
        let body = self.send(HttpRequest::post_json(
            url,
            &json!({ "positivePaperIds": ids, "negativePaperIds": [] }),
        ))?;
        Ok(records(&body["recommendedPapers"]))
    }
}

fn records(list: &Value) -> Vec<PaperRecord> {
    list.as_array()
        .map(|items| items.iter().filter_map(record_from_json).collect())
        .unwrap_or_default()
}

/// Copies provider fields verbatim. Entries without a corpus id or title
/// are skipped rather than completed.
pub fn record_from_json(item: &Value) -> Option<PaperRecord> {
    let corpus_id = match &item["corpusId"] {
        Value::Number(n) => n.to_string(),
        Value::String(s) if !s.trim().is_empty() => s.clone(),
        _ => {
            tracing::warn!("skipping index entry without corpusId");
            return None;
        }
    };
    let Some(title) = item["title"].as_str() else {
        tracing::warn!(%corpus_id, "skipping index entry without title");
        return None;
    };
    let text = |v: &Value| v.as_str().filter(|s| !s.is_empty()).map(str::to_string);
    Some(PaperRecord {
        corpus_id,
        title: title.to_string(),
        authors: item["authors"]
            .as_array()
            .map(|a| a.iter().filter_map(|x| x["name"].as_str()).map(str::to_string).collect())
            .unwrap_or_default(),
        year: item["year"].as_i64().and_then(|y| i32::try_from(y).ok()),
        r#abstract: text(&item["abstract"]),
        tldr: text(&item["tldr"]["text"]),
        open_access_pdf_url: text(&item["openAccessPdf"]["url"]),
        ingest_state: IngestState::MetadataOnly,
        facet_summaries: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::{HttpResponse, TransportError};
    use parking_lot::Mutex;

    struct Canned(Mutex<Vec<HttpRequest>>, &'static str);

    impl HttpTransport for Canned {
        fn execute(&self, request: &HttpRequest) -> std::result::Result<HttpResponse, TransportError> {
            self.0.lock().push(request.clone());
            Ok(HttpResponse {
                status: 200,
                body: self.1.as_bytes().to_vec(),
            })
        }
    }

    #[test]
    fn parses_search_results_in_order() {
        let t = Arc::new(Canned(
            Mutex::new(Vec::new()),
            r#"{"total": 2, "data": [
                {"paperId": "a", "corpusId": 249921, "title": "Wordcraft", "authors": [{"name": "Andy Coenen"}],
                 "year": 2022, "abstract": null, "tldr": {"model": "v2", "text": "A story editor."},
                 "openAccessPdf": {"url": "https://arxiv.org/pdf/2107.07430", "status": "GREEN"}},
                {"corpusId": 7, "title": "Second", "authors": [], "year": null},
                {"title": "no id"}
            ]}"#,
        ));
        let client = SemanticScholarClient::new("http://index.local/", Some("key".into()), t.clone());
        let hits = client.search("AI writing assistant", 5).unwrap();
        assert_eq!(hits.len(), 2);
        assert_eq!(hits[0].corpus_id, "249921");
        assert_eq!(hits[0].tldr.as_deref(), Some("A story editor."));
        assert_eq!(hits[0].r#abstract, None);
        assert_eq!(hits[1].year, None);
        let sent = &t.0.lock()[0];
        assert!(sent.url.starts_with("http://index.local/graph/v1/paper/search?query=AI+writing+assistant&limit=5"));
        assert!(sent.headers.contains(&("x-api-key".to_string(), "key".to_string())));
    }

    #[test]
    fn recommendation_request_shape() {
        let t = Arc::new(Canned(Mutex::new(Vec::new()), r#"{"recommendedPapers": []}"#));
        let client = SemanticScholarClient::new("http://index.local", None, t.clone());
        assert!(client.recommend(&["42".into()], 10).unwrap().is_empty());
        let sent = &t.0.lock()[0];
        assert_eq!(sent.method, "POST");
        let body: Value = serde_json::from_slice(sent.body.as_deref().unwrap()).unwrap();
        assert_eq!(body["positivePaperIds"], json!(["CorpusId:42"]));
    }
}
