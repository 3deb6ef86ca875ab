//! PDF download and body-text extraction.

use crate::error::{Error, Result};
use crate::transport::{HttpRequest, HttpTransport, RetryPolicy};
use std::sync::Arc;

/// One section of extracted body text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub heading: String,
    pub text: String,
}

pub trait PdfFetcher: Send + Sync {
    fn fetch(&self, url: &str) -> Result<Vec<u8>>;
}

/// Takes PDF bytes and returns ordered sections.
pub trait TextExtractor: Send + Sync {
    fn extract(&self, pdf: &[u8]) -> Result<Vec<Section>>;
}

/// Joins sections into the text handed to the summarization prompt.
pub fn join_sections(sections: &[Section]) -> String {
    sections
        .iter()
        .map(|s| {
            if s.heading.is_empty() {
                s.text.clone()
            } else {
                format!("{}\n{}", s.heading, s.text)
            }
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}

pub struct HttpPdfFetcher {
    transport: Arc<dyn HttpTransport>,
    retry: RetryPolicy,
}

impl HttpPdfFetcher {
    pub fn new(transport: Arc<dyn HttpTransport>) -> Self {
        Self {
            transport,
            retry: RetryPolicy::default(),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }
}

impl PdfFetcher for HttpPdfFetcher {
    fn fetch(&self, url: &str) -> Result<Vec<u8>> {
        let response = self.retry.execute(self.transport.as_ref(), &HttpRequest::get(url))?;
        if !response.body.starts_with(b"%PDF") {
            return Err(Error::ExtractionFailed(format!("{url} did not return a PDF")));
        }
        Ok(response.body)
    }
}

/// Client for a service that turns PDFs into TEI XML, such as GROBID's
/// `processFulltextDocument` endpoint.
pub struct TeiExtractor {
    base_url: String,
    transport: Arc<dyn HttpTransport>,
    retry: RetryPolicy,
}

const BOUNDARY: &str = "ideaweave-multipart-boundary";

impl TeiExtractor {
    pub fn new(base_url: impl Into<String>, transport: Arc<dyn HttpTransport>) -> Self {
        Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            transport,
            retry: RetryPolicy::default(),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    fn multipart(pdf: &[u8]) -> Vec<u8> {
        let mut body = Vec::with_capacity(pdf.len() + 256);
        body.extend_from_slice(
            format!(
                "--{BOUNDARY}\r\nContent-Disposition: form-data; name=\"input\"; filename=\"paper.pdf\"\r\nContent-Type: application/pdf\r\n\r\n"
            )
            .as_bytes(),
        );
        body.extend_from_slice(pdf);
        body.extend_from_slice(format!("\r\n--{BOUNDARY}--\r\n").as_bytes());
        body
    }
}

impl TextExtractor for TeiExtractor {
    fn extract(&self, pdf: &[u8]) -> Result<Vec<Section>> {
        let request = HttpRequest::post(
            format!("{}/api/processFulltextDocument", self.base_url),
            &format!("multipart/form-data; boundary={BOUNDARY}"),
            Self::multipart(pdf),
        );
        let response = self.retry.execute(self.transport.as_ref(), &request)?;
        parse_tei(&response.text())
    }
}

/// Abstract plus body divisions of a TEI document, in document order.
pub fn parse_tei(xml: &str) -> Result<Vec<Section>> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| Error::ExtractionFailed(format!("TEI: {e}")))?;
    let mut sections = Vec::new();
    let paragraphs = |node: roxmltree::Node| -> String {
        node.descendants()
            .filter(|n| n.has_tag_name_local("p"))
            .map(|p| normalize_ws(&p.descendants().filter(|t| t.is_text()).filter_map(|t| t.text()).collect::<String>()))
            .filter(|p| !p.is_empty())
            .collect::<Vec<_>>()
            .join("\n")
    };
    if let Some(abs) = doc.descendants().find(|n| n.has_tag_name_local("abstract")) {
        let text = paragraphs(abs);
        if !text.is_empty() {
            sections.push(Section {
                heading: "Abstract".into(),
                text,
            });
        }
    }
    if let Some(body) = doc.descendants().find(|n| n.has_tag_name_local("body")) {
        for div in body.children().filter(|n| n.has_tag_name_local("div")) {
            let heading = div
                .children()
                .find(|n| n.has_tag_name_local("head"))
                .map(|h| normalize_ws(&h.descendants().filter(|t| t.is_text()).filter_map(|t| t.text()).collect::<String>()))
                .unwrap_or_default();
            let text = paragraphs(div);
            if !text.is_empty() {
                sections.push(Section { heading, text });
            }
        }
    }
    if sections.is_empty() {
        return Err(Error::ExtractionFailed("TEI document has no body text".into()));
    }
    Ok(sections)
}

trait LocalName {
    fn has_tag_name_local(&self, name: &str) -> bool;
}

impl LocalName for roxmltree::Node<'_, '_> {
    fn has_tag_name_local(&self, name: &str) -> bool {
        self.is_element() && self.tag_name().name() == name
    }
}

fn normalize_ws(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}
