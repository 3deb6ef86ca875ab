//! Inline `@ref[corpusId]` citation tags in generated text.

use crate::graph::Project;
use serde::Serialize;
use std::ops::Range;

pub const TAG_OPEN: &str = "@ref[";
pub const TAG_CLOSE: char = ']';

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Segment {
    Text { text: String },
    Citation {
        #[serde(rename = "corpusId")]
        corpus_id: String,
        /// Byte range of the whole tag in the source text.
        span: Range<usize>,
    },
}

impl Segment {
    /// The exact source text this segment covers.
    pub fn surface(&self) -> String {
        match self {
            Segment::Text { text } => text.clone(),
            Segment::Citation { corpus_id, .. } => format!("{TAG_OPEN}{corpus_id}{TAG_CLOSE}"),
        }
    }
}

/// Splits text into plain runs and well-formed tags.
///
/// Total: malformed near-tags (`@ref[]`, an unclosed `@ref[`, a token with
/// a nested bracket) stay in the surrounding text, and concatenating the
/// segment surfaces gives back the input.
pub fn parse_citation_tags(text: &str) -> Vec<Segment> {
    let mut segments = Vec::new();
    let mut text_start = 0;
    let mut search = 0;
    while let Some(rel) = text[search..].find(TAG_OPEN) {
        let tag_start = search + rel;
        let token_start = tag_start + TAG_OPEN.len();
        let token_len = text[token_start..].find(['[', ']']);
        match token_len {
            Some(len) if len > 0 && text[token_start + len..].starts_with(TAG_CLOSE) => {
                if text_start < tag_start {
                    segments.push(Segment::Text {
                        text: text[text_start..tag_start].to_string(),
                    });
                }
                let end = token_start + len + 1;
                segments.push(Segment::Citation {
                    corpus_id: text[token_start..token_start + len].to_string(),
                    span: tag_start..end,
                });
                text_start = end;
                search = end;
            }
            _ => search = tag_start + 1,
        }
    }
    if text_start < text.len() {
        segments.push(Segment::Text {
            text: text[text_start..].to_string(),
        });
    }
    segments
}

/// Corpus ids of every well-formed tag, in order of appearance.
pub fn cited_ids(text: &str) -> Vec<String> {
    parse_citation_tags(text)
        .into_iter()
        .filter_map(|s| match s {
            Segment::Citation { corpus_id, .. } => Some(corpus_id),
            Segment::Text { .. } => None,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum AnnotatedSegment {
    Text { text: String },
    Resolved {
        #[serde(rename = "corpusId")]
        corpus_id: String,
        span: Range<usize>,
        title: String,
    },
    Dangling {
        #[serde(rename = "corpusId")]
        corpus_id: String,
        span: Range<usize>,
    },
}

impl AnnotatedSegment {
    pub fn is_dangling(&self) -> bool {
        matches!(self, AnnotatedSegment::Dangling { .. })
    }
}

/// Marks each citation as resolved against the collection or dangling.
pub fn resolve_citations(segments: Vec<Segment>, project: &Project) -> Vec<AnnotatedSegment> {
    segments
        .into_iter()
        .map(|segment| match segment {
            Segment::Text { text } => AnnotatedSegment::Text { text },
            Segment::Citation { corpus_id, span } => match project.papers.get(&corpus_id) {
                Some(paper) => AnnotatedSegment::Resolved {
                    title: paper.title.clone(),
                    corpus_id,
                    span,
                },
                None => AnnotatedSegment::Dangling { corpus_id, span },
            },
        })
        .collect()
}

/// Text with its citation annotations; what the UI renders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CitedText {
    pub text: String,
    pub segments: Vec<AnnotatedSegment>,
    pub dangling: Vec<String>,
}

impl CitedText {
    pub fn new(text: impl Into<String>, project: &Project) -> Self {
        let text = text.into();
        let segments = resolve_citations(parse_citation_tags(&text), project);
        let dangling = segments
            .iter()
            .filter_map(|s| match s {
                AnnotatedSegment::Dangling { corpus_id, .. } => Some(corpus_id.clone()),
                _ => None,
            })
            .collect();
        Self { text, segments, dangling }
    }
}
