//! Plain-text renderings of papers and ideas for prompt slots.

use crate::graph::{IdeaEdge, IdeaNode};
use crate::library::{IngestState, PaperRecord};
use std::fmt::Write;

/// One entry per paper in the given order: id, title, authors and year,
/// then the facet summaries for full-text papers or TLDR and abstract
/// otherwise. Empty input renders as an empty string.
pub fn format_papers_context(papers: &[&PaperRecord]) -> String {
    let mut out = String::new();
    for (i, paper) in papers.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format_paper(paper));
    }
    out
}

pub fn format_paper(paper: &PaperRecord) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[corpusId: {}] {}", paper.corpus_id, paper.title);
    let authors = paper.author_line();
    if !authors.is_empty() {
        let _ = writeln!(out, "Authors: {authors}");
    }
    match (&paper.ingest_state, &paper.facet_summaries) {
        (IngestState::FullText, Some(summaries)) => {
            for (label, text) in summaries.paragraphs() {
                let _ = writeln!(out, "{label}: {text}");
            }
        }
        _ => {
            if let Some(tldr) = &paper.tldr {
                let _ = writeln!(out, "TLDR: {tldr}");
            }
            if let Some(abs) = &paper.r#abstract {
                let _ = writeln!(out, "Abstract: {abs}");
            }
        }
    }
    out
}

/// The facet, title and content of one node.
pub fn format_node(node: &IdeaNode) -> String {
    format!(
        "Idea Facet: {}\nTitle: {}\nContent: {}",
        node.facet.label(),
        node.title,
        node.content
    )
}

/// Nodes numbered in the given order, then one line per edge whose
/// endpoints are both among the nodes.
pub fn format_ideas_context(nodes: &[IdeaNode], edges: &[IdeaEdge]) -> String {
    if nodes.is_empty() {
        return "No idea facet nodes yet.\n".to_string();
    }
    let mut out = String::new();
    for (i, node) in nodes.iter().enumerate() {
        let _ = writeln!(out, "Node {} ({}): {}", i + 1, node.facet.label(), node.title);
        let _ = writeln!(out, "Content: {}", node.content);
        out.push('\n');
    }
    let index = |id: &str| nodes.iter().position(|n| n.id == id);
    let lines: Vec<String> = edges
        .iter()
        .filter_map(|e| Some((e, index(&e.source)?, index(&e.target)?)))
        .map(|(e, s, t)| {
            let strength = e
                .strength
                .map(|v| format!("{v:.2}"))
                .unwrap_or_else(|| "not assessed".to_string());
            let mut line = format!(
                "- Node {} \"{}\" -> Node {} \"{}\" | strength: {strength}",
                s + 1,
                nodes[s].title,
                t + 1,
                nodes[t].title
            );
            if let Some(sugg) = &e.suggestion {
                let _ = write!(line, " | suggestion: {sugg}");
            }
            line
        })
        .collect();
    if lines.is_empty() {
        out.push_str("Connections: none\n");
    } else {
        out.push_str("Connections:\n");
        for line in lines {
            out.push_str(&line);
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{CreatedBy, FacetType, Position};
    use crate::library::FacetSummaries;

    fn node(id: &str, title: &str) -> IdeaNode {
        IdeaNode {
            id: id.into(),
            facet: FacetType::ProblemDescriptionAndRQ,
            title: title.into(),
            content: format!("{title} body"),
            position: Position::default(),
            created_by: CreatedBy::User,
            revised_at: 1,
            suggestion_cache: None,
            node_analysis_cache: None,
        }
    }

    fn edge(id: &str, s: &str, t: &str, strength: Option<f64>) -> IdeaEdge {
        IdeaEdge {
            id: id.into(),
            source: s.into(),
            target: t.into(),
            strength,
            suggestion: strength.map(|_| "tighten it".into()),
            assessed_at_revision: None,
        }
    }

    #[test]
    fn empty_collection_renders_empty() {
        assert_eq!(format_papers_context(&[]), "");
    }

    #[test]
    fn fallback_shows_abstract_not_summaries() {
        let mut full = PaperRecord::metadata("11", "Full Paper");
        full.authors = vec!["Ada Lovelace".into()];
        full.year = Some(2021);
        full.tldr = Some("full tldr".into());
        full.ingest_state = IngestState::FullText;
        full.facet_summaries = Some(FacetSummaries {
            problem_description_and_rq: "P".into(),
            proposed_design_and_solution: "D".into(),
            evaluation_method: "E".into(),
            contribution_and_impact: "C".into(),
            limitation_and_future_work: "L".into(),
        });
        let mut fb = PaperRecord::metadata("22", "Fallback Paper");
        fb.r#abstract = Some("the abstract".into());
        fb.tldr = Some("the tldr".into());
        fb.ingest_state = IngestState::Fallback;
        let text = format_papers_context(&[&full, &fb]);
        let (first, second) = text.split_at(text.find("[corpusId: 22]").unwrap());
        assert!(first.contains("Evaluation Method: E"));
        assert!(first.contains("Ada Lovelace (2021)"));
        assert!(!first.contains("full tldr"));
        assert!(second.contains("TLDR: the tldr") && second.contains("Abstract: the abstract"));
        assert!(!second.contains("Evaluation Method:"));
    }

    #[test]
    fn ideas_block_counts() {
        let nodes = vec![node("a", "A"), node("b", "B"), node("c", "C")];
        let edges = vec![
            edge("e1", "a", "b", Some(0.8)),
            edge("e2", "b", "c", None),
            edge("e3", "c", "zzz", None),
        ];
        let text = format_ideas_context(&nodes, &edges);
        assert_eq!(text.matches("\nContent: ").count() + usize::from(text.starts_with("Content: ")), 3);
        assert_eq!(text.lines().filter(|l| l.starts_with("- Node")).count(), 2);
        assert!(text.contains("strength: 0.80 | suggestion: tighten it"));
        assert!(text.contains("strength: not assessed"));
        assert_eq!(text, format_ideas_context(&nodes, &edges));
    }
}
