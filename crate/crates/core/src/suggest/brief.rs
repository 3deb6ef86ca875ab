use super::{dangling_in, papers_block};
use crate::error::{Error, Result};
use crate::gateway::ask_json;
use crate::graph::{LiteratureReference, Project, ResearchBrief};
use crate::prompt::{format_ideas_context, ContextBundle, TemplateId};
use crate::Studio;
use regex::Regex;
use serde_json::json;
use std::collections::BTreeSet;
use std::sync::OnceLock;

/// Numeric in-text citations such as `[1]` or `[1, 3, 5]`, in order of
/// appearance. Bracketed citation tags (`@ref[123]`) are not counted.
pub fn bracket_citations(text: &str) -> Vec<u32> {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    let re = PATTERN.get_or_init(|| Regex::new(r"(@ref)?\[(\s*\d+\s*(?:,\s*\d+\s*)*)\]").expect("valid pattern"));
    re.captures_iter(text)
        .filter(|c| c.get(1).is_none())
        .flat_map(|c| {
            c[2].split(',')
                .filter_map(|n| n.trim().parse::<u32>().ok())
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Lowercase alphanumeric words joined by single spaces.
pub fn normalize_title(title: &str) -> String {
    title
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Finds the collected paper a reference title names: case-insensitive
/// exact match first, then match after stripping punctuation.
pub fn resolve_reference_title(title: &str, project: &Project) -> Option<String> {
    let wanted = title.trim().to_lowercase();
    let papers = project.collection();
    if let Some(p) = papers.iter().find(|p| p.title.trim().to_lowercase() == wanted) {
        return Some(p.corpus_id.clone());
    }
    let wanted = normalize_title(title);
    if wanted.is_empty() {
        return None;
    }
    papers
        .iter()
        .find(|p| normalize_title(&p.title) == wanted)
        .map(|p| p.corpus_id.clone())
}

impl Studio {
    /// Drafts a research brief from the selected nodes and stores it as a
    /// new brief tab.
    ///
    /// Reference titles that match no collected paper are kept without a
    /// corpus id; in-text indices with no reference entry are recorded in
    /// `unmatchedCitations`. Both are logged.
    pub fn generate_research_brief<S: AsRef<str>>(&self, project_id: &str, node_ids: &[S]) -> Result<ResearchBrief> {
        let snapshot = self.project(project_id)?;
        let selection = snapshot.select_brief_subgraph(node_ids)?;
        let nodes: Vec<_> = selection.nodes().cloned().collect();
        let bundle = ContextBundle::new()
            .ideas(format_ideas_context(&nodes, &selection.edges))
            .papers(papers_block(&snapshot));
        let reply = self.with_session(project_id, |s| {
            ask_json(self.gateway(), s, TemplateId::BriefGeneration, &bundle)?.require_in_range()
        })?;

        let body = &reply.value["researchBrief"];
        let section = |key: &str| body[key].as_str().unwrap_or_default().to_string();
        let mut references: Vec<LiteratureReference> = Vec::new();
        let mut unresolved = Vec::new();
        let mut duplicates = Vec::new();
        for item in reply.value["literatureReferences"].as_array().into_iter().flatten() {
            let (Some(id), Some(title)) = (item["citation_id"].as_u64(), item["paper_title"].as_str()) else {
                continue;
            };
            let Ok(citation_id) = u32::try_from(id) else { continue };
            if references.iter().any(|r| r.citation_id == citation_id) {
                duplicates.push(citation_id);
                continue;
            }
            let corpus_id = resolve_reference_title(title, &snapshot);
            if corpus_id.is_none() {
                unresolved.push(Error::UnresolvedReference(title.to_string()).to_string());
            }
            references.push(LiteratureReference {
                citation_id,
                corpus_id,
                paper_title: title.to_string(),
            });
        }

        let mut brief = ResearchBrief {
            id: String::new(),
            title: section("title"),
            problem_description: section("problemDescription"),
            proposed_design: section("proposedDesign"),
            evaluation_method: section("evaluationMethod"),
            contribution_impact: section("contributionImpact"),
            literature_references: references,
            source_node_ids: nodes.iter().map(|n| n.id.clone()).collect(),
            source_edge_ids: selection.edges.iter().map(|e| e.id.clone()).collect(),
            detached_node_ids: Vec::new(),
            detached_edge_ids: Vec::new(),
            unmatched_citations: Vec::new(),
        };
        let known: BTreeSet<u32> = brief.literature_references.iter().map(|r| r.citation_id).collect();
        let unmatched: BTreeSet<u32> = brief
            .sections()
            .iter()
            .flat_map(|s| bracket_citations(s))
            .filter(|i| !known.contains(i))
            .collect();
        brief.unmatched_citations = unmatched.into_iter().collect();

        self.commit_generation(project_id, snapshot.revision, |p, stale| {
            brief.id = self.runtime().next_id();
            // sources deleted while the model was running
            let (live, gone): (Vec<String>, Vec<String>) =
                brief.source_node_ids.drain(..).partition(|id| p.node(id).is_some());
            brief.source_node_ids = live;
            brief.detached_node_ids = gone;
            let (live, gone): (Vec<String>, Vec<String>) =
                brief.source_edge_ids.drain(..).partition(|id| p.edge(id).is_some());
            brief.source_edge_ids = live;
            brief.detached_edge_ids = gone;
            for r in &mut brief.literature_references {
                if r.corpus_id.as_deref().is_some_and(|id| !p.has_paper(id)) {
                    r.corpus_id = None;
                }
            }
            p.briefs.push(brief.clone());
            let dangling: Vec<String> = std::iter::once(brief.title.as_str())
                .chain(brief.sections())
                .flat_map(|s| dangling_in(s, p))
                .collect();
            self.log(
                p,
                "generate_brief",
                json!({
                    "briefId": brief.id,
                    "sourceNodeIds": brief.source_node_ids,
                    "unresolvedReferences": unresolved,
                    "unmatchedCitations": brief.unmatched_citations,
                    "duplicateCitationIds": duplicates,
                    "danglingCitations": dangling,
                    "repairs": reply.repairs_applied,
                    "contextStale": stale,
                }),
            );
            Ok(brief.clone())
        })
    }
}
