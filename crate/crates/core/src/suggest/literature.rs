use super::{
    clamp, dangling_in, papers_block, text_field, AnalysisItem, LiteratureAnalysis, LiteratureSummary, NodeAnalysis,
    RelevantSection, MAX_NODE_SUGGESTIONS, MAX_RELEVANT_SECTIONS,
};
use crate::error::{Error, Result};
use crate::gateway::ask_json;
use crate::graph::Project;
use crate::prompt::{cited_ids, format_ideas_context, CitedText, ContextBundle, TemplateId};
use crate::Studio;
use serde::Serialize;
use serde_json::json;

/// A stored summary together with its citation annotations.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LiteratureSummaryView {
    pub summary: LiteratureSummary,
    pub cited: CitedText,
}

fn ideas_block(project: &Project) -> String {
    format_ideas_context(&project.nodes, &project.edges)
}

fn require_collection(project: &Project) -> Result<()> {
    if project.paper_ids.is_empty() {
        return Err(Error::EmptyCollection);
    }
    Ok(())
}

impl Studio {
    /// One-paragraph review of the whole collection, cached on the project.
    /// Listed corpus ids outside the collection are dropped and logged;
    /// dangling tags in the text are kept and flagged.
    pub fn literature_summary(&self, project_id: &str) -> Result<LiteratureSummaryView> {
        let snapshot = self.project(project_id)?;
        require_collection(&snapshot)?;
        let bundle = ContextBundle::new()
            .papers(papers_block(&snapshot))
            .with("corpusIds", snapshot.paper_ids.join(", "));
        let reply = self.with_session(project_id, |s| {
            ask_json(self.gateway(), s, TemplateId::LitReviewSummary, &bundle)?.require_in_range()
        })?;
        let text = reply.value["litReviewSummary"].as_str().unwrap_or_default().to_string();
        let listed: Vec<String> = reply.value["corpusIds"]
            .as_array()
            .into_iter()
            .flatten()
            .filter_map(text_field)
            .collect();

        self.commit_generation(project_id, snapshot.revision, |p, stale| {
            let (mut kept, dropped): (Vec<String>, Vec<String>) = listed.iter().cloned().partition(|id| p.has_paper(id));
            let mut seen = std::collections::HashSet::new();
            kept.retain(|id| seen.insert(id.clone()));
            let summary = LiteratureSummary {
                text: text.clone(),
                corpus_ids: kept,
                generated_at_revision: snapshot.revision,
            };
            p.literature_summary = Some(summary.clone());
            let cited = CitedText::new(text.clone(), p);
            self.log(
                p,
                "literature_summary",
                json!({
                    "corpusIds": summary.corpus_ids,
                    "droppedCorpusIds": dropped,
                    "danglingCitations": cited.dangling,
                    "repairs": reply.repairs_applied,
                    "contextStale": stale,
                }),
            );
            Ok(LiteratureSummaryView { summary, cited })
        })
    }

    /// Canvas-level analysis panel. Items naming a paper outside the
    /// collection are rejected and logged.
    pub fn literature_analysis(&self, project_id: &str) -> Result<LiteratureAnalysis> {
        let snapshot = self.project(project_id)?;
        require_collection(&snapshot)?;
        let bundle = ContextBundle::new()
            .papers(papers_block(&snapshot))
            .ideas(ideas_block(&snapshot));
        let reply = self.with_session(project_id, |s| {
            ask_json(self.gateway(), s, TemplateId::LitReviewAnalysis, &bundle)?.require_in_range()
        })?;
        let candidates: Vec<AnalysisItem> = reply.value["analysis"]
            .as_array()
            .into_iter()
            .flatten()
            .filter_map(|item| {
                Some(AnalysisItem {
                    section_title: item["section_title"].as_str()?.to_string(),
                    paper_title: item["paper_title"].as_str()?.to_string(),
                    corpus_id: text_field(&item["corpus_id"])?.trim().to_string(),
                    key_section: item["key_section"].as_str()?.to_string(),
                    connection_to_ideas: item["connection_to_ideas"].as_str().unwrap_or_default().to_string(),
                    next_steps: item["next_steps"]
                        .as_array()?
                        .iter()
                        .filter_map(|s| s.as_str().map(str::to_string))
                        .collect(),
                })
            })
            .collect();

        self.commit_generation(project_id, snapshot.revision, |p, stale| {
            let (items, rejected): (Vec<AnalysisItem>, Vec<AnalysisItem>) =
                candidates.iter().cloned().partition(|i| p.has_paper(&i.corpus_id));
            let dangling: Vec<String> = items
                .iter()
                .flat_map(|i| {
                    [&i.section_title, &i.paper_title, &i.key_section, &i.connection_to_ideas]
                        .into_iter()
                        .chain(&i.next_steps)
                        .flat_map(|t| dangling_in(t, p))
                        .collect::<Vec<_>>()
                })
                .collect();
            let analysis = LiteratureAnalysis {
                items,
                generated_at_revision: snapshot.revision,
            };
            p.literature_analysis = Some(analysis.clone());
            self.log(
                p,
                "literature_analysis",
                json!({
                    "itemCount": analysis.items.len(),
                    "rejectedCorpusIds": rejected.iter().map(|i| &i.corpus_id).collect::<Vec<_>>(),
                    "danglingCitations": dangling,
                    "repairs": reply.repairs_applied,
                    "contextStale": stale,
                }),
            );
            Ok(analysis)
        })
    }

    /// Literature analysis of one node, cached on it. Uses the cached
    /// collection summary, producing one first if there is none.
    pub fn node_literature_analysis(&self, project_id: &str, node_id: &str) -> Result<NodeAnalysis> {
        let snapshot = self.project(project_id)?;
        let node = snapshot.require_node(node_id)?.clone();
        if !node.has_content() {
            return Err(Error::EmptyNodeContent(node_id.to_string()));
        }
        require_collection(&snapshot)?;
        let summary = match &snapshot.literature_summary {
            Some(s) => s.text.clone(),
            None => self.literature_summary(project_id)?.summary.text,
        };
        let snapshot = self.project(project_id)?;
        let bundle = ContextBundle::new()
            .papers(papers_block(&snapshot))
            .with("idea_facet", node.facet.label())
            .with("title", node.title.as_str())
            .with("content", node.content.as_str())
            .with("lit_review_summary", summary);
        let reply = self.with_session(project_id, |s| {
            ask_json(self.gateway(), s, TemplateId::NodeLitReview, &bundle)?.require_in_range()
        })?;
        let mut sections: Vec<(RelevantSection, Vec<String>)> = reply.value["most_relevant_sections"]
            .as_array()
            .into_iter()
            .flatten()
            .filter_map(|item| {
                let paper_title = item["paper_title"].as_str()?.to_string();
                Some((
                    RelevantSection {
                        section_title: item["section_title"].as_str()?.to_string(),
                        corpus_id: None,
                        key_section: item["key_section"].as_str()?.to_string(),
                        connection_to_ideas: item["connection_to_ideas"].as_str().unwrap_or_default().to_string(),
                        paper_title: paper_title.clone(),
                    },
                    cited_ids(&paper_title),
                ))
            })
            .collect();
        let mut suggestions: Vec<String> = reply.value["suggestions"]
            .as_array()
            .into_iter()
            .flatten()
            .filter_map(|s| s.as_str().map(str::to_string))
            .collect();
        let dropped_sections = clamp(&mut sections, MAX_RELEVANT_SECTIONS);
        let dropped_suggestions = clamp(&mut suggestions, MAX_NODE_SUGGESTIONS);
        if sections.is_empty() || suggestions.is_empty() {
            return Err(Error::MalformedResponse("node analysis has no usable sections or suggestions".into()));
        }

        self.commit_generation(project_id, snapshot.revision, |p, stale| {
            let mut dangling = Vec::new();
            let most_relevant_sections: Vec<RelevantSection> = sections
                .iter()
                .cloned()
                .map(|(mut section, tags)| {
                    section.corpus_id = tags.iter().find(|id| p.has_paper(id)).cloned();
                    dangling.extend(tags.into_iter().filter(|id| !p.has_paper(id)));
                    for text in [&section.section_title, &section.key_section, &section.connection_to_ideas] {
                        dangling.extend(dangling_in(text, p));
                    }
                    section
                })
                .collect();
            dangling.extend(suggestions.iter().flat_map(|s| dangling_in(s, p)));
            let analysis = NodeAnalysis {
                most_relevant_sections,
                suggestions: suggestions.clone(),
                generated_at_revision: snapshot.revision,
            };
            p.node_mut(node_id)
                .ok_or_else(|| Error::UnknownNode(node_id.to_string()))?
                .node_analysis_cache = Some(analysis.clone());
            self.log(
                p,
                "node_literature_analysis",
                json!({
                    "nodeId": node_id,
                    "truncatedSections": dropped_sections,
                    "truncatedSuggestions": dropped_suggestions,
                    "danglingCitations": dangling,
                    "repairs": reply.repairs_applied,
                    "contextStale": stale,
                }),
            );
            Ok(analysis)
        })
    }
}
