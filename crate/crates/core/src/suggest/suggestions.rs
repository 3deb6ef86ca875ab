use super::{clamp, dangling_in, papers_block, SuggestionAction, SuggestionItem, SuggestionSet, MAX_SUGGESTIONS};
use crate::error::{Error, Result};
use crate::gateway::ask_json;
use crate::graph::FacetType;
use crate::prompt::{ContextBundle, TemplateId};
use crate::Studio;
use serde_json::json;

impl Studio {
    /// Asks for suggestions on one node and caches them on it.
    pub fn node_suggestions(&self, project_id: &str, node_id: &str) -> Result<SuggestionSet> {
        let snapshot = self.project(project_id)?;
        let node = snapshot.require_node(node_id)?.clone();
        if !node.has_content() {
            return Err(Error::EmptyNodeContent(node_id.to_string()));
        }
        let papers = papers_block(&snapshot);
        let bundle = ContextBundle::new()
            .papers(papers.as_str())
            .with("idea_facet", node.facet.label())
            .with("node_title", node.title.as_str())
            .with("node_content", node.content.as_str());
        let reply = self.with_session(project_id, |s| {
            ask_json(self.gateway(), s, TemplateId::NodeSuggestion, &bundle)?.require_in_range()
        })?;

        let mut items: Vec<SuggestionItem> = reply.value["ai_suggestion"]
            .as_array()
            .into_iter()
            .flatten()
            .filter_map(|item| {
                let action = SuggestionAction::parse_label(item["action"].as_str()?)?;
                let facet = item["idea_facet"]
                    .as_str()
                    .and_then(FacetType::parse_label)
                    .unwrap_or(node.facet);
                Some(SuggestionItem {
                    idea_facet: facet,
                    action,
                    suggestion: item["suggestion"].as_str()?.to_string(),
                })
            })
            .collect();
        let dropped = clamp(&mut items, MAX_SUGGESTIONS);
        if items.is_empty() {
            return Err(Error::MalformedResponse("no usable suggestions in reply".into()));
        }
        let dangling: Vec<String> = items
            .iter()
            .flat_map(|i| dangling_in(&i.suggestion, &snapshot))
            .collect();

        self.commit_generation(project_id, snapshot.revision, |p, stale| {
            let set = SuggestionSet {
                items,
                generated_at_revision: snapshot.revision,
            };
            p.node_mut(node_id)
                .ok_or_else(|| Error::UnknownNode(node_id.to_string()))?
                .suggestion_cache = Some(set.clone());
            self.log(
                p,
                "node_suggestions",
                json!({
                    "nodeId": node_id,
                    "itemCount": set.items.len(),
                    "truncated": dropped,
                    "ungrounded": papers.is_empty(),
                    "danglingCitations": dangling,
                    "repairs": reply.repairs_applied,
                    "contextStale": stale,
                }),
            );
            Ok(set)
        })
    }
}
