use super::{
    clamp, dangling_in, papers_block, GeneratedNode, SuggestionAction, SuggestionItem, COLUMN_WIDTH, MAX_ALTERNATIVES,
    MAX_NEW_FACET_NODES, ROW_HEIGHT,
};
use crate::error::{Error, Result};
use crate::gateway::ask_json;
use crate::graph::{CreatedBy, FacetType, IdeaEdge, IdeaNode, Position, Project};
use crate::prompt::{format_ideas_context, format_node, ContextBundle, TemplateId};
use crate::Studio;
use serde::Serialize;
use serde_json::{json, Value};

/// What the node-generation prompt is asked to do.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenerationAction {
    Regenerate,
    Alternatives,
    NewFacet(FacetType),
}

impl GenerationAction {
    /// Accepts suggestion-action labels, short names (`regenerate`,
    /// `alternatives`, `newFacet`) and bare facet labels. New-facet actions
    /// take their facet from `facet`.
    pub fn parse(action: &str, facet: Option<&str>) -> Result<Self> {
        if let Some(a) = SuggestionAction::parse_label(action) {
            return match a {
                SuggestionAction::RegenerateCurrentIdeaFacet => Ok(GenerationAction::Regenerate),
                SuggestionAction::GenerateAlternatives => Ok(GenerationAction::Alternatives),
                SuggestionAction::GenerateNewIdeaFacets => facet
                    .and_then(FacetType::parse_label)
                    .map(GenerationAction::NewFacet)
                    .ok_or_else(|| Error::UnknownAction(format!("{action} without a target facet"))),
            };
        }
        FacetType::parse_label(action)
            .map(GenerationAction::NewFacet)
            .ok_or_else(|| Error::UnknownAction(action.to_string()))
    }

    /// The bridge from a suggestion to the action it proposes.
    pub fn from_suggestion(item: &SuggestionItem) -> Self {
        match item.action {
            SuggestionAction::RegenerateCurrentIdeaFacet => GenerationAction::Regenerate,
            SuggestionAction::GenerateAlternatives => GenerationAction::Alternatives,
            SuggestionAction::GenerateNewIdeaFacets => GenerationAction::NewFacet(item.idea_facet),
        }
    }

    /// The action name as the generation prompt spells it.
    pub fn instruction(self) -> &'static str {
        match self {
            GenerationAction::Regenerate => SuggestionAction::RegenerateCurrentIdeaFacet.label(),
            GenerationAction::Alternatives => SuggestionAction::GenerateAlternatives.label(),
            GenerationAction::NewFacet(f) => f.label(),
        }
    }

    pub fn max_nodes(self) -> usize {
        match self {
            GenerationAction::Regenerate => 1,
            GenerationAction::Alternatives => MAX_ALTERNATIVES,
            GenerationAction::NewFacet(_) => MAX_NEW_FACET_NODES,
        }
    }

    fn target_facet(self, source: FacetType) -> FacetType {
        match self {
            GenerationAction::NewFacet(f) => f,
            _ => source,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRequest {
    pub action: GenerationAction,
    pub user_prompt: Option<String>,
    pub suggestion: Option<String>,
}

impl GenerationRequest {
    pub fn new(action: GenerationAction) -> Self {
        Self {
            action,
            user_prompt: None,
            suggestion: None,
        }
    }

    pub fn with_prompt(mut self, prompt: impl Into<String>) -> Self {
        self.user_prompt = Some(prompt.into());
        self
    }

    pub fn with_suggestion(mut self, suggestion: impl Into<String>) -> Self {
        self.suggestion = Some(suggestion.into());
        self
    }

    fn action_text(&self) -> String {
        let mut text = format!("Action: {}", self.action.instruction());
        for (label, value) in [("Suggestion", &self.suggestion), ("User prompt", &self.user_prompt)] {
            if let Some(v) = value.as_deref().map(str::trim).filter(|v| !v.is_empty()) {
                text.push_str(&format!("\n{label}: {v}"));
            }
        }
        text
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GenerationOutcome {
    pub generated: Vec<GeneratedNode>,
    pub nodes: Vec<IdeaNode>,
    pub edges: Vec<IdeaEdge>,
    /// Items beyond the cardinality bound.
    pub truncated: usize,
    /// Items whose facet contradicted the requested one.
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChainFailure {
    pub step: usize,
    pub facet: FacetType,
    pub code: String,
    pub message: String,
}

/// Nodes and edges a chain produced before it finished or failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChainOutcome {
    pub nodes: Vec<IdeaNode>,
    pub edges: Vec<IdeaEdge>,
    pub failure: Option<ChainFailure>,
}

struct Batch {
    nodes: Vec<GeneratedNode>,
    truncated: usize,
    rejected: Vec<Value>,
    defaulted: usize,
    repairs: Vec<String>,
}

fn node_context(project: &Project, center: Option<&str>) -> Result<String> {
    let ideas = match center {
        Some(id) => {
            let hood = project.neighborhood_context(id)?;
            format_ideas_context(&hood.nodes, &hood.edges)
        }
        None => format_ideas_context(&[], &[]),
    };
    Ok(format!(
        "Connected idea facet nodes:\n{ideas}\nRelated literature, ONLY use these provided papers:\n{}",
        papers_block(project)
    ))
}

/// Positions for `n` generated nodes: beside the source on its row, or
/// fanned out one row below it.
fn placements(action: GenerationAction, source: Position, n: usize) -> Vec<Position> {
    (0..n)
        .map(|i| match action {
            GenerationAction::Regenerate | GenerationAction::Alternatives => {
                Position::new(source.x + COLUMN_WIDTH * (i + 1) as f64, source.y)
            }
            GenerationAction::NewFacet(_) => {
                let offset = i as f64 - (n as f64 - 1.0) / 2.0;
                Position::new(source.x + COLUMN_WIDTH * offset, source.y + ROW_HEIGHT)
            }
        })
        .collect()
}

impl Studio {
    fn request_nodes(
        &self,
        project_id: &str,
        bundle: &ContextBundle,
        expected: FacetType,
        max: usize,
    ) -> Result<Batch> {
        let reply = self.with_session(project_id, |s| {
            ask_json(self.gateway(), s, TemplateId::NodeGeneration, bundle)?.require_in_range()
        })?;
        let mut nodes = Vec::new();
        let mut rejected = Vec::new();
        let mut defaulted = 0;
        for item in reply.value["new_nodes"].as_array().into_iter().flatten() {
            let (Some(title), Some(content)) = (item["title"].as_str(), item["content"].as_str()) else {
                continue;
            };
            let facet = match item["ideaFacet"].as_str().and_then(FacetType::parse_label) {
                Some(f) if f != expected => {
                    rejected.push(item.clone());
                    continue;
                }
                Some(f) => f,
                None => {
                    defaulted += 1;
                    expected
                }
            };
            nodes.push(GeneratedNode {
                idea_facet: facet,
                title: title.trim().to_string(),
                content: content.trim().to_string(),
            });
        }
        if nodes.is_empty() {
            return Err(Error::SchemaViolation(format!(
                "every generated node had the wrong facet (expected {}); model reply: {}",
                expected.label(),
                reply.raw_text
            )));
        }
        let truncated = clamp(&mut nodes, max);
        Ok(Batch {
            nodes,
            truncated,
            rejected,
            defaulted,
            repairs: reply.repairs_applied,
        })
    }

    /// Generates nodes from `node_id` and places them on the canvas.
    pub fn generate_nodes(
        &self,
        project_id: &str,
        node_id: &str,
        request: GenerationRequest,
    ) -> Result<GenerationOutcome> {
        let snapshot = self.project(project_id)?;
        let source = snapshot.require_node(node_id)?.clone();
        let action = request.action;
        let expected = action.target_facet(source.facet);
        let bundle = ContextBundle::new()
            .with("current_node_data", format_node(&source))
            .with("node_context", node_context(&snapshot, Some(node_id))?)
            .with("action_to_take", request.action_text());
        let batch = self.request_nodes(project_id, &bundle, expected, action.max_nodes())?;

        self.commit_generation(project_id, snapshot.revision, |p, stale| {
            let positions = placements(action, source.position, batch.nodes.len());
            let parents: Vec<String> = match action {
                GenerationAction::NewFacet(_) => vec![node_id.to_string()],
                _ => p
                    .edges
                    .iter()
                    .filter(|e| e.target == node_id)
                    .map(|e| e.source.clone())
                    .collect(),
            };
            let mut nodes = Vec::new();
            let mut edges = Vec::new();
            for (generated, position) in batch.nodes.iter().zip(positions) {
                let node = p.build_node(
                    self.runtime(),
                    generated.idea_facet,
                    generated.title.clone(),
                    generated.content.clone(),
                    position,
                    CreatedBy::Generated,
                )?;
                p.nodes.push(node.clone());
                for parent in &parents {
                    if p.node(parent).is_some() {
                        edges.push(p.push_edge(self.runtime(), parent, &node.id)?);
                    }
                }
                nodes.push(node);
            }
            let dangling: Vec<String> = nodes.iter().flat_map(|n| dangling_in(&n.content, p)).collect();
            self.log(
                p,
                "generate_nodes",
                json!({
                    "sourceNodeId": node_id,
                    "action": action.instruction(),
                    "userPrompt": request.user_prompt,
                    "nodeIds": nodes.iter().map(|n| &n.id).collect::<Vec<_>>(),
                    "edgeIds": edges.iter().map(|e| &e.id).collect::<Vec<_>>(),
                    "truncated": batch.truncated,
                    "rejected": batch.rejected,
                    "facetDefaulted": batch.defaulted,
                    "danglingCitations": dangling,
                    "repairs": batch.repairs,
                    "contextStale": stale,
                }),
            );
            Ok(GenerationOutcome {
                generated: batch.nodes.clone(),
                nodes,
                edges,
                truncated: batch.truncated,
                rejected: batch.rejected.len(),
            })
        })
    }

    /// Turns a suggestion into a vertical chain of one node per facet,
    /// from `start` (default: problem and RQ) through the canonical order.
    /// Each step is committed on its own; a failing step ends the chain and
    /// the nodes made so far stay.
    pub fn materialize_suggestion_chain(
        &self,
        project_id: &str,
        suggestion: &str,
        start: Option<FacetType>,
        drop: Position,
    ) -> Result<ChainOutcome> {
        let suggestion = suggestion.trim();
        if suggestion.is_empty() {
            return Err(Error::InvalidRequest("suggestion text is empty".into()));
        }
        if !drop.is_finite() {
            return Err(Error::InvalidRequest("drop position must be finite".into()));
        }
        let mut outcome = ChainOutcome {
            nodes: Vec::new(),
            edges: Vec::new(),
            failure: None,
        };
        let mut facet = Some(start.unwrap_or_default());
        let mut step = 0;
        while let Some(current) = facet {
            match self.chain_step(project_id, suggestion, current, step, drop, outcome.nodes.last()) {
                Ok((node, edge)) => {
                    outcome.nodes.push(node);
                    outcome.edges.extend(edge);
                }
                Err(err) if step == 0 => return Err(err),
                Err(err) => {
                    self.store().mutate(project_id, |p| {
                        self.log(
                            p,
                            "chain_step_failed",
                            json!({ "step": step, "facet": current, "code": err.code(), "message": err.to_string() }),
                        );
                        Ok(())
                    })?;
                    outcome.failure = Some(ChainFailure {
                        step,
                        facet: current,
                        code: err.code().to_string(),
                        message: err.to_string(),
                    });
                    break;
                }
            }
            facet = current.next();
            step += 1;
        }
        Ok(outcome)
    }

    fn chain_step(
        &self,
        project_id: &str,
        suggestion: &str,
        facet: FacetType,
        step: usize,
        drop: Position,
        parent: Option<&IdeaNode>,
    ) -> Result<(IdeaNode, Option<IdeaEdge>)> {
        let snapshot = self.project(project_id)?;
        let current = match parent {
            Some(node) => format_node(snapshot.node(&node.id).unwrap_or(node)),
            None => format!("Suggestion: {suggestion}"),
        };
        let context = match parent.filter(|n| snapshot.node(&n.id).is_some()) {
            Some(node) => node_context(&snapshot, Some(&node.id))?,
            None => node_context(&snapshot, None)?,
        };
        let request = GenerationRequest::new(GenerationAction::NewFacet(facet)).with_suggestion(suggestion);
        let bundle = ContextBundle::new()
            .with("current_node_data", current)
            .with("node_context", context)
            .with("action_to_take", request.action_text());
        let batch = self.request_nodes(project_id, &bundle, facet, 1)?;
        let generated = &batch.nodes[0];

        self.commit_generation(project_id, snapshot.revision, |p, stale| {
            let position = Position::new(drop.x, drop.y + ROW_HEIGHT * step as f64);
            let node = p.build_node(
                self.runtime(),
                generated.idea_facet,
                generated.title.clone(),
                generated.content.clone(),
                position,
                CreatedBy::Generated,
            )?;
            p.nodes.push(node.clone());
            let edge = match parent {
                Some(parent) if p.node(&parent.id).is_some() => Some(p.push_edge(self.runtime(), &parent.id, &node.id)?),
                _ => None,
            };
            let dangling = dangling_in(&node.content, p);
            self.log(
                p,
                "chain_step",
                json!({
                    "step": step,
                    "facet": facet,
                    "nodeId": node.id,
                    "edgeId": edge.as_ref().map(|e| &e.id),
                    "truncated": batch.truncated,
                    "rejected": batch.rejected,
                    "danglingCitations": dangling,
                    "contextStale": stale,
                }),
            );
            Ok((node, edge))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_actions() {
        assert_eq!(
            GenerationAction::parse("Regenerate Current Node", None).unwrap(),
            GenerationAction::Regenerate
        );
        assert_eq!(
            GenerationAction::parse("Generate New Idea Facets", Some("Evaluation Method")).unwrap(),
            GenerationAction::NewFacet(FacetType::EvaluationMethod)
        );
        assert_eq!(
            GenerationAction::parse("Contribution and Impact", None).unwrap(),
            GenerationAction::NewFacet(FacetType::ContributionAndImpact)
        );
        assert_eq!(GenerationAction::parse("Delete Everything", None).unwrap_err().code(), "UnknownAction");
        assert_eq!(GenerationAction::parse("newFacet", None).unwrap_err().code(), "UnknownAction");
    }

    #[test]
    fn action_text_lines() {
        let r = GenerationRequest::new(GenerationAction::NewFacet(FacetType::EvaluationMethod))
            .with_prompt("interactive AI system that gives feedback")
            .with_suggestion("  ");
        assert_eq!(
            r.action_text(),
            "Action: Evaluation Method\nUser prompt: interactive AI system that gives feedback"
        );
    }

    #[test]
    fn placement_rows() {
        let src = Position::new(100.0, 100.0);
        let alts = placements(GenerationAction::Alternatives, src, 3);
        assert!(alts.iter().all(|p| p.y == 100.0));
        assert_eq!(alts[0].x, 420.0);
        let kids = placements(GenerationAction::NewFacet(FacetType::EvaluationMethod), src, 3);
        assert!(kids.iter().all(|p| p.y == 300.0));
        assert_eq!(kids[1].x, 100.0);
        assert_eq!(kids[0].x, 100.0 - COLUMN_WIDTH);
    }
}
