use super::model::*;
use super::FacetType;
use crate::error::{Error, Result};
use crate::library::PaperRecord;
use crate::runtime::Runtime;
use serde_json::{json, Value};
use std::collections::{BTreeMap, HashSet};

/// Partial update for a node. `None` leaves a field unchanged.
#[derive(Debug, Clone, Default, PartialEq, serde::Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NodePatch {
    pub facet: Option<FacetType>,
    pub title: Option<String>,
    pub content: Option<String>,
    pub position: Option<Position>,
}

/// A node together with every node one edge away, in creation order.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Neighborhood {
    pub center: IdeaNode,
    /// Center plus neighbors, in creation order.
    pub nodes: Vec<IdeaNode>,
    /// Edges incident to the center, in creation order.
    pub edges: Vec<IdeaEdge>,
}

impl Neighborhood {
    pub fn neighbors(&self) -> impl Iterator<Item = &IdeaNode> {
        self.nodes.iter().filter(move |n| n.id != self.center.id)
    }
}

/// Selected nodes grouped by facet in canonical order, plus induced edges.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BriefSelection {
    pub groups: Vec<(FacetType, Vec<IdeaNode>)>,
    pub edges: Vec<IdeaEdge>,
}

impl BriefSelection {
    pub fn nodes(&self) -> impl Iterator<Item = &IdeaNode> {
        self.groups.iter().flat_map(|(_, nodes)| nodes.iter())
    }

    pub fn group(&self, facet: FacetType) -> &[IdeaNode] {
        &self.groups[facet.ordinal()].1
    }
}

impl Project {
    pub fn new(rt: &Runtime, name: impl Into<String>) -> Self {
        let mut project = Project {
            id: rt.next_id(),
            name: name.into(),
            nodes: Vec::new(),
            edges: Vec::new(),
            paper_ids: Vec::new(),
            papers: BTreeMap::new(),
            briefs: Vec::new(),
            chat_history: Vec::new(),
            action_log: Vec::new(),
            revision: 0,
            literature_summary: None,
            literature_analysis: None,
        };
        project.append_log(rt, Actor::User, "create_project", json!({ "name": project.name }));
        project
    }

    fn append_log(&mut self, rt: &Runtime, actor: Actor, action: &str, payload: Value) {
        let mut timestamp = rt.now();
        if let Some(last) = self.action_log.last() {
            timestamp = timestamp.max(last.timestamp);
        }
        self.action_log.push(ActionLogEntry {
            timestamp,
            actor,
            action: action.to_string(),
            payload,
        });
    }

    /// The revision the in-progress mutation will commit as.
    pub(crate) fn pending_revision(&self) -> u64 {
        self.revision + 1
    }

    /// Finishes one mutation: bumps the revision and appends its log entry.
    pub(crate) fn commit(&mut self, rt: &Runtime, actor: Actor, action: &str, payload: Value) -> u64 {
        self.revision += 1;
        self.append_log(rt, actor, action, payload);
        self.revision
    }

    /// Records an event that changes nothing but the log.
    pub fn log_event(&mut self, rt: &Runtime, actor: Actor, action: &str, payload: Value) -> u64 {
        self.commit(rt, actor, action, payload)
    }

    pub fn node(&self, id: &str) -> Option<&IdeaNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub(crate) fn node_mut(&mut self, id: &str) -> Option<&mut IdeaNode> {
        self.nodes.iter_mut().find(|n| n.id == id)
    }

    pub fn require_node(&self, id: &str) -> Result<&IdeaNode> {
        self.node(id).ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    pub fn edge(&self, id: &str) -> Option<&IdeaEdge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn require_edge(&self, id: &str) -> Result<&IdeaEdge> {
        self.edge(id).ok_or_else(|| Error::UnknownEdge(id.to_string()))
    }

    pub fn edge_between(&self, source: &str, target: &str) -> Option<&IdeaEdge> {
        self.edges.iter().find(|e| e.source == source && e.target == target)
    }

    /// Papers in collection order.
    pub fn collection(&self) -> Vec<&PaperRecord> {
        self.paper_ids.iter().filter_map(|id| self.papers.get(id)).collect()
    }

    pub fn has_paper(&self, corpus_id: &str) -> bool {
        self.papers.contains_key(corpus_id)
    }

    /// True when an endpoint changed after the edge was last assessed.
    pub fn edge_is_stale(&self, edge: &IdeaEdge) -> bool {
        let Some(assessed) = edge.assessed_at_revision else {
            return false;
        };
        [&edge.source, &edge.target]
            .iter()
            .filter_map(|id| self.node(id))
            .any(|n| n.revised_at > assessed)
    }

    pub(crate) fn build_node(
        &self,
        rt: &Runtime,
        facet: FacetType,
        title: String,
        content: String,
        position: Position,
        created_by: CreatedBy,
    ) -> Result<IdeaNode> {
        if !position.is_finite() {
            return Err(Error::InvalidRequest("node position must be finite".into()));
        }
        Ok(IdeaNode {
            id: rt.next_id(),
            facet,
            title,
            content,
            position,
            created_by,
            revised_at: self.pending_revision(),
            suggestion_cache: None,
            node_analysis_cache: None,
        })
    }

    /// Validates and appends an edge without committing.
    pub(crate) fn push_edge(&mut self, rt: &Runtime, source: &str, target: &str) -> Result<IdeaEdge> {
        if source == target {
            return Err(Error::SelfLoop(source.to_string()));
        }
        self.require_node(source)?;
        self.require_node(target)?;
        if self.edge_between(source, target).is_some() {
            return Err(Error::DuplicateEdge(source.to_string(), target.to_string()));
        }
        let edge = IdeaEdge {
            id: rt.next_id(),
            source: source.to_string(),
            target: target.to_string(),
            strength: None,
            suggestion: None,
            assessed_at_revision: None,
        };
        self.edges.push(edge.clone());
        Ok(edge)
    }

    pub fn rename(&mut self, rt: &Runtime, name: impl Into<String>) -> u64 {
        self.name = name.into();
        let payload = json!({ "name": self.name });
        self.commit(rt, Actor::User, "rename_project", payload)
    }

    pub fn create_node(
        &mut self,
        rt: &Runtime,
        facet: FacetType,
        title: impl Into<String>,
        content: impl Into<String>,
        position: Position,
    ) -> Result<IdeaNode> {
        let node = self.build_node(rt, facet, title.into(), content.into(), position, CreatedBy::User)?;
        self.nodes.push(node.clone());
        self.commit(rt, Actor::User, "create_node", json!({ "nodeId": node.id, "facet": facet }));
        Ok(node)
    }

    pub fn update_node(
        &mut self,
        rt: &Runtime,
        id: &str,
        patch: NodePatch,
        expected_revision: Option<u64>,
    ) -> Result<IdeaNode> {
        if let Some(expected) = expected_revision {
            if expected != self.revision {
                return Err(Error::RevisionConflict {
                    expected,
                    actual: self.revision,
                });
            }
        }
        if patch.position.is_some_and(|p| !p.is_finite()) {
            return Err(Error::InvalidRequest("node position must be finite".into()));
        }
        let pending = self.pending_revision();
        let node = self.node_mut(id).ok_or_else(|| Error::UnknownNode(id.to_string()))?;
        let mut fields = Vec::new();
        let mut revised = false;
        if let Some(facet) = patch.facet {
            revised |= node.facet != facet;
            node.facet = facet;
            fields.push("facet");
        }
        if let Some(title) = patch.title {
            revised |= node.title != title;
            node.title = title;
            fields.push("title");
        }
        if let Some(content) = patch.content {
            revised |= node.content != content;
            node.content = content;
            fields.push("content");
        }
        if let Some(position) = patch.position {
            node.position = position;
            fields.push("position");
        }
        if revised {
            node.revised_at = pending;
        }
        let node = node.clone();
        let action = if fields == ["position"] { "move_node" } else { "typing" };
        self.commit(rt, Actor::User, action, json!({ "nodeId": id, "fields": fields }));
        Ok(node)
    }

    /// Removes a node, its edges, and its entries in brief source lists.
    pub fn delete_node(&mut self, rt: &Runtime, id: &str) -> Result<()> {
        self.require_node(id)?;
        self.nodes.retain(|n| n.id != id);
        let removed_edges: Vec<String> = self
            .edges
            .iter()
            .filter(|e| e.touches(id))
            .map(|e| e.id.clone())
            .collect();
        self.edges.retain(|e| !e.touches(id));
        for brief in &mut self.briefs {
            if brief.source_node_ids.iter().any(|n| n == id) {
                brief.source_node_ids.retain(|n| n != id);
                brief.detached_node_ids.push(id.to_string());
            }
            detach_edges(brief, &removed_edges);
        }
        self.commit(
            rt,
            Actor::User,
            "delete_node",
            json!({ "nodeId": id, "removedEdgeIds": removed_edges }),
        );
        Ok(())
    }

    pub fn link_nodes(&mut self, rt: &Runtime, source: &str, target: &str) -> Result<IdeaEdge> {
        let edge = self.push_edge(rt, source, target)?;
        self.commit(
            rt,
            Actor::User,
            "link_nodes",
            json!({ "edgeId": edge.id, "source": source, "target": target }),
        );
        Ok(edge)
    }

    pub fn delete_edge(&mut self, rt: &Runtime, id: &str) -> Result<()> {
        self.require_edge(id)?;
        self.edges.retain(|e| e.id != id);
        let removed = [id.to_string()];
        for brief in &mut self.briefs {
            detach_edges(brief, &removed);
        }
        self.commit(rt, Actor::User, "delete_edge", json!({ "edgeId": id }));
        Ok(())
    }

    /// Stores an assessment; the strength must already be in `[0, 1]`.
    pub fn record_edge_assessment(
        &mut self,
        rt: &Runtime,
        edge_id: &str,
        strength: f64,
        suggestion: String,
        mut payload: Value,
    ) -> Result<IdeaEdge> {
        if !(0.0..=1.0).contains(&strength) {
            return Err(Error::SchemaViolation(format!(
                "connection strength {strength} outside [0, 1]"
            )));
        }
        let pending = self.pending_revision();
        let edge = self
            .edges
            .iter_mut()
            .find(|e| e.id == edge_id)
            .ok_or_else(|| Error::UnknownEdge(edge_id.to_string()))?;
        edge.strength = Some(strength);
        edge.suggestion = Some(suggestion);
        edge.assessed_at_revision = Some(pending);
        let edge = edge.clone();
        if let Value::Object(map) = &mut payload {
            map.insert("edgeId".into(), json!(edge_id));
            map.insert("strength".into(), json!(strength));
        }
        self.commit(rt, Actor::System, "assess_edge", payload);
        Ok(edge)
    }

    pub fn add_paper(&mut self, rt: &Runtime, record: PaperRecord) -> Result<()> {
        record.check().map_err(Error::InvalidRequest)?;
        if self.has_paper(&record.corpus_id) {
            return Err(Error::DuplicatePaper(record.corpus_id));
        }
        let payload = json!({
            "corpusId": record.corpus_id,
            "ingestState": record.ingest_state,
        });
        self.paper_ids.push(record.corpus_id.clone());
        self.papers.insert(record.corpus_id.clone(), record);
        self.commit(rt, Actor::User, "add_paper", payload);
        Ok(())
    }

    pub fn remove_paper(&mut self, rt: &Runtime, corpus_id: &str) -> Result<()> {
        if !self.has_paper(corpus_id) {
            return Err(Error::UnknownPaper(corpus_id.to_string()));
        }
        let cited = self.briefs.iter().any(|b| {
            b.literature_references
                .iter()
                .any(|r| r.corpus_id.as_deref() == Some(corpus_id))
        });
        if cited {
            return Err(Error::PaperInUse(corpus_id.to_string()));
        }
        self.paper_ids.retain(|id| id != corpus_id);
        self.papers.remove(corpus_id);
        if let Some(summary) = &mut self.literature_summary {
            summary.corpus_ids.retain(|id| id != corpus_id);
        }
        if let Some(analysis) = &mut self.literature_analysis {
            analysis.items.retain(|item| item.corpus_id != corpus_id);
        }
        self.commit(rt, Actor::User, "remove_paper", json!({ "corpusId": corpus_id }));
        Ok(())
    }

    pub fn delete_brief(&mut self, rt: &Runtime, id: &str) -> Result<()> {
        if !self.briefs.iter().any(|b| b.id == id) {
            return Err(Error::UnknownBrief(id.to_string()));
        }
        self.briefs.retain(|b| b.id != id);
        self.commit(rt, Actor::User, "delete_brief", json!({ "briefId": id }));
        Ok(())
    }

    /// The node plus everything one edge away in either direction.
    pub fn neighborhood_context(&self, node_id: &str) -> Result<Neighborhood> {
        let center = self.require_node(node_id)?.clone();
        let edges: Vec<IdeaEdge> = self.edges.iter().filter(|e| e.touches(node_id)).cloned().collect();
        let mut ids: HashSet<&str> = edges
            .iter()
            .flat_map(|e| [e.source.as_str(), e.target.as_str()])
            .collect();
        ids.insert(node_id);
        let nodes = self
            .nodes
            .iter()
            .filter(|n| ids.contains(n.id.as_str()))
            .cloned()
            .collect();
        Ok(Neighborhood { center, nodes, edges })
    }

    /// Groups a selection by facet in canonical order and collects the
    /// edges whose endpoints are both selected. Output depends only on the
    /// set of ids, not their order or repetition.
    pub fn select_brief_subgraph<S: AsRef<str>>(&self, node_ids: &[S]) -> Result<BriefSelection> {
        if node_ids.is_empty() {
            return Err(Error::EmptySelection);
        }
        let mut selected = HashSet::new();
        for id in node_ids {
            let id = id.as_ref();
            self.require_node(id)?;
            selected.insert(id);
        }
        let mut groups: Vec<(FacetType, Vec<IdeaNode>)> =
            FacetType::ALL.iter().map(|f| (*f, Vec::new())).collect();
        for node in self.nodes.iter().filter(|n| selected.contains(n.id.as_str())) {
            groups[node.facet.ordinal()].1.push(node.clone());
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| selected.contains(e.source.as_str()) && selected.contains(e.target.as_str()))
            .cloned()
            .collect();
        Ok(BriefSelection { groups, edges })
    }

    /// Full referential-integrity and invariant sweep.
    pub fn check_integrity(&self) -> std::result::Result<(), String> {
        let mut node_ids = HashSet::new();
        for node in &self.nodes {
            if node.id.is_empty() || !node_ids.insert(node.id.as_str()) {
                return Err(format!("duplicate or empty node id {:?}", node.id));
            }
            if !node.position.is_finite() {
                return Err(format!("node {} has a non-finite position", node.id));
            }
            if node.revised_at > self.revision {
                return Err(format!("node {} revised after the project revision", node.id));
            }
            let caches = [
                node.suggestion_cache.as_ref().map(|s| s.generated_at_revision),
                node.node_analysis_cache.as_ref().map(|a| a.generated_at_revision),
            ];
            if caches.into_iter().flatten().any(|r| r > self.revision) {
                return Err(format!("node {} has a cache from a future revision", node.id));
            }
        }
        let mut edge_ids = HashSet::new();
        let mut pairs = HashSet::new();
        for edge in &self.edges {
            if edge.id.is_empty() || !edge_ids.insert(edge.id.as_str()) {
                return Err(format!("duplicate or empty edge id {:?}", edge.id));
            }
            if edge.source == edge.target {
                return Err(format!("edge {} is a self loop", edge.id));
            }
            if !node_ids.contains(edge.source.as_str()) || !node_ids.contains(edge.target.as_str()) {
                return Err(format!("edge {} has a dangling endpoint", edge.id));
            }
            if !pairs.insert((edge.source.as_str(), edge.target.as_str())) {
                return Err(format!("duplicate edge {} -> {}", edge.source, edge.target));
            }
            if let Some(s) = edge.strength {
                if !(0.0..=1.0).contains(&s) {
                    return Err(format!("edge {} strength {s} outside [0, 1]", edge.id));
                }
            }
            if edge.assessed_at_revision.is_some_and(|r| r > self.revision) {
                return Err(format!("edge {} assessed at a future revision", edge.id));
            }
        }
        let mut paper_ids = HashSet::new();
        for id in &self.paper_ids {
            if !paper_ids.insert(id.as_str()) {
                return Err(format!("paper {id} listed twice"));
            }
            if !self.papers.contains_key(id) {
                return Err(format!("paper {id} has no record"));
            }
        }
        for (key, record) in &self.papers {
            if !paper_ids.contains(key.as_str()) {
                return Err(format!("paper record {key} missing from paperIds"));
            }
            if &record.corpus_id != key {
                return Err(format!("paper record keyed {key} has corpusId {}", record.corpus_id));
            }
            record.check()?;
        }
        let mut brief_ids = HashSet::new();
        for brief in &self.briefs {
            if !brief_ids.insert(brief.id.as_str()) {
                return Err(format!("duplicate brief id {}", brief.id));
            }
            if brief.source_node_ids.is_empty() && brief.detached_node_ids.is_empty() {
                return Err(format!("brief {} has no source nodes", brief.id));
            }
            if let Some(id) = brief.source_node_ids.iter().find(|id| !node_ids.contains(id.as_str())) {
                return Err(format!("brief {} references missing node {id}", brief.id));
            }
            if let Some(id) = brief.source_edge_ids.iter().find(|id| !edge_ids.contains(id.as_str())) {
                return Err(format!("brief {} references missing edge {id}", brief.id));
            }
            for reference in &brief.literature_references {
                if reference.citation_id == 0 {
                    return Err(format!("brief {} has citation id 0", brief.id));
                }
                if let Some(id) = &reference.corpus_id {
                    if !paper_ids.contains(id.as_str()) {
                        return Err(format!("brief {} cites uncollected paper {id}", brief.id));
                    }
                }
            }
        }
        if let Some(summary) = &self.literature_summary {
            if let Some(id) = summary.corpus_ids.iter().find(|id| !paper_ids.contains(id.as_str())) {
                return Err(format!("literature summary mentions uncollected paper {id}"));
            }
        }
        if let Some(analysis) = &self.literature_analysis {
            if let Some(item) = analysis.items.iter().find(|i| !paper_ids.contains(i.corpus_id.as_str())) {
                return Err(format!("literature analysis cites uncollected paper {}", item.corpus_id));
            }
        }
        if self
            .action_log
            .windows(2)
            .any(|w| w[1].timestamp < w[0].timestamp)
        {
            return Err("action log timestamps decrease".into());
        }
        Ok(())
    }
}

fn detach_edges(brief: &mut ResearchBrief, removed: &[String]) {
    for id in removed {
        if brief.source_edge_ids.contains(id) {
            brief.source_edge_ids.retain(|e| e != id);
            brief.detached_edge_ids.push(id.clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn project() -> (Runtime, Project) {
        let rt = Runtime::deterministic(3);
        let p = Project::new(&rt, "test");
        (rt, p)
    }

    fn node(p: &mut Project, rt: &Runtime, facet: FacetType, title: &str) -> String {
        p.create_node(rt, facet, title, format!("{title} content"), Position::default())
            .unwrap()
            .id
    }

    #[test]
    fn create_node_with_scenario_text() {
        let (rt, mut p) = project();
        let n = p
            .create_node(
                &rt,
                FacetType::ProblemDescriptionAndRQ,
                "AI fictional characters",
                "How can we use AI to generate interesting fictional characters for writers?",
                Position::new(0.0, 0.0),
            )
            .unwrap();
        assert_eq!(n.facet, FacetType::ProblemDescriptionAndRQ);
        assert_eq!(n.created_by, CreatedBy::User);
        assert_eq!(p.revision, 1);
        assert_eq!(p.action_log.last().unwrap().action, "create_node");
    }

    #[test]
    fn empty_node_is_legal() {
        let (rt, mut p) = project();
        let n = p
            .create_node(&rt, FacetType::EvaluationMethod, "", "", Position::default())
            .unwrap();
        assert!(n.title.is_empty() && n.content.is_empty());
    }

    #[test]
    fn hundred_nodes_distinct_ids() {
        let (rt, mut p) = project();
        let before = p.revision;
        let ids: HashSet<String> = (0..100)
            .map(|i| node(&mut p, &rt, FacetType::ProblemDescriptionAndRQ, &format!("n{i}")))
            .collect();
        assert_eq!(ids.len(), 100);
        assert_eq!(p.revision - before, 100);
    }

    #[test]
    fn non_finite_position_rejected() {
        let (rt, mut p) = project();
        let err = p
            .create_node(&rt, FacetType::EvaluationMethod, "t", "c", Position::new(f64::NAN, 0.0))
            .unwrap_err();
        assert_eq!(err.code(), "InvalidRequest");
    }

    #[test]
    fn link_rules() {
        let (rt, mut p) = project();
        let a = node(&mut p, &rt, FacetType::ProblemDescriptionAndRQ, "a");
        let b = node(&mut p, &rt, FacetType::ProposedDesignAndSolution, "b");
        let e = p.link_nodes(&rt, &a, &b).unwrap();
        assert_eq!(e.strength, None);
        assert_eq!(p.link_nodes(&rt, &a, &a).unwrap_err(), Error::SelfLoop(a.clone()));
        assert!(matches!(p.link_nodes(&rt, &a, &b), Err(Error::DuplicateEdge(..))));
        assert!(matches!(p.link_nodes(&rt, &a, "nope"), Err(Error::UnknownNode(_))));
        // reverse direction is a distinct ordered pair; cycles are allowed
        p.link_nodes(&rt, &b, &a).unwrap();
        // same-facet links are allowed
        let c = node(&mut p, &rt, FacetType::ProblemDescriptionAndRQ, "c");
        p.link_nodes(&rt, &a, &c).unwrap();
    }

    #[test]
    fn delete_cascades_edges_and_brief_sources() {
        let (rt, mut p) = project();
        let a = node(&mut p, &rt, FacetType::ProblemDescriptionAndRQ, "a");
        let b = node(&mut p, &rt, FacetType::ProposedDesignAndSolution, "b");
        let e = p.link_nodes(&rt, &a, &b).unwrap();
        p.briefs.push(ResearchBrief {
            id: "brief".into(),
            title: "t".into(),
            problem_description: String::new(),
            proposed_design: String::new(),
            evaluation_method: String::new(),
            contribution_impact: String::new(),
            literature_references: vec![],
            source_node_ids: vec![a.clone(), b.clone()],
            source_edge_ids: vec![e.id.clone()],
            detached_node_ids: vec![],
            detached_edge_ids: vec![],
            unmatched_citations: vec![],
        });
        p.delete_node(&rt, &b).unwrap();
        assert!(p.edges.is_empty());
        let brief = &p.briefs[0];
        assert_eq!(brief.source_node_ids, vec![a]);
        assert_eq!(brief.detached_node_ids, vec![b]);
        assert_eq!(brief.detached_edge_ids, vec![e.id]);
        p.check_integrity().unwrap();
    }

    #[test]
    fn neighborhood_two_parents_one_child() {
        let (rt, mut p) = project();
        let p1 = node(&mut p, &rt, FacetType::ProblemDescriptionAndRQ, "p1");
        let p2 = node(&mut p, &rt, FacetType::ProblemDescriptionAndRQ, "p2");
        let c = node(&mut p, &rt, FacetType::ProposedDesignAndSolution, "c");
        let k = node(&mut p, &rt, FacetType::EvaluationMethod, "k");
        let far = node(&mut p, &rt, FacetType::ContributionAndImpact, "far");
        p.link_nodes(&rt, &p1, &c).unwrap();
        p.link_nodes(&rt, &p2, &c).unwrap();
        p.link_nodes(&rt, &c, &k).unwrap();
        p.link_nodes(&rt, &k, &far).unwrap();
        let ctx = p.neighborhood_context(&c).unwrap();
        let ids: Vec<_> = ctx.nodes.iter().map(|n| n.id.clone()).collect();
        assert_eq!(ids, vec![p1, p2, c.clone(), k]);
        assert_eq!(ctx.edges.len(), 3);
        assert_eq!(ctx.neighbors().count(), 3);
    }

    #[test]
    fn neighborhood_isolated() {
        let (rt, mut p) = project();
        let a = node(&mut p, &rt, FacetType::ProblemDescriptionAndRQ, "a");
        let ctx = p.neighborhood_context(&a).unwrap();
        assert_eq!(ctx.nodes.len(), 1);
        assert!(ctx.edges.is_empty());
        assert!(matches!(p.neighborhood_context("x"), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn brief_selection_groups_and_induced_edges() {
        let (rt, mut p) = project();
        let r1 = node(&mut p, &rt, FacetType::ProblemDescriptionAndRQ, "r1");
        let r2 = node(&mut p, &rt, FacetType::ProblemDescriptionAndRQ, "r2");
        let d = node(&mut p, &rt, FacetType::ProposedDesignAndSolution, "d");
        let other = node(&mut p, &rt, FacetType::EvaluationMethod, "e");
        p.link_nodes(&rt, &r1, &d).unwrap();
        p.link_nodes(&rt, &r2, &d).unwrap();
        p.link_nodes(&rt, &d, &other).unwrap();
        let sel = p.select_brief_subgraph(&[d.clone(), r2.clone(), r1.clone()]).unwrap();
        assert_eq!(sel.group(FacetType::ProblemDescriptionAndRQ).len(), 2);
        assert_eq!(sel.group(FacetType::ProposedDesignAndSolution).len(), 1);
        assert!(sel.group(FacetType::EvaluationMethod).is_empty());
        assert_eq!(sel.edges.len(), 2);
        let again = p.select_brief_subgraph(&[r1, d, r2.clone(), r2]).unwrap();
        assert_eq!(sel, again);
        assert_eq!(
            p.select_brief_subgraph::<String>(&[]).unwrap_err(),
            Error::EmptySelection
        );
    }

    #[test]
    fn revision_conflict_on_conditional_update() {
        let (rt, mut p) = project();
        let a = node(&mut p, &rt, FacetType::ProblemDescriptionAndRQ, "a");
        let patch = NodePatch {
            content: Some("new".into()),
            ..Default::default()
        };
        let err = p.update_node(&rt, &a, patch.clone(), Some(0)).unwrap_err();
        assert!(matches!(err, Error::RevisionConflict { expected: 0, actual: 1 }));
        p.update_node(&rt, &a, patch, Some(1)).unwrap();
        assert_eq!(p.node(&a).unwrap().revised_at, 2);
    }

    #[test]
    fn edit_after_assessment_marks_edge_stale() {
        let (rt, mut p) = project();
        let a = node(&mut p, &rt, FacetType::ProblemDescriptionAndRQ, "a");
        let b = node(&mut p, &rt, FacetType::ProposedDesignAndSolution, "b");
        let e = p.link_nodes(&rt, &a, &b).unwrap();
        let e = p
            .record_edge_assessment(&rt, &e.id, 0.8, "ok".into(), json!({}))
            .unwrap();
        assert!(!p.edge_is_stale(&e));
        // moving is not an edit
        p.update_node(&rt, &a, NodePatch { position: Some(Position::new(5.0, 5.0)), ..Default::default() }, None)
            .unwrap();
        assert!(!p.edge_is_stale(&e));
        p.update_node(&rt, &b, NodePatch { content: Some("changed".into()), ..Default::default() }, None)
            .unwrap();
        assert!(p.edge_is_stale(&e));
        assert!(e.assessed_at_revision.unwrap() < p.revision);
    }

    #[test]
    fn out_of_range_strength_not_stored() {
        let (rt, mut p) = project();
        let a = node(&mut p, &rt, FacetType::ProblemDescriptionAndRQ, "a");
        let b = node(&mut p, &rt, FacetType::ProposedDesignAndSolution, "b");
        let e = p.link_nodes(&rt, &a, &b).unwrap();
        assert!(p.record_edge_assessment(&rt, &e.id, 1.5, "x".into(), json!({})).is_err());
        assert_eq!(p.edge(&e.id).unwrap().strength, None);
    }
}
