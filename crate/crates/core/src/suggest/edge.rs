use super::{dangling_in, EdgeAssessment};
use crate::error::{Error, Result};
use crate::gateway::ask_json;
use crate::prompt::{format_node, ContextBundle, TemplateId};
use crate::Studio;
use serde_json::json;

impl Studio {
    /// Rates how well an edge's two facets connect and stores the result on
    /// the edge. Out-of-range strengths are clamped into `[0, 1]`.
    pub fn evaluate_edge(&self, project_id: &str, edge_id: &str) -> Result<EdgeAssessment> {
        let snapshot = self.project(project_id)?;
        let edge = snapshot.require_edge(edge_id)?.clone();
        let source = snapshot.require_node(&edge.source)?;
        let target = snapshot.require_node(&edge.target)?;
        for node in [source, target] {
            if !node.has_content() {
                return Err(Error::EmptyFacetContent(node.id.clone()));
            }
        }
        let bundle = ContextBundle::new()
            .with("source_node_data", format_node(source))
            .with("target_node_data", format_node(target));
        let reply = self.with_session(project_id, |s| ask_json(self.gateway(), s, TemplateId::EdgeGeneration, &bundle))?;

        let raw = reply.value["connectionStrength"]
            .as_f64()
            .ok_or_else(|| Error::MalformedResponse("connectionStrength is not a number".into()))?;
        let strength = raw.clamp(0.0, 1.0);
        let suggestion = reply.value["suggestion"].as_str().unwrap_or_default().to_string();
        let dangling = dangling_in(&suggestion, &snapshot);

        self.commit_generation(project_id, snapshot.revision, |p, stale| {
            let mut payload = json!({
                "danglingCitations": dangling,
                "repairs": reply.repairs_applied,
                "contextStale": stale,
            });
            if strength != raw {
                tracing::info!(edge_id, raw, strength, "clamped connection strength");
                payload["clamped"] = json!({ "from": raw, "to": strength });
            }
            p.record_edge_assessment(self.runtime(), edge_id, strength, suggestion.clone(), payload)?;
            Ok(EdgeAssessment {
                connection_strength: strength,
                suggestion,
            })
        })
    }
}
