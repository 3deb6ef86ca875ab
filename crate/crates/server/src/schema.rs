//! The description document served at `/api/schema`.

use serde_json::{json, Map, Value};

pub struct Endpoint {
    pub method: &'static str,
    pub path: &'static str,
    pub summary: &'static str,
    pub body: Option<Value>,
}

fn ep(method: &'static str, path: &'static str, summary: &'static str, body: Option<Value>) -> Endpoint {
    Endpoint {
        method,
        path,
        summary,
        body,
    }
}

fn object(required: &[&str], props: Value) -> Value {
    json!({"type": "object", "required": required, "properties": props, "additionalProperties": false})
}

fn position() -> Value {
    json!({"type": "object", "properties": {"x": {"type": "number"}, "y": {"type": "number"}}})
}

pub fn endpoints() -> Vec<Endpoint> {
    let name = || Some(object(&["name"], json!({"name": {"type": "string"}})));
    vec![
        ep("get", "/api/schema", "This document", None),
        ep("get", "/projects", "List projects", None),
        ep("post", "/projects", "Create a project", name()),
        ep("post", "/projects/import", "Import a saved project document", Some(json!({"type": "object"}))),
        ep("get", "/projects/{pid}", "Full project state", None),
        ep("patch", "/projects/{pid}", "Rename a project", name()),
        ep("delete", "/projects/{pid}", "Delete a project", None),
        ep("get", "/projects/{pid}/export", "The persisted project document", None),
        ep("get", "/projects/{pid}/nodes", "List nodes", None),
        ep(
            "post",
            "/projects/{pid}/nodes",
            "Create a node",
            Some(object(
                &["facet"],
                json!({"facet": {"type": "string"}, "title": {"type": "string"},
                       "content": {"type": "string"}, "position": position()}),
            )),
        ),
        ep("get", "/projects/{pid}/nodes/{nid}", "One node", None),
        ep(
            "patch",
            "/projects/{pid}/nodes/{nid}",
            "Edit a node; a stale expectedRevision is a 409",
            Some(object(
                &[],
                json!({"facet": {"type": "string"}, "title": {"type": "string"}, "content": {"type": "string"},
                       "position": position(), "expectedRevision": {"type": "integer", "minimum": 0}}),
            )),
        ),
        ep("delete", "/projects/{pid}/nodes/{nid}", "Delete a node and its edges", None),
        ep("get", "/projects/{pid}/edges", "List edges", None),
        ep(
            "post",
            "/projects/{pid}/edges",
            "Link two nodes",
            Some(object(
                &["source", "target"],
                json!({"source": {"type": "string"}, "target": {"type": "string"}}),
            )),
        ),
        ep("get", "/projects/{pid}/edges/{eid}", "One edge", None),
        ep("delete", "/projects/{pid}/edges/{eid}", "Delete an edge", None),
        ep("get", "/projects/{pid}/briefs", "List research briefs", None),
        ep("delete", "/projects/{pid}/briefs/{bid}", "Delete a research brief", None),
        ep(
            "post",
            "/projects/{pid}/brief",
            "Generate a research brief from selected nodes",
            Some(object(
                &["nodeIds"],
                json!({"nodeIds": {"type": "array", "items": {"type": "string"}, "minItems": 1}}),
            )),
        ),
        ep("get", "/projects/{pid}/papers", "The paper collection in order", None),
        ep(
            "post",
            "/projects/{pid}/papers/search",
            "Search the scholarly index",
            Some(object(
                &["query"],
                json!({"query": {"type": "string"}, "limit": {"type": "integer", "minimum": 1}}),
            )),
        ),
        ep("get", "/projects/{pid}/papers/recommend", "Recommendations from the collection", None),
        ep("post", "/projects/{pid}/papers/recommend", "Recommendations from the collection", None),
        ep(
            "post",
            "/projects/{pid}/papers/ingest",
            "Ingest a search result into the collection",
            Some(object(
                &["corpusId", "title", "ingestState"],
                json!({"corpusId": {"type": "string"}, "title": {"type": "string"},
                       "authors": {"type": "array", "items": {"type": "string"}}, "year": {"type": "integer"},
                       "abstract": {"type": "string"}, "tldr": {"type": "string"},
                       "openAccessPdfUrl": {"type": "string"}, "ingestState": {"type": "string"},
                       "facetSummaries": {"type": "object"}}),
            )),
        ),
        ep("delete", "/projects/{pid}/papers/{cid}", "Remove a paper from the collection", None),
        ep("post", "/projects/{pid}/lit/summary", "Summarize the collection", None),
        ep("post", "/projects/{pid}/lit/analysis", "Analyze the collection against the canvas", None),
        ep(
            "post",
            "/projects/{pid}/qa",
            "Answer a question about papers and ideas",
            Some(object(&["prompt"], json!({"prompt": {"type": "string"}}))),
        ),
        ep(
            "post",
            "/projects/{pid}/chain",
            "Turn a suggestion into a chain of facet nodes",
            Some(object(
                &["suggestionText"],
                json!({"suggestionText": {"type": "string"}, "position": position(),
                       "startFacet": {"type": "string"}}),
            )),
        ),
        ep("post", "/nodes/{nid}/suggestions", "Suggestions for a node", None),
        ep(
            "post",
            "/nodes/{nid}/generate",
            "Regenerate, branch or extend from a node",
            Some(object(
                &["action"],
                json!({"action": {"type": "string"}, "facet": {"type": "string"},
                       "userPrompt": {"type": "string"}, "suggestion": {"type": "string"}}),
            )),
        ),
        ep("post", "/nodes/{nid}/lit-analysis", "Literature analysis of a node", None),
        ep("post", "/edges/{eid}/assess", "Assess the strength of an edge", None),
    ]
}

pub fn document() -> Value {
    let mut paths = Map::new();
    for e in endpoints() {
        let mut op = json!({
            "summary": e.summary,
            "responses": {"default": {"content": {"application/json": {"schema": {"$ref": "#/components/schemas/ApiEnvelope"}}}}},
        });
        if let Some(body) = e.body {
            op["requestBody"] = json!({"required": true, "content": {"application/json": {"schema": body}}});
        }
        let entry = paths.entry(e.path).or_insert_with(|| json!({}));
        entry[e.method] = op;
    }
    json!({
        "openapi": "3.0.3",
        "info": {"title": "ideaweave", "version": env!("CARGO_PKG_VERSION")},
        "paths": paths,
        "components": {"schemas": {"ApiEnvelope": {
            "type": "object",
            "required": ["ok", "revision"],
            "properties": {
                "ok": {"type": "boolean"},
                "data": {},
                "error": {"type": "object", "required": ["code", "message"],
                          "properties": {"code": {"type": "string"}, "message": {"type": "string"}}},
                "revision": {"type": "integer", "nullable": true}
            }
        }}}
    })
}
