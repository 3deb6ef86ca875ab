//! Oracles and generators shared by the integration suites and the
//! acceptance gate. Everything here is written independently of the code
//! under test.

#![allow(dead_code)]

use ideaweave_core::graph::{FacetType, NodePatch, Position, Project};
use ideaweave_core::library::{IngestState, PaperRecord};
use ideaweave_core::runtime::Runtime;
use rand::seq::IndexedRandom;
use rand::{Rng, RngCore};
use serde_json::{json, Value};
use std::collections::BTreeSet;

// ---- citation tags ----

/// One piece of a scanned string: plain text or the id inside a tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Piece {
    Text(String),
    Tag(String),
}

/// Char-by-char scanner: at each position try to read `@ref[`, then one or
/// more characters that are neither bracket, then `]`. On failure the `@`
/// is plain text and scanning resumes at the next character.
pub fn naive_scan(text: &str) -> Vec<Piece> {
    let chars: Vec<char> = text.chars().collect();
    let open: Vec<char> = "@ref[".chars().collect();
    let mut out: Vec<Piece> = Vec::new();
    let mut buf = String::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i..].starts_with(&open) {
            let mut j = i + open.len();
            let mut id = String::new();
            while j < chars.len() && chars[j] != '[' && chars[j] != ']' {
                id.push(chars[j]);
                j += 1;
            }
            if j < chars.len() && chars[j] == ']' && !id.is_empty() {
                if !buf.is_empty() {
                    out.push(Piece::Text(std::mem::take(&mut buf)));
                }
                out.push(Piece::Tag(id));
                i = j + 1;
                continue;
            }
        }
        buf.push(chars[i]);
        i += 1;
    }
    if !buf.is_empty() {
        out.push(Piece::Text(buf));
    }
    out
}

pub fn naive_tags(text: &str) -> Vec<String> {
    naive_scan(text)
        .into_iter()
        .filter_map(|p| match p {
            Piece::Tag(id) => Some(id),
            Piece::Text(_) => None,
        })
        .collect()
}

/// Tag ids in `text` that are not in `collection`.
pub fn naive_dangling(text: &str, collection: &BTreeSet<String>) -> BTreeSet<String> {
    naive_tags(text).into_iter().filter(|id| !collection.contains(id)).collect()
}

/// Random text built from fragments that stress the tag grammar, with
/// well-formed tags over `ids` injected.
pub fn random_tagged_text(rng: &mut impl Rng, ids: &[String]) -> String {
    const FRAGMENTS: [&str; 16] = [
        "@ref[", "@ref", "@", "[", "]", "@ref[]", "@re[1]", " ", "é", "漢字", "\n", "see ", "(", ")", "@ref[[", "ref[",
    ];
    let mut out = String::new();
    for _ in 0..rng.random_range(0..24) {
        match rng.random_range(0..10) {
            0..=2 if !ids.is_empty() => out.push_str(&format!("@ref[{}]", ids.choose(rng).unwrap())),
            3..=6 => out.push_str(FRAGMENTS.choose(rng).unwrap()),
            _ => {
                let n = rng.random_range(1..6);
                out.extend((0..n).map(|_| char::from(b'a' + rng.random_range(0..26u8))));
            }
        }
    }
    out
}

// ---- templates ----

/// Fills `{slot}` references by plain string replacement and unescapes
/// doubled braces, protecting the escapes with placeholder characters.
pub fn substitute(body: &str, values: &[(&str, &str)]) -> String {
    let mut text = body.replace("{{", "\u{1}").replace("}}", "\u{2}");
    for (slot, value) in values {
        let value = value.replace('{', "\u{3}").replace('}', "\u{4}");
        text = text.replace(&format!("{{{slot}}}"), &value);
    }
    text.replace('\u{1}', "{")
        .replace('\u{2}', "}")
        .replace('\u{3}', "{")
        .replace('\u{4}', "}")
}

/// The two example replies embedded in the edge template, unescaped.
pub fn edge_template_examples() -> Vec<String> {
    let body = ideaweave_core::prompt::TemplateId::EdgeGeneration
        .body()
        .replace("{{", "{")
        .replace("}}", "}");
    let start = body.find("Here are two example responses:").unwrap();
    let mut out = Vec::new();
    let mut rest = &body[start..];
    while let Some(open) = rest.find("{\n    \"connectionStrength\"") {
        let close = rest[open..].find("\n}").unwrap() + open + 2;
        out.push(rest[open..close].to_string());
        rest = &rest[close..];
    }
    out
}

// ---- projects ----

pub fn random_string(rng: &mut impl Rng, max: usize) -> String {
    const ALPHABET: [&str; 12] = ["a", "b", "Z", " ", "\"", "\\", "\n", "é", "😀", "{", "@ref[7]", "\u{0}"];
    (0..rng.random_range(0..=max)).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

pub fn random_facet(rng: &mut impl Rng) -> FacetType {
    *FacetType::ALL.choose(rng).unwrap()
}

pub fn random_position(rng: &mut impl Rng) -> Position {
    let coord = |rng: &mut dyn RngCore| match rng.next_u32() % 3 {
        0 => f64::from(rng.next_u32() % 2000) - 1000.0,
        1 => (rng.next_u64() as f64 / u64::MAX as f64 - 0.5) * 1e6,
        _ => f64::from_bits(0x3ff0_0000_0000_0000 | (rng.next_u64() >> 12)) - 1.5,
    };
    Position::new(coord(rng), coord(rng))
}

pub fn fallback_paper(id: &str, title: &str) -> PaperRecord {
    let mut p = PaperRecord::metadata(id, title);
    p.ingest_state = IngestState::Fallback;
    p.r#abstract = Some(format!("Abstract of {title}."));
    p
}

/// Applies `steps` random edits; failing edits are part of the sequence.
pub fn random_project(rng: &mut impl Rng, rt: &Runtime, steps: usize) -> Project {
    let mut p = Project::new(rt, random_string(rng, 12));
    for _ in 0..steps {
        let node_ids: Vec<String> = p.nodes.iter().map(|n| n.id.clone()).collect();
        let edge_ids: Vec<String> = p.edges.iter().map(|e| e.id.clone()).collect();
        let pick = |rng: &mut dyn RngCore, ids: &[String]| -> String {
            if ids.is_empty() || rng.next_u32().is_multiple_of(10) {
                "missing".into()
            } else {
                ids[rng.next_u32() as usize % ids.len()].clone()
            }
        };
        let _ = match rng.random_range(0..11) {
            0..=2 => {
                let (f, t, c, pos) = (
                    random_facet(rng),
                    random_string(rng, 10),
                    random_string(rng, 30),
                    random_position(rng),
                );
                p.create_node(rt, f, t, c, pos).map(drop)
            }
            3 => {
                let id = pick(rng, &node_ids);
                let patch = NodePatch {
                    facet: rng.random_bool(0.3).then(|| random_facet(rng)),
                    title: rng.random_bool(0.5).then(|| random_string(rng, 10)),
                    content: rng.random_bool(0.5).then(|| random_string(rng, 30)),
                    position: rng.random_bool(0.5).then(|| random_position(rng)),
                };
                p.update_node(rt, &id, patch, None).map(drop)
            }
            4 => {
                let id = pick(rng, &node_ids);
                p.delete_node(rt, &id)
            }
            5 | 6 => {
                let (a, b) = (pick(rng, &node_ids), pick(rng, &node_ids));
                p.link_nodes(rt, &a, &b).map(drop)
            }
            7 => {
                let id = pick(rng, &edge_ids);
                p.delete_edge(rt, &id)
            }
            8 => {
                let id = pick(rng, &edge_ids);
                let s = rng.random::<f64>();
                p.record_edge_assessment(rt, &id, s, random_string(rng, 20), json!({})).map(drop)
            }
            9 => {
                let id = rng.random_range(1..40).to_string();
                if rng.random_bool(0.7) {
                    p.add_paper(rt, fallback_paper(&id, &random_string(rng, 12)))
                } else {
                    p.remove_paper(rt, &id)
                }
            }
            _ => {
                p.rename(rt, random_string(rng, 12));
                Ok(())
            }
        };
    }
    p
}

// ---- corruption ----

pub const CORRUPTIONS: [&str; 11] = [
    "truncated",
    "not-an-object",
    "missing-version",
    "future-version",
    "missing-field",
    "unknown-field",
    "wrong-type",
    "dangling-edge",
    "duplicate-node",
    "strength-out-of-range",
    "orphan-paper-record",
];

/// A project with at least two nodes, one edge and one paper.
pub fn corruption_base(rt: &Runtime) -> Project {
    let mut p = Project::new(rt, "base");
    let a = p
        .create_node(rt, FacetType::ProblemDescriptionAndRQ, "a", "x", Position::default())
        .unwrap();
    let b = p
        .create_node(rt, FacetType::EvaluationMethod, "b", "y", Position::new(1.0, 2.0))
        .unwrap();
    let e = p.link_nodes(rt, &a.id, &b.id).unwrap();
    p.record_edge_assessment(rt, &e.id, 0.4, "ok".into(), json!({})).unwrap();
    p.add_paper(rt, fallback_paper("11", "Paper")).unwrap();
    p
}

/// Applies one corruption class to a saved document.
pub fn corrupt(document: &str, class: &str) -> String {
    if class == "truncated" {
        return document[..document.len() / 2].to_string();
    }
    let mut v: Value = serde_json::from_str(document).unwrap();
    match class {
        "not-an-object" => v = json!([v]),
        "missing-version" => {
            v.as_object_mut().unwrap().remove("schemaVersion");
        }
        "future-version" => v["schemaVersion"] = json!(99),
        "missing-field" => {
            v.as_object_mut().unwrap().remove("nodes");
        }
        "unknown-field" => v["nodes"][0]["color"] = json!("red"),
        "wrong-type" => v["revision"] = json!("seven"),
        "dangling-edge" => v["edges"][0]["target"] = json!("no-such-node"),
        "duplicate-node" => {
            let first = v["nodes"][0].clone();
            v["nodes"].as_array_mut().unwrap().push(first);
        }
        "strength-out-of-range" => v["edges"][0]["strength"] = json!(1.5),
        "orphan-paper-record" => {
            v["paperIds"] = json!([]);
        }
        other => panic!("unknown corruption class {other}"),
    }
    serde_json::to_string_pretty(&v).unwrap()
}

// ---- generation fuzzing ----

pub mod fuzz {
    use super::*;
    use ideaweave_core::gateway::Gateway;
    use ideaweave_core::suggest::{GenerationAction, GenerationRequest};
    use ideaweave_core::testkit::{offline_studio, QueueProvider};
    use ideaweave_core::Studio;
    use std::sync::Arc;

    pub const POOL: [&str; 8] = ["101", "102", "103", "104", "105", "106", "107", "108"];

    pub fn pool_title(id: &str) -> String {
        format!("Paper number {id} on writing support")
    }

    fn maybe_fence(rng: &mut impl Rng, body: String) -> String {
        match rng.random_range(0..4) {
            0 => format!("```json\n{body}\n```"),
            1 => format!("Sure, here it is:\n{body}\nHope this helps."),
            _ => body,
        }
    }

    pub struct Bench {
        pub studio: Studio,
        pub queue: Arc<QueueProvider>,
        pub pid: String,
    }

    impl Bench {
        pub fn new(seed: u64) -> Self {
            let queue = Arc::new(QueueProvider::default());
            let studio = offline_studio(Gateway::live(queue.clone()), seed);
            let pid = studio.create_project("fuzz").unwrap().id;
            Self { studio, queue, pid }
        }

        pub fn project(&self) -> Project {
            self.studio.project(&self.pid).unwrap()
        }

        pub fn node(&self, facet: FacetType, content: &str) -> String {
            self.studio
                .create_node(&self.pid, facet, "t", content, Position::default())
                .unwrap()
                .id
        }

        pub fn collect(&self, ids: &[&str]) {
            for id in ids {
                let mut p = PaperRecord::metadata(*id, pool_title(id));
                p.r#abstract = Some("An abstract.".into());
                self.studio.add_paper(&self.pid, p).unwrap();
            }
        }
    }

    // -- clamps --

    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum ClampEndpoint {
        Regenerate,
        Alternatives,
        NewFacet,
        NodeAnalysis,
        Suggestions,
    }

    pub const CLAMP_ENDPOINTS: [ClampEndpoint; 5] = [
        ClampEndpoint::Regenerate,
        ClampEndpoint::Alternatives,
        ClampEndpoint::NewFacet,
        ClampEndpoint::NodeAnalysis,
        ClampEndpoint::Suggestions,
    ];

    /// Bounds from the cardinality rules, restated here.
    pub fn bound(endpoint: ClampEndpoint) -> (usize, usize) {
        match endpoint {
            ClampEndpoint::Regenerate => (1, 0),
            ClampEndpoint::Alternatives | ClampEndpoint::NewFacet => (3, 0),
            ClampEndpoint::NodeAnalysis => (3, 2),
            ClampEndpoint::Suggestions => (5, 0),
        }
    }

    fn node_items(rng: &mut impl Rng, expected: FacetType) -> (Value, usize) {
        let n = rng.random_range(1..=8);
        let mut usable = 0;
        let items: Vec<Value> = (0..n)
            .map(|i| {
                let label = match rng.random_range(0..5) {
                    0 => FacetType::ALL.iter().find(|f| **f != expected).unwrap().label().to_string(),
                    1 => "Something Else Entirely".to_string(),
                    _ => expected.label().to_string(),
                };
                if FacetType::parse_label(&label).is_none_or(|f| f == expected) {
                    usable += 1;
                }
                json!({"ideaFacet": label, "title": format!("n{i}"), "content": format!("c{i}")})
            })
            .collect();
        (json!({ "new_nodes": items }), usable)
    }

    /// One randomized response through one endpoint; checks the stored
    /// counts against the bound and against the count of usable items.
    pub fn clamp_trial(seed: u64, endpoint: ClampEndpoint) -> Result<(), String> {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let bench = Bench::new(seed);
        let (max, max2) = bound(endpoint);
        match endpoint {
            ClampEndpoint::Regenerate | ClampEndpoint::Alternatives | ClampEndpoint::NewFacet => {
                let parent = bench.node(FacetType::ProblemDescriptionAndRQ, "question");
                let source = bench.node(FacetType::ProposedDesignAndSolution, "design");
                bench.studio.link_nodes(&bench.pid, &parent, &source).unwrap();
                let (action, expected) = match endpoint {
                    ClampEndpoint::Regenerate => (GenerationAction::Regenerate, FacetType::ProposedDesignAndSolution),
                    ClampEndpoint::Alternatives => (GenerationAction::Alternatives, FacetType::ProposedDesignAndSolution),
                    _ => (
                        GenerationAction::NewFacet(FacetType::EvaluationMethod),
                        FacetType::EvaluationMethod,
                    ),
                };
                let (body, usable) = node_items(&mut rng, expected);
                bench.queue.push(maybe_fence(&mut rng, body.to_string()));
                let before = bench.project().nodes.len();
                let result = bench.studio.generate_nodes(&bench.pid, &source, GenerationRequest::new(action));
                let stored = bench.project().nodes.len() - before;
                let want = usable.min(max);
                if stored > max {
                    return Err(format!("{endpoint:?} stored {stored} > {max}"));
                }
                if stored != want {
                    return Err(format!("{endpoint:?} stored {stored}, expected {want} ({usable} usable)"));
                }
                if usable == 0 && result.is_ok() {
                    return Err(format!("{endpoint:?} accepted a reply with no usable node"));
                }
            }
            ClampEndpoint::NodeAnalysis => {
                bench.collect(&["101"]);
                let node = bench.node(FacetType::ProblemDescriptionAndRQ, "question");
                bench
                    .queue
                    .push(json!({"litReviewSummary": "s", "corpusIds": ["101"]}).to_string());
                let (k1, k2) = (rng.random_range(1..=7), rng.random_range(1..=6));
                let sections: Vec<Value> = (0..k1)
                    .map(|i| json!({"section_title": format!("s{i}"), "paper_title": "p @ref[101]",
                                    "key_section": "k", "connection_to_ideas": "c"}))
                    .collect();
                let suggestions: Vec<String> = (0..k2).map(|i| format!("do {i}")).collect();
                let body = json!({"most_relevant_sections": sections, "suggestions": suggestions});
                bench.queue.push(maybe_fence(&mut rng, body.to_string()));
                bench
                    .studio
                    .node_literature_analysis(&bench.pid, &node)
                    .map_err(|e| e.to_string())?;
                let p = bench.project();
                let cache = p.node(&node).unwrap().node_analysis_cache.clone().unwrap();
                let (s, g) = (cache.most_relevant_sections.len(), cache.suggestions.len());
                if s > max || g > max2 || s != k1.min(max) || g != k2.min(max2) {
                    return Err(format!("node analysis stored {s}/{g} from {k1}/{k2}"));
                }
            }
            ClampEndpoint::Suggestions => {
                let node = bench.node(FacetType::ProblemDescriptionAndRQ, "question");
                let k = rng.random_range(1..=9);
                let actions = ["Regenerate Current Idea Facet", "Generate Alternatives", "Generate New Idea Facets"];
                let items: Vec<Value> = (0..k)
                    .map(|i| json!({"idea_facet": random_facet(&mut rng).label(),
                                    "action": actions.choose(&mut rng).unwrap(),
                                    "suggestion": format!("idea {i}")}))
                    .collect();
                bench
                    .queue
                    .push(maybe_fence(&mut rng, json!({"ai_suggestion": items}).to_string()));
                bench.studio.node_suggestions(&bench.pid, &node).map_err(|e| e.to_string())?;
                let p = bench.project();
                let n = p.node(&node).unwrap().suggestion_cache.as_ref().unwrap().items.len();
                if n > max || n != k.min(max) {
                    return Err(format!("suggestions stored {n} from {k}"));
                }
            }
        }
        if bench.queue.remaining() != 0 {
            return Err("scripted replies left unused".into());
        }
        Ok(())
    }

    // -- grounding --

    fn random_id(rng: &mut impl Rng) -> String {
        match rng.random_range(0..3) {
            0 => format!("9{}", rng.random_range(0..1000)),
            _ => POOL.choose(rng).unwrap().to_string(),
        }
    }

    fn tagged(rng: &mut impl Rng) -> String {
        let mut out = String::from("text");
        for _ in 0..rng.random_range(0..4) {
            let sep = *["; ", " ", "@ref[] ", " [2] "].choose(rng).unwrap();
            out.push_str(&format!("{sep}@ref[{}]", random_id(rng)));
        }
        out
    }

    fn id_value(rng: &mut impl Rng) -> Value {
        let id = random_id(rng);
        if rng.random_bool(0.3) {
            json!(id.parse::<u64>().unwrap())
        } else {
            json!(id)
        }
    }

    fn title_value(rng: &mut impl Rng) -> String {
        let id = random_id(rng);
        let title = pool_title(&id);
        match rng.random_range(0..3) {
            0 => title.to_uppercase(),
            1 => format!("{title}."),
            _ => title,
        }
    }

    pub const GROUNDING_ENDPOINTS: [&str; 8] = [
        "suggestions",
        "generate",
        "edge",
        "summary",
        "analysis",
        "nodeAnalysis",
        "qa",
        "brief",
    ];

    /// Stored free text of the artifact the endpoint produced.
    fn artifact_texts(p: &Project, endpoint: &str, node: &str, payload: &Value) -> Vec<String> {
        match endpoint {
            "suggestions" => p.node(node).unwrap().suggestion_cache.iter().flat_map(|s| s.items.iter().map(|i| i.suggestion.clone())).collect(),
            "generate" => payload["nodeIds"]
                .as_array()
                .into_iter()
                .flatten()
                .map(|id| p.node(id.as_str().unwrap()).unwrap().content.clone())
                .collect(),
            "edge" => p.edges.iter().filter_map(|e| e.suggestion.clone()).collect(),
            "summary" => p.literature_summary.iter().map(|s| s.text.clone()).collect(),
            "analysis" => p
                .literature_analysis
                .iter()
                .flat_map(|a| &a.items)
                .flat_map(|i| {
                    let mut v = vec![i.section_title.clone(), i.paper_title.clone(), i.key_section.clone(), i.connection_to_ideas.clone()];
                    v.extend(i.next_steps.clone());
                    v
                })
                .collect(),
            "nodeAnalysis" => p
                .node(node)
                .unwrap()
                .node_analysis_cache
                .iter()
                .flat_map(|c| {
                    let mut v: Vec<String> = c
                        .most_relevant_sections
                        .iter()
                        .flat_map(|s| [s.section_title.clone(), s.paper_title.clone(), s.key_section.clone(), s.connection_to_ideas.clone()])
                        .collect();
                    v.extend(c.suggestions.clone());
                    v
                })
                .collect(),
            "qa" => p.chat_history.last().map(|m| m.text.clone()).into_iter().collect(),
            "brief" => p
                .briefs
                .last()
                .map(|b| vec![b.title.clone(), b.problem_description.clone(), b.proposed_design.clone(), b.evaluation_method.clone(), b.contribution_impact.clone()])
                .unwrap_or_default(),
            other => panic!("unknown endpoint {other}"),
        }
    }

    fn response(rng: &mut impl Rng, endpoint: &str) -> Value {
        let n = rng.random_range(1..4);
        match endpoint {
            "suggestions" => json!({"ai_suggestion": (0..n).map(|_| json!({
                "idea_facet": "Problem Description and RQ", "action": "Generate Alternatives", "suggestion": tagged(rng)})).collect::<Vec<_>>()}),
            "generate" => json!({"new_nodes": (0..n).map(|_| json!({
                "ideaFacet": "Evaluation Method", "title": "t", "content": tagged(rng)})).collect::<Vec<_>>()}),
            "edge" => json!({"connectionStrength": rng.random::<f64>(), "suggestion": tagged(rng)}),
            "summary" => json!({"litReviewSummary": tagged(rng), "corpusIds": (0..n + 1).map(|_| id_value(rng)).collect::<Vec<_>>()}),
            "analysis" => json!({"analysis": (0..n).map(|_| json!({
                "section_title": tagged(rng), "paper_title": tagged(rng), "corpus_id": id_value(rng),
                "key_section": tagged(rng), "connection_to_ideas": tagged(rng), "next_steps": [tagged(rng)]})).collect::<Vec<_>>()}),
            "nodeAnalysis" => json!({"most_relevant_sections": (0..n).map(|_| json!({
                "section_title": tagged(rng), "paper_title": tagged(rng), "key_section": tagged(rng),
                "connection_to_ideas": tagged(rng)})).collect::<Vec<_>>(), "suggestions": [tagged(rng), tagged(rng)]}),
            "qa" => json!({"litReviewResponse": tagged(rng)}),
            "brief" => json!({
                "researchBrief": {"title": tagged(rng), "problemDescription": tagged(rng), "proposedDesign": tagged(rng),
                                  "evaluationMethod": tagged(rng), "contributionImpact": tagged(rng)},
                "literatureReferences": (1..=n).map(|i| json!({"citation_id": i, "paper_title": title_value(rng)})).collect::<Vec<_>>()}),
            other => panic!("unknown endpoint {other}"),
        }
    }

    /// Every corpus id the project stores outside its collection list.
    pub fn stored_corpus_ids(p: &Project) -> Vec<String> {
        let mut ids: Vec<String> = Vec::new();
        if let Some(s) = &p.literature_summary {
            ids.extend(s.corpus_ids.clone());
        }
        if let Some(a) = &p.literature_analysis {
            ids.extend(a.items.iter().map(|i| i.corpus_id.clone()));
        }
        for n in &p.nodes {
            if let Some(c) = &n.node_analysis_cache {
                ids.extend(c.most_relevant_sections.iter().filter_map(|s| s.corpus_id.clone()));
            }
        }
        for b in &p.briefs {
            ids.extend(b.literature_references.iter().filter_map(|r| r.corpus_id.clone()));
        }
        ids
    }

    /// A random collection, one random endpoint, random tagged output.
    pub fn grounding_trial(seed: u64) -> Result<(), String> {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let bench = Bench::new(seed);
        let size = rng.random_range(1..=POOL.len());
        let collection: Vec<&str> = POOL.choose_multiple(&mut rng, size).copied().collect();
        bench.collect(&collection);
        let rq = bench.node(FacetType::ProblemDescriptionAndRQ, "question");
        let design = bench.node(FacetType::ProposedDesignAndSolution, "design");
        let edge = bench.studio.link_nodes(&bench.pid, &rq, &design).unwrap().id;
        let endpoint = *GROUNDING_ENDPOINTS.choose(&mut rng).unwrap();
        if endpoint == "nodeAnalysis" {
            bench.queue.push(response(&mut rng, "summary").to_string());
        }
        bench.queue.push(response(&mut rng, endpoint).to_string());
        let s = &bench.studio;
        let pid = bench.pid.as_str();
        let result = match endpoint {
            "suggestions" => s.node_suggestions(pid, &rq).map(drop),
            "generate" => s
                .generate_nodes(pid, &rq, GenerationRequest::new(GenerationAction::NewFacet(FacetType::EvaluationMethod)))
                .map(drop),
            "edge" => s.evaluate_edge(pid, &edge).map(drop),
            "summary" => s.literature_summary(pid).map(drop),
            "analysis" => s.literature_analysis(pid).map(drop),
            "nodeAnalysis" => s.node_literature_analysis(pid, &rq).map(drop),
            "qa" => s.answer_question(pid, "what next?").map(drop),
            _ => s.generate_research_brief(pid, &[rq.as_str(), design.as_str()]).map(drop),
        };
        result.map_err(|e| format!("{endpoint}: {e}"))?;

        let p = bench.project();
        let owned: BTreeSet<String> = p.paper_ids.iter().cloned().collect();
        let want: BTreeSet<String> = collection.iter().map(|s| s.to_string()).collect();
        if owned != want {
            return Err(format!("collection changed: {owned:?} vs {want:?}"));
        }
        if let Some(bad) = stored_corpus_ids(&p).into_iter().find(|id| !owned.contains(id)) {
            return Err(format!("{endpoint}: stored corpus id {bad} is not collected"));
        }
        let entry = p.action_log.last().unwrap();
        let flagged: BTreeSet<String> = entry.payload["danglingCitations"]
            .as_array()
            .ok_or_else(|| format!("{endpoint}: log entry {} has no danglingCitations", entry.action))?
            .iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect();
        let expected: BTreeSet<String> = artifact_texts(&p, endpoint, &rq, &entry.payload)
            .iter()
            .flat_map(|t| naive_dangling(t, &owned))
            .collect();
        if flagged != expected {
            return Err(format!("{endpoint}: flagged {flagged:?}, oracle {expected:?}"));
        }
        p.check_integrity()?;
        Ok(())
    }
}
