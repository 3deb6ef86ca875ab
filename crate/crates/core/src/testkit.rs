//! Offline stand-ins for the model, the scholarly index and PDF handling,
//! plus the scripted end-to-end session used by the replay tests and the
//! fixture recorder.

use crate::error::{Error, Result};
use crate::gateway::{ChatProvider, ChatRequest, FixtureStore, Gateway, GatewayMode, Role};
use crate::graph::{FacetType, Position};
use crate::library::{LibraryConfig, PaperLibrary, PaperRecord, PdfFetcher, ScholarIndex, Section, TextExtractor};
use crate::prompt::TemplateId;
use crate::runtime::Runtime;
use crate::suggest::{GenerationAction, GenerationRequest};
use crate::Studio;
use parking_lot::Mutex;
use serde_json::json;
use std::collections::{BTreeMap, VecDeque};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};

/// Literal text of `template` up to its first slot.
fn template_prefix(template: TemplateId) -> &'static str {
    let body = template.body();
    let cut = template
        .slots()
        .iter()
        .filter_map(|s| body.find(&format!("{{{s}}}")))
        .min()
        .unwrap_or(body.len());
    &body[..cut]
}

/// Which template rendered `prompt`, if any.
pub fn identify_template(prompt: &str) -> Option<TemplateId> {
    static PREFIXES: OnceLock<Vec<(TemplateId, &'static str)>> = OnceLock::new();
    PREFIXES
        .get_or_init(|| {
            let mut all: Vec<_> = TemplateId::ALL
                .iter()
                .filter(|t| **t != TemplateId::System)
                .map(|t| (*t, template_prefix(*t)))
                .collect();
            all.sort_by_key(|(_, p)| std::cmp::Reverse(p.len()));
            all
        })
        .iter()
        .find(|(_, prefix)| !prefix.is_empty() && prompt.starts_with(prefix))
        .map(|(t, _)| *t)
}

/// The template a request answers. A re-ask is attributed to the most
/// recent templated user turn in its window.
pub fn request_template(request: &ChatRequest) -> Option<TemplateId> {
    request
        .messages
        .iter()
        .rev()
        .filter(|t| t.role == Role::User)
        .find_map(|t| identify_template(&t.text))
}

/// One call as seen by a [`ScriptedProvider`].
pub struct ScriptCall<'a> {
    /// Zero-based index over all calls to this provider.
    pub index: usize,
    /// Template of the request, following re-asks back to their origin.
    pub template: Option<TemplateId>,
    /// True when the prompt itself is not a template (a re-ask).
    pub is_reask: bool,
    pub request: &'a ChatRequest,
}

type Responder = dyn Fn(&ScriptCall<'_>) -> Result<String> + Send + Sync;

/// Provider answering through a closure.
pub struct ScriptedProvider {
    respond: Box<Responder>,
    calls: AtomicUsize,
}

impl ScriptedProvider {
    pub fn new(respond: impl Fn(&ScriptCall<'_>) -> Result<String> + Send + Sync + 'static) -> Self {
        Self {
            respond: Box::new(respond),
            calls: AtomicUsize::new(0),
        }
    }

    /// Canned text per template; a missing template is a provider error.
    pub fn by_template(replies: BTreeMap<TemplateId, String>) -> Self {
        Self::new(move |call| {
            call.template
                .and_then(|t| replies.get(&t).cloned())
                .ok_or_else(|| Error::ProviderError(format!("no scripted reply for {:?}", call.template)))
        })
    }

    pub fn call_count(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl ChatProvider for ScriptedProvider {
    fn chat(&self, request: &ChatRequest) -> Result<String> {
        let index = self.calls.fetch_add(1, Ordering::SeqCst);
        let call = ScriptCall {
            index,
            template: request_template(request),
            is_reask: identify_template(request.prompt()).is_none(),
            request,
        };
        (self.respond)(&call)
    }
}

/// Replies in order; running dry is a provider error.
#[derive(Default)]
pub struct QueueProvider {
    replies: Mutex<VecDeque<String>>,
    seen: Mutex<Vec<ChatRequest>>,
}

impl QueueProvider {
    pub fn new<S: Into<String>>(replies: impl IntoIterator<Item = S>) -> Self {
        Self {
            replies: Mutex::new(replies.into_iter().map(Into::into).collect()),
            seen: Mutex::new(Vec::new()),
        }
    }

    pub fn push(&self, reply: impl Into<String>) {
        self.replies.lock().push_back(reply.into());
    }

    pub fn requests(&self) -> Vec<ChatRequest> {
        self.seen.lock().clone()
    }

    pub fn remaining(&self) -> usize {
        self.replies.lock().len()
    }
}

impl ChatProvider for QueueProvider {
    fn chat(&self, request: &ChatRequest) -> Result<String> {
        self.seen.lock().push(request.clone());
        self.replies
            .lock()
            .pop_front()
            .ok_or_else(|| Error::ProviderError("scripted replies exhausted".into()))
    }
}

/// Fails every call with a fixed error.
pub struct FailingProvider(pub Error);

impl ChatProvider for FailingProvider {
    fn chat(&self, _: &ChatRequest) -> Result<String> {
        Err(self.0.clone())
    }
}

/// In-memory scholarly index over a fixed paper list.
#[derive(Debug, Clone, Default)]
pub struct CannedIndex {
    pub papers: Vec<PaperRecord>,
}

impl CannedIndex {
    pub fn new(papers: Vec<PaperRecord>) -> Self {
        Self { papers }
    }
}

impl ScholarIndex for CannedIndex {
    fn search(&self, query: &str, limit: usize) -> Result<Vec<PaperRecord>> {
        let words: Vec<String> = query.split_whitespace().map(str::to_lowercase).collect();
        Ok(self
            .papers
            .iter()
            .filter(|p| {
                let hay = format!("{} {}", p.title, p.r#abstract.as_deref().unwrap_or_default()).to_lowercase();
                words.iter().any(|w| hay.contains(w.as_str()))
            })
            .take(limit)
            .cloned()
            .collect())
    }

    fn recommend(&self, positive: &[String], limit: usize) -> Result<Vec<PaperRecord>> {
        Ok(self
            .papers
            .iter()
            .filter(|p| !positive.contains(&p.corpus_id))
            .take(limit)
            .cloned()
            .collect())
    }
}

/// Serves PDF bodies from a url map. The body is `%PDF-` followed by the
/// text [`CannedExtractor`] splits into sections.
#[derive(Debug, Clone, Default)]
pub struct CannedPdfs {
    pub documents: BTreeMap<String, String>,
}

impl PdfFetcher for CannedPdfs {
    fn fetch(&self, url: &str) -> Result<Vec<u8>> {
        self.documents
            .get(url)
            .map(|text| format!("%PDF-{text}").into_bytes())
            .ok_or_else(|| Error::ExtractionFailed(format!("no PDF at {url}")))
    }
}

/// Paragraph blocks separated by blank lines; each block's first line is
/// its heading.
#[derive(Debug, Clone, Copy, Default)]
pub struct CannedExtractor;

impl TextExtractor for CannedExtractor {
    fn extract(&self, pdf: &[u8]) -> Result<Vec<Section>> {
        let text = std::str::from_utf8(pdf)
            .ok()
            .and_then(|t| t.strip_prefix("%PDF-"))
            .ok_or_else(|| Error::ExtractionFailed("not a canned PDF".into()))?;
        let sections: Vec<Section> = text
            .split("\n\n")
            .filter_map(|block| {
                let (heading, body) = block.trim().split_once('\n')?;
                Some(Section {
                    heading: heading.trim().to_string(),
                    text: body.trim().to_string(),
                })
            })
            .collect();
        if sections.is_empty() {
            return Err(Error::ExtractionFailed("canned PDF has no sections".into()));
        }
        Ok(sections)
    }
}

/// A library over canned backends.
pub fn canned_library(papers: Vec<PaperRecord>, pdfs: BTreeMap<String, String>) -> PaperLibrary {
    PaperLibrary::new(
        Arc::new(CannedIndex::new(papers)),
        Arc::new(CannedPdfs { documents: pdfs }),
        Arc::new(CannedExtractor),
        LibraryConfig::default(),
    )
}

/// In-memory studio with a seeded runtime and an empty canned library.
pub fn offline_studio(gateway: Gateway, seed: u64) -> Studio {
    Studio::builder(Arc::new(gateway), Arc::new(canned_library(Vec::new(), BTreeMap::new())))
        .runtime(Runtime::deterministic(seed))
        .build()
}

/// Gateway over a live scripted provider.
pub fn scripted_gateway(provider: impl ChatProvider + 'static) -> Gateway {
    Gateway::live(Arc::new(provider))
}

pub mod e2e {
    //! The scripted session: project, three papers, a research question,
    //! suggestions, three generated designs, three edge assessments and a
    //! brief.

    use super::*;
    use crate::graph::Project;

    pub const SEED: u64 = 7;

    /// Where the recorded fixtures and golden document live.
    pub fn fixture_dir() -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e")
    }

    pub fn golden_path() -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/e2e_project.json")
    }

    fn paper(id: &str, title: &str, authors: &[&str], year: i32, abs: &str, tldr: &str, pdf: bool) -> PaperRecord {
        let mut p = PaperRecord::metadata(id, title);
        p.authors = authors.iter().map(|a| a.to_string()).collect();
        p.year = Some(year);
        p.r#abstract = Some(abs.into());
        p.tldr = Some(tldr.into());
        if pdf {
            p.open_access_pdf_url = Some(format!("https://pdfs.example.org/{id}.pdf"));
        }
        p
    }

    pub fn papers() -> Vec<PaperRecord> {
        vec![
            paper(
                "249921",
                "Co-Writing Stories with a Language Model",
                &["Ana Ruiz", "Tom Baker"],
                2022,
                "We study how fiction writers use a language model as a drafting partner.",
                "Writers delegate drafting but keep control of plot.",
                true,
            ),
            paper(
                "258947",
                "Scaffolding Research Questions with Structured Prompts",
                &["Mei Lin"],
                2023,
                "A structured prompting interface helps novice researchers refine questions.",
                "Structure helps novices narrow research questions.",
                true,
            ),
            paper(
                "263152",
                "Canvas Interfaces for Exploratory Writing Support",
                &["Jon Park", "Ada Moss", "Lee Tran"],
                2023,
                "Node-based canvases let writers branch and compare alternatives.",
                "Canvases support branching exploration.",
                false,
            ),
        ]
    }

    pub fn pdfs() -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert(
            "https://pdfs.example.org/249921.pdf".to_string(),
            "Abstract\nWe study how fiction writers use a language model as a drafting partner.\n\n\
             Study\nTwelve writers drafted stories over two weeks.\n\n\
             Findings\nWriters delegated drafting but kept control of plot."
                .to_string(),
        );
        m.insert(
            "https://pdfs.example.org/258947.pdf".to_string(),
            "Abstract\nA structured prompting interface helps novice researchers refine questions.\n\n\
             System\nPrompts ask for scope, population and measure.\n\n\
             Evaluation\nA between-subjects study with 24 students."
                .to_string(),
        );
        m
    }

    fn summaries(prompt: &str) -> String {
        let first = prompt
            .lines()
            .skip_while(|l| *l != "Abstract")
            .nth(1)
            .unwrap_or("the paper")
            .trim_end_matches('.');
        json!({
            "Problem Description and RQ": format!("The paper asks how {}.", first.to_lowercase()),
            "Proposed Design and Solution": "A mixed-initiative interface that splits the task into steps.",
            "Evaluation Method": "A lab study with think-aloud and interviews.",
            "Contribution and Impact": "Design implications for writing support tools.",
            "Limitation and Future Work": "Small sample; longer deployments are needed.",
        })
        .to_string()
    }

    /// Canned model behaviour for the session. Edge assessments alternate
    /// through the two documented example strengths and one mid value.
    pub fn responder() -> ScriptedProvider {
        let edges = AtomicUsize::new(0);
        ScriptedProvider::new(move |call| {
            let template = call.template.ok_or_else(|| Error::ProviderError("unscripted prompt".into()))?;
            Ok(match template {
                TemplateId::PaperProcessing => summaries(call.request.prompt()),
                TemplateId::NodeSuggestion => json!({"ai_suggestion": [
                    {"idea_facet": "Proposed Design and Solution", "action": "Generate New Idea Facets",
                     "suggestion": "Sketch a canvas that lets writers branch drafts, as in @ref[263152]."},
                    {"idea_facet": "Problem Description and RQ", "action": "Regenerate Current Idea Facet",
                     "suggestion": "Narrow the question to novice researchers @ref[258947]."}
                ]})
                .to_string(),
                TemplateId::NodeGeneration => format!(
                    "```json\n{}\n```",
                    json!({"new_nodes": [
                        {"ideaFacet": "Proposed Design and Solution", "title": "Branching canvas",
                         "content": "A canvas where each facet is a node and alternatives branch side by side @ref[263152]."},
                        {"ideaFacet": "Proposed Design", "title": "Guided question builder",
                         "content": "Structured prompts ask for scope, population and measure @ref[258947]."},
                        {"ideaFacet": "Proposed Design and Solution", "title": "Drafting partner",
                         "content": "A model drafts paragraphs that the writer accepts or edits @ref[249921]."}
                    ]})
                ),
                TemplateId::EdgeGeneration => {
                    let strength = [0.8, 0.3, 0.65][edges.fetch_add(1, Ordering::SeqCst) % 3];
                    json!({"connectionStrength": strength,
                           "suggestion": if strength > 0.5 {
                               "The connection is relatively strong. Make the measured outcome explicit."
                           } else {
                               "The connection is weak. Consider framing the question more broadly, like in paper @ref[258947]."
                           }})
                    .to_string()
                }
                TemplateId::BriefGeneration => json!({
                    "researchBrief": {
                        "title": "Structured Canvases for Early Research Ideation",
                        "problemDescription": "Novice researchers struggle to scope questions [2].",
                        "proposedDesign": "A branching canvas [3] with guided prompts [2] and a drafting partner [1].",
                        "evaluationMethod": "A within-subjects lab study comparing the canvas to a document baseline.",
                        "contributionImpact": "Evidence on how structure shapes early ideation [1, 3]."
                    },
                    "literatureReferences": [
                        {"citation_id": 1, "paper_title": "Co-Writing Stories with a Language Model"},
                        {"citation_id": 2, "paper_title": "Scaffolding research questions with structured prompts"},
                        {"citation_id": 3, "paper_title": "Canvas Interfaces for Exploratory Writing Support."}
                    ]
                })
                .to_string(),
                other => return Err(Error::ProviderError(format!("no scripted reply for {other}"))),
            })
        })
    }

    /// Studio for the session over `gateway`.
    pub fn studio(gateway: Gateway) -> Studio {
        Studio::builder(Arc::new(gateway), Arc::new(canned_library(papers(), pdfs())))
            .runtime(Runtime::deterministic(SEED))
            .build()
    }

    /// Replay gateway over the recorded fixtures.
    pub fn replay_gateway() -> Result<Gateway> {
        Ok(Gateway::new(
            GatewayMode::Replay,
            None,
            Arc::new(FixtureStore::open(fixture_dir())?),
        ))
    }

    /// Runs the session and returns the final project.
    pub fn run(studio: &Studio) -> Result<Project> {
        let project = studio.create_project("Writing support ideation")?;
        let pid = project.id.as_str();
        for hit in studio.search_papers("writing research", 5)? {
            studio.add_paper(pid, hit)?;
        }
        let rq = studio.create_node(
            pid,
            FacetType::ProblemDescriptionAndRQ,
            "How do novices scope research ideas?",
            "How can an interface help novice researchers turn a vague interest into a scoped research question?",
            Position::new(0.0, 0.0),
        )?;
        studio.node_suggestions(pid, &rq.id)?;
        let outcome = studio.generate_nodes(
            pid,
            &rq.id,
            GenerationRequest::new(GenerationAction::NewFacet(FacetType::ProposedDesignAndSolution)),
        )?;
        for edge in &outcome.edges {
            studio.evaluate_edge(pid, &edge.id)?;
        }
        let mut selected = vec![rq.id.clone()];
        selected.extend(outcome.nodes.iter().map(|n| n.id.clone()));
        studio.generate_research_brief(pid, &selected)?;
        studio.project(pid)
    }

    /// Runs the session against `gateway` and returns the exported document.
    pub fn document(gateway: Gateway) -> Result<String> {
        let studio = studio(gateway);
        let project = run(&studio)?;
        studio.export_project(&project.id)
    }
}

pub mod contract {
    //! Recorded model replies per response schema, each with the outcome the
    //! parser and the re-ask policy must produce.

    use super::*;
    use crate::gateway::{ask_json, ChatSession};
    use crate::prompt::{parse_json_response, ContextBundle, ResponseError};
    use serde::Deserialize;
    use serde_json::Value;
    use std::fs;
    use std::path::Path;

    #[derive(Debug, Clone, Deserialize)]
    #[serde(rename_all = "camelCase")]
    pub struct Expect {
        /// `ok`, `malformed` or `schemaViolation`.
        pub parse: String,
        #[serde(default)]
        pub repairs: Vec<String>,
        #[serde(default)]
        pub violations: Vec<String>,
        /// Model calls made by the re-ask policy, counting the first.
        pub calls: usize,
        /// `ok`, `outOfRange` or `malformedResponse`.
        pub result: String,
        #[serde(default)]
        pub final_repairs: Option<Vec<String>>,
        #[serde(default)]
        pub array_lengths: BTreeMap<String, usize>,
        #[serde(default)]
        pub values: BTreeMap<String, Value>,
    }

    #[derive(Debug, Clone, Deserialize)]
    pub struct Fixture {
        pub template: String,
        pub case: String,
        pub raw: String,
        pub expect: Expect,
    }

    pub fn fixture_dir() -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/contract")
    }

    /// Every fixture under `dir`, sorted by template then case.
    pub fn load(dir: &Path) -> Result<Vec<Fixture>> {
        let mut out = Vec::new();
        for template in fs::read_dir(dir)? {
            let template = template?.path();
            if !template.is_dir() {
                continue;
            }
            for file in fs::read_dir(&template)? {
                let path = file?.path();
                let text = fs::read_to_string(&path)?;
                let fixture: Fixture = serde_json::from_str(&text)
                    .map_err(|e| Error::CorruptDocument(format!("{}: {e}", path.display())))?;
                out.push(fixture);
            }
        }
        out.sort_by(|a, b| (&a.template, &a.case).cmp(&(&b.template, &b.case)));
        Ok(out)
    }

    fn template_of(f: &Fixture) -> std::result::Result<TemplateId, String> {
        TemplateId::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == f.template)
            .ok_or_else(|| format!("unknown template {}", f.template))
    }

    fn bundle_for(template: TemplateId) -> ContextBundle {
        let mut bundle = ContextBundle::new().papers("(papers)").ideas("(ideas)");
        for slot in template.slots() {
            bundle = bundle.with(slot, format!("({slot})"));
        }
        bundle
    }

    fn kind_name(kind: crate::prompt::ViolationKind) -> String {
        serde_json::to_value(kind)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default()
    }

    fn mismatch<T: std::fmt::Debug>(what: &str, want: T, got: T) -> String {
        format!("{what}: expected {want:?}, got {got:?}")
    }

    /// Replays one fixture through the parser and through the re-ask
    /// policy. `fallback` is the reply served if a re-ask is sent.
    pub fn check(f: &Fixture, fallback: &str) -> std::result::Result<(), String> {
        let template = template_of(f)?;
        let e = &f.expect;
        match parse_json_response(&f.raw, template) {
            Ok(parsed) => {
                if e.parse != "ok" {
                    return Err(mismatch("parse", e.parse.as_str(), "ok"));
                }
                if parsed.repairs_applied != e.repairs {
                    return Err(mismatch("repairs", &e.repairs, &parsed.repairs_applied));
                }
                for (pointer, len) in &e.array_lengths {
                    let got = parsed.value.pointer(pointer).and_then(Value::as_array).map(Vec::len);
                    if got != Some(*len) {
                        return Err(mismatch(pointer, Some(*len), got));
                    }
                }
                for (pointer, want) in &e.values {
                    let got = parsed.value.pointer(pointer);
                    if got != Some(want) {
                        return Err(mismatch(pointer, Some(want), got));
                    }
                }
            }
            Err(ResponseError::Malformed { reason, .. }) => {
                if e.parse != "malformed" {
                    return Err(mismatch("parse", e.parse.as_str(), &format!("malformed ({reason})")));
                }
            }
            Err(ResponseError::SchemaViolation { violations, .. }) => {
                let mut kinds: Vec<String> = violations.iter().map(|v| kind_name(v.kind)).collect();
                kinds.dedup();
                if e.parse != "schemaViolation" || kinds != e.violations {
                    return Err(format!(
                        "parse: expected {} {:?}, got schemaViolation {:?}",
                        e.parse, e.violations, kinds
                    ));
                }
            }
        }

        let provider = Arc::new(QueueProvider::new([f.raw.clone(), fallback.to_string()]));
        let gateway = Gateway::live(provider.clone());
        let mut session = ChatSession::new("contract");
        let outcome = ask_json(&gateway, &mut session, template, &bundle_for(template));
        let calls = provider.requests().len();
        if calls != e.calls {
            return Err(mismatch("model calls", e.calls, calls));
        }
        let result = match &outcome {
            Ok(r) if r.out_of_range.is_empty() => "ok",
            Ok(_) => "outOfRange",
            Err(Error::MalformedResponse(_)) => "malformedResponse",
            Err(other) => return Err(format!("unexpected error {other}")),
        };
        if result != e.result {
            return Err(mismatch("result", e.result.as_str(), result));
        }
        if let (Some(want), Ok(reply)) = (&e.final_repairs, &outcome) {
            if &reply.repairs_applied != want {
                return Err(mismatch("final repairs", want, &reply.repairs_applied));
            }
        }
        Ok(())
    }

    /// Checks every fixture; the `valid` case of each template is the
    /// fallback reply for re-asks.
    pub fn check_all(fixtures: &[Fixture]) -> Vec<(String, std::result::Result<(), String>)> {
        fixtures
            .iter()
            .map(|f| {
                let fallback = fixtures
                    .iter()
                    .find(|v| v.template == f.template && v.case == "valid")
                    .map(|v| v.raw.clone())
                    .unwrap_or_default();
                (format!("{}/{}", f.template, f.case), check(f, &fallback))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn templates_identify_themselves() {
        use crate::prompt::{render_prompt, ContextBundle};
        for t in TemplateId::ALL.iter().copied().filter(|t| *t != TemplateId::System) {
            let mut bundle = ContextBundle::new().papers("P").ideas("I");
            for s in t.slots() {
                bundle = bundle.with(s, "x");
            }
            assert_eq!(identify_template(&render_prompt(t, &bundle).unwrap()), Some(t), "{t}");
        }
        assert_eq!(identify_template("Your previous reply could not be used"), None);
    }

    #[test]
    fn canned_extractor_splits_blocks() {
        let pdf = CannedPdfs {
            documents: e2e::pdfs(),
        }
        .fetch("https://pdfs.example.org/249921.pdf")
        .unwrap();
        let sections = CannedExtractor.extract(&pdf).unwrap();
        assert_eq!(sections.len(), 3);
        assert_eq!(sections[0].heading, "Abstract");
    }

    #[test]
    fn e2e_session_runs_live() {
        let project = e2e::run(&e2e::studio(scripted_gateway(e2e::responder()))).unwrap();
        assert_eq!(project.paper_ids.len(), 3);
        assert_eq!(project.nodes.len(), 4);
        assert_eq!(project.edges.len(), 3);
        let strengths: Vec<_> = project.edges.iter().map(|e| e.strength.unwrap()).collect();
        assert_eq!(strengths, [0.8, 0.3, 0.65]);
        assert_eq!(project.briefs.len(), 1);
        assert!(project.briefs[0].literature_references.iter().all(|r| r.corpus_id.is_some()));
        project.check_integrity().unwrap();
    }
}
