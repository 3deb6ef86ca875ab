//! Routes. Every handler is a thin adapter: parse the body, run one
//! `Studio` operation on the blocking pool, wrap the result in the
//! envelope together with the project's revision after the call.

use crate::schema;
use axum::body::Bytes;
use axum::extract::{FromRequest, Path, Request, State};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ideaweave_core::graph::{FacetType, NodePatch, Position};
use ideaweave_core::library::PaperRecord;
use ideaweave_core::suggest::{GenerationAction, GenerationRequest};
use ideaweave_core::{Error, Result, Studio};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::sync::Arc;
use std::time::Duration;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

#[derive(Clone)]
pub struct AppState {
    studio: Arc<Studio>,
    timeout: Duration,
}

impl AppState {
    pub fn new(studio: Arc<Studio>, timeout: Duration) -> Self {
        Self { studio, timeout }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiEnvelope {
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ApiError>,
    pub revision: Option<u64>,
}

pub fn status_of(err: &Error) -> StatusCode {
    match err {
        Error::UnknownProject(_)
        | Error::UnknownNode(_)
        | Error::UnknownEdge(_)
        | Error::UnknownBrief(_)
        | Error::UnknownPaper(_) => StatusCode::NOT_FOUND,
        Error::RevisionConflict { .. } | Error::DuplicateEdge(..) | Error::DuplicatePaper(_) | Error::PaperInUse(_) => {
            StatusCode::CONFLICT
        }
        Error::ProviderUnavailable(_)
        | Error::ProviderError(_)
        | Error::MalformedResponse(_)
        | Error::SchemaViolation(_)
        | Error::ExtractionFailed(_)
        | Error::FixtureMiss(_) => StatusCode::BAD_GATEWAY,
        Error::Io(_) | Error::MissingSlot(_) => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::BAD_REQUEST,
    }
}

fn envelope(status: StatusCode, env: ApiEnvelope) -> Response {
    (status, Json(env)).into_response()
}

fn failure(err: &Error, revision: Option<u64>) -> Response {
    envelope(
        status_of(err),
        ApiEnvelope {
            ok: false,
            data: None,
            error: Some(ApiError {
                code: err.code().into(),
                message: err.to_string(),
            }),
            revision,
        },
    )
}

/// JSON body whose parse errors come back as an enveloped 400. An empty
/// body reads as `{}`.
pub struct Body<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Body<T> {
    type Rejection = Response;

    async fn from_request(req: Request, state: &S) -> std::result::Result<Self, Response> {
        let bytes = Bytes::from_request(req, state)
            .await
            .map_err(|e| failure(&Error::InvalidRequest(e.body_text()), None))?;
        let raw: &[u8] = if bytes.iter().all(u8::is_ascii_whitespace) { b"{}" } else { &bytes };
        serde_json::from_slice(raw)
            .map(Body)
            .map_err(|e| failure(&Error::InvalidRequest(format!("request body: {e}")), None))
    }
}

/// Runs `op` on the blocking pool. `op` records the project it touched in
/// its second argument so the envelope can carry that project's revision.
async fn call<T, F>(state: &AppState, op: F) -> Response
where
    T: Serialize + Send + 'static,
    F: FnOnce(&Studio, &mut Option<String>) -> Result<T> + Send + 'static,
{
    let studio = state.studio.clone();
    let task = tokio::task::spawn_blocking(move || {
        let mut scope = None;
        let result = op(&studio, &mut scope).and_then(|data| {
            serde_json::to_value(data).map_err(|e| Error::Io(format!("response encoding: {e}")))
        });
        let revision = scope.and_then(|pid| studio.project(&pid).ok()).map(|p| p.revision);
        (result, revision)
    });
    match tokio::time::timeout(state.timeout, task).await {
        Ok(Ok((Ok(data), revision))) => envelope(
            StatusCode::OK,
            ApiEnvelope {
                ok: true,
                data: Some(data),
                error: None,
                revision,
            },
        ),
        Ok(Ok((Err(err), revision))) => failure(&err, revision),
        Ok(Err(join)) => failure(&Error::Io(format!("handler failed: {join}")), None),
        Err(_) => failure(
            &Error::ProviderUnavailable(format!("no result within {} s", state.timeout.as_secs())),
            None,
        ),
    }
}

fn facet(label: &str) -> Result<FacetType> {
    FacetType::parse_label(label).ok_or_else(|| Error::InvalidRequest(format!("unknown facet {label:?}")))
}

fn deleted(id: String) -> Value {
    json!({ "deleted": id })
}

// ---- request bodies ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NameBody {
    name: String,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct CreateNodeBody {
    facet: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    content: String,
    #[serde(default)]
    position: Position,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct UpdateNodeBody {
    facet: Option<String>,
    title: Option<String>,
    content: Option<String>,
    position: Option<Position>,
    expected_revision: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateEdgeBody {
    source: String,
    target: String,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct GenerateBody {
    action: String,
    facet: Option<String>,
    user_prompt: Option<String>,
    suggestion: Option<String>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct BriefBody {
    node_ids: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SearchBody {
    query: String,
    limit: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PromptBody {
    prompt: String,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ChainBody {
    suggestion_text: String,
    #[serde(default)]
    position: Position,
    start_facet: Option<String>,
}

// ---- projects ----

async fn list_projects(State(s): State<AppState>) -> Response {
    call(&s, |st, _| Ok(st.list_projects())).await
}

async fn create_project(State(s): State<AppState>, Body(b): Body<NameBody>) -> Response {
    call(&s, move |st, scope| {
        let p = st.create_project(&b.name)?;
        *scope = Some(p.id.clone());
        Ok(p)
    })
    .await
}

async fn import_project(State(s): State<AppState>, Body(doc): Body<Value>) -> Response {
    call(&s, move |st, scope| {
        let p = st.import_project(&doc.to_string())?;
        *scope = Some(p.id.clone());
        Ok(p)
    })
    .await
}

async fn get_project(State(s): State<AppState>, Path(pid): Path<String>) -> Response {
    call(&s, move |st, scope| {
        let p = st.project(&pid)?;
        *scope = Some(pid);
        Ok(p)
    })
    .await
}

async fn rename_project(State(s): State<AppState>, Path(pid): Path<String>, Body(b): Body<NameBody>) -> Response {
    call(&s, move |st, scope| {
        *scope = Some(pid.clone());
        st.rename_project(&pid, &b.name)
    })
    .await
}

async fn delete_project(State(s): State<AppState>, Path(pid): Path<String>) -> Response {
    call(&s, move |st, _| st.delete_project(&pid).map(|_| deleted(pid))).await
}

/// The persisted document, parsed back into JSON.
async fn export_project(State(s): State<AppState>, Path(pid): Path<String>) -> Response {
    call(&s, move |st, scope| {
        let doc = st.export_project(&pid)?;
        *scope = Some(pid);
        serde_json::from_str::<Value>(&doc).map_err(|e| Error::Io(e.to_string()))
    })
    .await
}

// ---- nodes ----

async fn list_nodes(State(s): State<AppState>, Path(pid): Path<String>) -> Response {
    call(&s, move |st, scope| {
        let p = st.project(&pid)?;
        *scope = Some(pid);
        Ok(p.nodes)
    })
    .await
}

async fn create_node(State(s): State<AppState>, Path(pid): Path<String>, Body(b): Body<CreateNodeBody>) -> Response {
    call(&s, move |st, scope| {
        *scope = Some(pid.clone());
        st.create_node(&pid, facet(&b.facet)?, &b.title, &b.content, b.position)
    })
    .await
}

async fn get_node(State(s): State<AppState>, Path((pid, nid)): Path<(String, String)>) -> Response {
    call(&s, move |st, scope| {
        let p = st.project(&pid)?;
        *scope = Some(pid);
        p.require_node(&nid).cloned()
    })
    .await
}

async fn update_node(
    State(s): State<AppState>,
    Path((pid, nid)): Path<(String, String)>,
    Body(b): Body<UpdateNodeBody>,
) -> Response {
    call(&s, move |st, scope| {
        *scope = Some(pid.clone());
        let patch = NodePatch {
            facet: b.facet.as_deref().map(facet).transpose()?,
            title: b.title,
            content: b.content,
            position: b.position,
        };
        st.update_node(&pid, &nid, patch, b.expected_revision)
    })
    .await
}

async fn delete_node(State(s): State<AppState>, Path((pid, nid)): Path<(String, String)>) -> Response {
    call(&s, move |st, scope| {
        *scope = Some(pid.clone());
        st.delete_node(&pid, &nid).map(|_| deleted(nid))
    })
    .await
}

// ---- edges ----

async fn list_edges(State(s): State<AppState>, Path(pid): Path<String>) -> Response {
    call(&s, move |st, scope| {
        let p = st.project(&pid)?;
        *scope = Some(pid);
        Ok(p.edges)
    })
    .await
}

async fn create_edge(State(s): State<AppState>, Path(pid): Path<String>, Body(b): Body<CreateEdgeBody>) -> Response {
    call(&s, move |st, scope| {
        *scope = Some(pid.clone());
        st.link_nodes(&pid, &b.source, &b.target)
    })
    .await
}

async fn get_edge(State(s): State<AppState>, Path((pid, eid)): Path<(String, String)>) -> Response {
    call(&s, move |st, scope| {
        let p = st.project(&pid)?;
        *scope = Some(pid);
        p.require_edge(&eid).cloned()
    })
    .await
}

async fn delete_edge(State(s): State<AppState>, Path((pid, eid)): Path<(String, String)>) -> Response {
    call(&s, move |st, scope| {
        *scope = Some(pid.clone());
        st.delete_edge(&pid, &eid).map(|_| deleted(eid))
    })
    .await
}

// ---- briefs ----

async fn list_briefs(State(s): State<AppState>, Path(pid): Path<String>) -> Response {
    call(&s, move |st, scope| {
        let p = st.project(&pid)?;
        *scope = Some(pid);
        Ok(p.briefs)
    })
    .await
}

async fn generate_brief(State(s): State<AppState>, Path(pid): Path<String>, Body(b): Body<BriefBody>) -> Response {
    call(&s, move |st, scope| {
        *scope = Some(pid.clone());
        st.generate_research_brief(&pid, &b.node_ids)
    })
    .await
}

async fn delete_brief(State(s): State<AppState>, Path((pid, bid)): Path<(String, String)>) -> Response {
    call(&s, move |st, scope| {
        *scope = Some(pid.clone());
        st.delete_brief(&pid, &bid).map(|_| deleted(bid))
    })
    .await
}

// ---- papers ----

async fn list_papers(State(s): State<AppState>, Path(pid): Path<String>) -> Response {
    call(&s, move |st, scope| {
        let p = st.project(&pid)?;
        *scope = Some(pid);
        Ok(p.collection().into_iter().cloned().collect::<Vec<_>>())
    })
    .await
}

async fn search_papers(State(s): State<AppState>, Path(pid): Path<String>, Body(b): Body<SearchBody>) -> Response {
    call(&s, move |st, scope| {
        st.project(&pid)?;
        *scope = Some(pid);
        st.search_papers(&b.query, b.limit.unwrap_or(10))
    })
    .await
}

async fn recommend_papers(State(s): State<AppState>, Path(pid): Path<String>) -> Response {
    call(&s, move |st, scope| {
        *scope = Some(pid.clone());
        st.recommend_papers(&pid)
    })
    .await
}

async fn ingest_paper(State(s): State<AppState>, Path(pid): Path<String>, Body(b): Body<PaperRecord>) -> Response {
    call(&s, move |st, scope| {
        *scope = Some(pid.clone());
        st.add_paper(&pid, b)
    })
    .await
}

async fn remove_paper(State(s): State<AppState>, Path((pid, cid)): Path<(String, String)>) -> Response {
    call(&s, move |st, scope| {
        *scope = Some(pid.clone());
        st.remove_paper(&pid, &cid).map(|_| deleted(cid))
    })
    .await
}

// ---- generation ----

async fn node_suggestions(State(s): State<AppState>, Path(nid): Path<String>) -> Response {
    call(&s, move |st, scope| {
        let pid = st.locate_node(&nid)?;
        *scope = Some(pid.clone());
        st.node_suggestions(&pid, &nid)
    })
    .await
}

async fn generate_nodes(State(s): State<AppState>, Path(nid): Path<String>, Body(b): Body<GenerateBody>) -> Response {
    call(&s, move |st, scope| {
        let pid = st.locate_node(&nid)?;
        *scope = Some(pid.clone());
        let mut request = GenerationRequest::new(GenerationAction::parse(&b.action, b.facet.as_deref())?);
        if let Some(prompt) = b.user_prompt {
            request = request.with_prompt(prompt);
        }
        if let Some(suggestion) = b.suggestion {
            request = request.with_suggestion(suggestion);
        }
        st.generate_nodes(&pid, &nid, request)
    })
    .await
}

async fn node_lit_analysis(State(s): State<AppState>, Path(nid): Path<String>) -> Response {
    call(&s, move |st, scope| {
        let pid = st.locate_node(&nid)?;
        *scope = Some(pid.clone());
        st.node_literature_analysis(&pid, &nid)
    })
    .await
}

async fn assess_edge(State(s): State<AppState>, Path(eid): Path<String>) -> Response {
    call(&s, move |st, scope| {
        let pid = st.locate_edge(&eid)?;
        *scope = Some(pid.clone());
        st.evaluate_edge(&pid, &eid)
    })
    .await
}

async fn lit_summary(State(s): State<AppState>, Path(pid): Path<String>) -> Response {
    call(&s, move |st, scope| {
        *scope = Some(pid.clone());
        st.literature_summary(&pid)
    })
    .await
}

async fn lit_analysis(State(s): State<AppState>, Path(pid): Path<String>) -> Response {
    call(&s, move |st, scope| {
        *scope = Some(pid.clone());
        st.literature_analysis(&pid)
    })
    .await
}

async fn answer_question(State(s): State<AppState>, Path(pid): Path<String>, Body(b): Body<PromptBody>) -> Response {
    call(&s, move |st, scope| {
        *scope = Some(pid.clone());
        st.answer_question(&pid, &b.prompt)
    })
    .await
}

async fn chain(State(s): State<AppState>, Path(pid): Path<String>, Body(b): Body<ChainBody>) -> Response {
    call(&s, move |st, scope| {
        *scope = Some(pid.clone());
        let start = b.start_facet.as_deref().map(facet).transpose()?;
        st.materialize_suggestion_chain(&pid, &b.suggestion_text, start, b.position)
    })
    .await
}

// ---- misc ----

async fn api_schema() -> Response {
    envelope(
        StatusCode::OK,
        ApiEnvelope {
            ok: true,
            data: Some(schema::document()),
            error: None,
            revision: None,
        },
    )
}

async fn unknown_route() -> Response {
    failure(&Error::InvalidRequest("no such route".into()), None).map_status(StatusCode::NOT_FOUND)
}

async fn wrong_method() -> Response {
    failure(&Error::InvalidRequest("method not allowed on this route".into()), None)
        .map_status(StatusCode::METHOD_NOT_ALLOWED)
}

trait MapStatus {
    fn map_status(self, status: StatusCode) -> Self;
}

impl MapStatus for Response {
    fn map_status(mut self, status: StatusCode) -> Self {
        *self.status_mut() = status;
        self
    }
}

pub fn cors(origins: &[String]) -> CorsLayer {
    let layer = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST, Method::PATCH, Method::DELETE, Method::OPTIONS])
        .allow_headers(Any);
    let parsed: Vec<HeaderValue> = origins.iter().filter_map(|o| HeaderValue::from_str(o.trim()).ok()).collect();
    if parsed.is_empty() {
        layer.allow_origin(Any)
    } else {
        layer.allow_origin(AllowOrigin::list(parsed))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/schema", get(api_schema))
        .route("/projects", get(list_projects).post(create_project))
        .route("/projects/import", post(import_project))
        .route("/projects/{pid}", get(get_project).patch(rename_project).delete(delete_project))
        .route("/projects/{pid}/export", get(export_project))
        .route("/projects/{pid}/nodes", get(list_nodes).post(create_node))
        .route("/projects/{pid}/nodes/{nid}", get(get_node).patch(update_node).delete(delete_node))
        .route("/projects/{pid}/edges", get(list_edges).post(create_edge))
        .route("/projects/{pid}/edges/{eid}", get(get_edge).delete(delete_edge))
        .route("/projects/{pid}/briefs", get(list_briefs))
        .route("/projects/{pid}/briefs/{bid}", axum::routing::delete(delete_brief))
        .route("/projects/{pid}/brief", post(generate_brief))
        .route("/projects/{pid}/papers", get(list_papers))
        .route("/projects/{pid}/papers/search", post(search_papers))
        .route("/projects/{pid}/papers/recommend", get(recommend_papers).post(recommend_papers))
        .route("/projects/{pid}/papers/ingest", post(ingest_paper))
        .route("/projects/{pid}/papers/{cid}", axum::routing::delete(remove_paper))
        .route("/projects/{pid}/lit/summary", post(lit_summary))
        .route("/projects/{pid}/lit/analysis", post(lit_analysis))
        .route("/projects/{pid}/qa", post(answer_question))
        .route("/projects/{pid}/chain", post(chain))
        .route("/nodes/{nid}/suggestions", post(node_suggestions))
        .route("/nodes/{nid}/generate", post(generate_nodes))
        .route("/nodes/{nid}/lit-analysis", post(node_lit_analysis))
        .route("/edges/{eid}/assess", post(assess_edge))
        .fallback(unknown_route)
        .method_not_allowed_fallback(wrong_method)
        .with_state(state)
}
