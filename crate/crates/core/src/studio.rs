use crate::error::{Error, Result};
use crate::gateway::{ChatSession, Gateway};
use crate::graph::{
    load_project, save_project, FacetType, IdeaEdge, IdeaNode, NodePatch, Position, Project, ProjectStore,
};
use crate::library::{PaperLibrary, PaperRecord};
use crate::runtime::Runtime;
use parking_lot::Mutex;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::HashMap;
use std::sync::Arc;

/// One row of the project list.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProjectSummary {
    pub id: String,
    pub name: String,
    pub revision: u64,
    pub node_count: usize,
    pub paper_count: usize,
}

/// Projects, papers and model access behind one handle.
///
/// Graph edits lock one project for the duration of the edit. Generation
/// reads a snapshot, calls the model with no project lock held, then
/// commits; if the project moved on in the meantime the results are still
/// committed and the log entry carries `"contextStale": true`.
pub struct Studio {
    store: ProjectStore,
    gateway: Arc<Gateway>,
    library: Arc<PaperLibrary>,
    runtime: Runtime,
    sessions: Mutex<HashMap<String, Arc<Mutex<ChatSession>>>>,
}

pub struct StudioBuilder {
    gateway: Arc<Gateway>,
    library: Arc<PaperLibrary>,
    store: Option<ProjectStore>,
    runtime: Option<Runtime>,
}

impl StudioBuilder {
    pub fn store(mut self, store: ProjectStore) -> Self {
        self.store = Some(store);
        self
    }

    pub fn runtime(mut self, runtime: Runtime) -> Self {
        self.runtime = Some(runtime);
        self
    }

    pub fn build(self) -> Studio {
        Studio {
            store: self.store.unwrap_or_default(),
            gateway: self.gateway,
            library: self.library,
            runtime: self.runtime.unwrap_or_else(Runtime::system),
            sessions: Mutex::new(HashMap::new()),
        }
    }
}

impl std::fmt::Debug for Studio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Studio")
            .field("gateway", &self.gateway)
            .field("projects", &self.store.ids().len())
            .finish_non_exhaustive()
    }
}

impl Studio {
    pub fn builder(gateway: Arc<Gateway>, library: Arc<PaperLibrary>) -> StudioBuilder {
        StudioBuilder {
            gateway,
            library,
            store: None,
            runtime: None,
        }
    }

    pub fn gateway(&self) -> &Gateway {
        &self.gateway
    }

    pub fn library(&self) -> &PaperLibrary {
        &self.library
    }

    pub fn runtime(&self) -> &Runtime {
        &self.runtime
    }

    pub(crate) fn store(&self) -> &ProjectStore {
        &self.store
    }

    /// The project's conversation memory, created on first use.
    pub fn session(&self, project_id: &str) -> Arc<Mutex<ChatSession>> {
        self.sessions
            .lock()
            .entry(project_id.to_string())
            .or_insert_with(|| Arc::new(Mutex::new(ChatSession::new(project_id))))
            .clone()
    }

    /// Runs `call` with the project's session locked, so completes on one
    /// project stay in transcript order.
    pub(crate) fn with_session<T>(&self, project_id: &str, call: impl FnOnce(&mut ChatSession) -> Result<T>) -> Result<T> {
        let session = self.session(project_id);
        let mut guard = session.lock();
        call(&mut guard)
    }

    /// Commits generation results computed against `seen_revision`.
    pub(crate) fn commit_generation<R>(
        &self,
        project_id: &str,
        seen_revision: u64,
        apply: impl FnOnce(&mut Project, bool) -> Result<R>,
    ) -> Result<R> {
        self.store.mutate(project_id, |p| {
            let stale = p.revision != seen_revision;
            if stale {
                tracing::warn!(project_id, seen_revision, current = p.revision, "committing on a newer revision");
            }
            apply(p, stale)
        })
    }

    pub fn create_project(&self, name: &str) -> Result<Project> {
        let name = name.trim();
        if name.is_empty() {
            return Err(Error::InvalidRequest("project name is empty".into()));
        }
        let project = Project::new(&self.runtime, name);
        self.store.insert(project.clone())?;
        Ok(project)
    }

    pub fn list_projects(&self) -> Vec<ProjectSummary> {
        self.store
            .ids()
            .iter()
            .filter_map(|id| {
                self.store
                    .read(id, |p| ProjectSummary {
                        id: p.id.clone(),
                        name: p.name.clone(),
                        revision: p.revision,
                        node_count: p.nodes.len(),
                        paper_count: p.paper_ids.len(),
                    })
                    .ok()
            })
            .collect()
    }

    pub fn project(&self, project_id: &str) -> Result<Project> {
        self.store.snapshot(project_id)
    }

    pub fn delete_project(&self, project_id: &str) -> Result<()> {
        self.store.remove(project_id)?;
        self.sessions.lock().remove(project_id);
        Ok(())
    }

    pub fn rename_project(&self, project_id: &str, name: &str) -> Result<Project> {
        let name = name.trim();
        if name.is_empty() {
            return Err(Error::InvalidRequest("project name is empty".into()));
        }
        self.store.mutate(project_id, |p| {
            p.rename(&self.runtime, name);
            Ok(p.clone())
        })
    }

    /// The persisted document for a project.
    pub fn export_project(&self, project_id: &str) -> Result<String> {
        self.store.read(project_id, save_project)
    }

    pub fn import_project(&self, document: &str) -> Result<Project> {
        let project = load_project(document)?;
        if self.store.read(&project.id, |_| ()).is_ok() {
            return Err(Error::InvalidRequest(format!("project {} already exists", project.id)));
        }
        self.store.insert(project.clone())?;
        Ok(project)
    }

    /// The project holding `node_id`. Ids are unique across projects.
    pub fn locate_node(&self, node_id: &str) -> Result<String> {
        self.store
            .ids()
            .into_iter()
            .find(|pid| self.store.read(pid, |p| p.node(node_id).is_some()).unwrap_or(false))
            .ok_or_else(|| Error::UnknownNode(node_id.to_string()))
    }

    pub fn locate_edge(&self, edge_id: &str) -> Result<String> {
        self.store
            .ids()
            .into_iter()
            .find(|pid| self.store.read(pid, |p| p.edge(edge_id).is_some()).unwrap_or(false))
            .ok_or_else(|| Error::UnknownEdge(edge_id.to_string()))
    }

    pub fn create_node(
        &self,
        project_id: &str,
        facet: FacetType,
        title: &str,
        content: &str,
        position: Position,
    ) -> Result<IdeaNode> {
        self.store
            .mutate(project_id, |p| p.create_node(&self.runtime, facet, title, content, position))
    }

    pub fn update_node(
        &self,
        project_id: &str,
        node_id: &str,
        patch: NodePatch,
        expected_revision: Option<u64>,
    ) -> Result<IdeaNode> {
        self.store
            .mutate(project_id, |p| p.update_node(&self.runtime, node_id, patch, expected_revision))
    }

    pub fn delete_node(&self, project_id: &str, node_id: &str) -> Result<()> {
        self.store.mutate(project_id, |p| p.delete_node(&self.runtime, node_id))
    }

    pub fn link_nodes(&self, project_id: &str, source: &str, target: &str) -> Result<IdeaEdge> {
        self.store.mutate(project_id, |p| p.link_nodes(&self.runtime, source, target))
    }

    pub fn delete_edge(&self, project_id: &str, edge_id: &str) -> Result<()> {
        self.store.mutate(project_id, |p| p.delete_edge(&self.runtime, edge_id))
    }

    pub fn delete_brief(&self, project_id: &str, brief_id: &str) -> Result<()> {
        self.store.mutate(project_id, |p| p.delete_brief(&self.runtime, brief_id))
    }

    pub fn search_papers(&self, query: &str, limit: usize) -> Result<Vec<PaperRecord>> {
        self.library.search_papers(query, limit)
    }

    pub fn recommend_papers(&self, project_id: &str) -> Result<Vec<PaperRecord>> {
        let project = self.store.snapshot(project_id)?;
        self.library.recommend_papers(&project.collection())
    }

    /// Ingests a search result and adds it to the collection. Ingestion
    /// trouble is logged on the project and the paper is kept on its
    /// abstract and TLDR.
    pub fn add_paper(&self, project_id: &str, record: PaperRecord) -> Result<PaperRecord> {
        if self.store.read(project_id, |p| p.has_paper(&record.corpus_id))? {
            return Err(Error::DuplicatePaper(record.corpus_id));
        }
        let outcome = self.library.ingest_paper(&self.gateway, record)?;
        let record = outcome.record;
        self.store.mutate(project_id, |p| {
            self.library.config().check_budget(&p.collection(), &record)?;
            if let Some(reason) = &outcome.fallback_reason {
                p.log_event(
                    &self.runtime,
                    crate::graph::Actor::System,
                    "ingest_fallback",
                    json!({ "corpusId": record.corpus_id, "reason": reason }),
                );
            }
            p.add_paper(&self.runtime, record.clone())?;
            Ok(record.clone())
        })
    }

    pub fn remove_paper(&self, project_id: &str, corpus_id: &str) -> Result<()> {
        self.store.mutate(project_id, |p| p.remove_paper(&self.runtime, corpus_id))
    }

    /// Appends a system log entry.
    pub(crate) fn log(&self, project: &mut Project, action: &str, payload: Value) {
        project.log_event(&self.runtime, crate::graph::Actor::System, action, payload);
    }
}
