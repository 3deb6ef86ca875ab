use super::{load_project, save_project, Project};
use crate::error::{Error, Result};
use parking_lot::RwLock;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Live projects, each behind its own lock, optionally mirrored to one
/// JSON document per project in a data directory.
///
/// Mutations run against a copy and replace the stored project only when
/// they succeed, so a failed operation leaves no partial state behind.
#[derive(Debug, Default)]
pub struct ProjectStore {
    dir: Option<PathBuf>,
    projects: RwLock<BTreeMap<String, Arc<RwLock<Project>>>>,
}

impl ProjectStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens a data directory, loading every `*.json` document in it.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut projects = BTreeMap::new();
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let text = fs::read_to_string(&path)?;
            let project = load_project(&text)
                .map_err(|e| Error::CorruptDocument(format!("{}: {e}", path.display())))?;
            projects.insert(project.id.clone(), Arc::new(RwLock::new(project)));
        }
        Ok(Self {
            dir: Some(dir),
            projects: RwLock::new(projects),
        })
    }

    fn handle(&self, id: &str) -> Result<Arc<RwLock<Project>>> {
        self.projects
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| Error::UnknownProject(id.to_string()))
    }

    fn persist(&self, project: &Project) -> Result<()> {
        if let Some(dir) = &self.dir {
            write_atomic(&dir.join(format!("{}.json", project.id)), &save_project(project))?;
        }
        Ok(())
    }

    pub fn insert(&self, project: Project) -> Result<()> {
        self.persist(&project)?;
        self.projects
            .write()
            .insert(project.id.clone(), Arc::new(RwLock::new(project)));
        Ok(())
    }

    pub fn remove(&self, id: &str) -> Result<()> {
        self.projects
            .write()
            .remove(id)
            .ok_or_else(|| Error::UnknownProject(id.to_string()))?;
        if let Some(dir) = &self.dir {
            let path = dir.join(format!("{id}.json"));
            if path.exists() {
                fs::remove_file(path)?;
            }
        }
        Ok(())
    }

    pub fn ids(&self) -> Vec<String> {
        self.projects.read().keys().cloned().collect()
    }

    pub fn read<R>(&self, id: &str, f: impl FnOnce(&Project) -> R) -> Result<R> {
        let handle = self.handle(id)?;
        let guard = handle.read();
        Ok(f(&guard))
    }

    pub fn snapshot(&self, id: &str) -> Result<Project> {
        self.read(id, Project::clone)
    }

    pub fn mutate<R>(&self, id: &str, f: impl FnOnce(&mut Project) -> Result<R>) -> Result<R> {
        let handle = self.handle(id)?;
        let mut guard = handle.write();
        let mut draft = guard.clone();
        let out = f(&mut draft)?;
        self.persist(&draft)?;
        *guard = draft;
        Ok(out)
    }
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{FacetType, Position};
    use crate::runtime::Runtime;

    #[test]
    fn failed_mutation_leaves_project_untouched() {
        let rt = Runtime::deterministic(9);
        let store = ProjectStore::in_memory();
        let p = Project::new(&rt, "p");
        let id = p.id.clone();
        store.insert(p).unwrap();
        let before = store.snapshot(&id).unwrap();
        let err = store
            .mutate(&id, |p| {
                p.create_node(&rt, FacetType::EvaluationMethod, "x", "y", Position::default())?;
                Err::<(), _>(Error::EmptyPrompt)
            })
            .unwrap_err();
        assert_eq!(err, Error::EmptyPrompt);
        assert_eq!(store.snapshot(&id).unwrap(), before);
    }

    #[test]
    fn reopens_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let rt = Runtime::deterministic(9);
        let store = ProjectStore::open(dir.path()).unwrap();
        let p = Project::new(&rt, "disk");
        let id = p.id.clone();
        store.insert(p).unwrap();
        store
            .mutate(&id, |p| p.create_node(&rt, FacetType::EvaluationMethod, "t", "c", Position::default()))
            .unwrap();
        let reopened = ProjectStore::open(dir.path()).unwrap();
        assert_eq!(reopened.snapshot(&id).unwrap(), store.snapshot(&id).unwrap());
        reopened.remove(&id).unwrap();
        assert!(matches!(reopened.snapshot(&id), Err(Error::UnknownProject(_))));
    }
}
