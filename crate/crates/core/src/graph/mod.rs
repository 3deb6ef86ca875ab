//! Idea graph: typed facet nodes, directed edges, briefs and the project
//! document that holds them.

mod document;
mod facet;
mod model;
mod project;
mod store;

pub use document::{canonicalize, load_project, save_project, SCHEMA_VERSION};
pub use facet::FacetType;
pub use model::{
    ActionLogEntry, Actor, ChatMessage, ChatRole, CreatedBy, IdeaEdge, IdeaNode, LiteratureReference, Position,
    Project, ResearchBrief,
};
pub use project::{BriefSelection, Neighborhood, NodePatch};
pub use store::ProjectStore;
