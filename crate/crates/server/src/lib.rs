//! HTTP JSON API over the ideaweave core.

pub mod api;
pub mod config;
pub mod schema;

pub use api::{router, ApiEnvelope, ApiError, AppState};
pub use config::Config;
