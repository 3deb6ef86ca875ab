//! Core of the ideaweave service: faceted idea graphs, a grounded paper
//! collection, prompt contracts, the model gateway and the generation
//! pipelines that tie them together.
//!
//! Everything here is synchronous. [`Studio`] is the facade the HTTP layer
//! and the acceptance suite drive.

pub mod error;
pub mod gateway;
pub mod graph;
pub mod library;
pub mod prompt;
pub mod runtime;
mod studio;
pub mod suggest;
pub mod testkit;
pub mod transport;

pub use error::{Error, Result};
pub use studio::{ProjectSummary, Studio, StudioBuilder};
