//! Re-records the end-to-end replay fixtures from the scripted responder
//! and rewrites the golden project document from a replay run.
//!
//!     cargo run -p ideaweave-core --example record_e2e

use ideaweave_core::gateway::{FixtureStore, Gateway};
use ideaweave_core::testkit::e2e;
use std::fs;
use std::sync::Arc;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = e2e::fixture_dir();
    if dir.exists() {
        fs::remove_dir_all(&dir)?;
    }
    let fixtures = Arc::new(FixtureStore::open(&dir)?);
    let recorded = e2e::document(Gateway::record(Arc::new(e2e::responder()), fixtures.clone()))?;
    println!("recorded {} fixtures in {}", fixtures.len(), dir.display());

    let replayed = e2e::document(e2e::replay_gateway()?)?;
    if replayed != recorded {
        return Err("replayed document differs from the recorded run".into());
    }
    let golden = e2e::golden_path();
    fs::write(&golden, &replayed)?;
    println!("wrote {}", golden.display());
    Ok(())
}
