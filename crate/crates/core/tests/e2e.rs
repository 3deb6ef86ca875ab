use ideaweave_core::testkit::e2e;
use std::fs;

#[test]
fn replay_matches_golden_document() {
    let golden = fs::read_to_string(e2e::golden_path()).unwrap();
    for _ in 0..3 {
        let doc = e2e::document(e2e::replay_gateway().unwrap()).unwrap();
        assert!(doc == golden, "replayed document differs from golden");
    }
}

#[test]
fn replay_needs_no_provider_and_logs_fixture_sources() {
    let gateway = e2e::replay_gateway().unwrap();
    let studio = e2e::studio(gateway);
    e2e::run(&studio).unwrap();
    let calls = studio.gateway().calls();
    assert_eq!(calls.len(), 8);
    assert!(calls.iter().all(|c| c.source == ideaweave_core::gateway::Source::Fixture));
}

#[test]
fn golden_document_has_expected_shape() {
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(e2e::golden_path()).unwrap()).unwrap();
    assert_eq!(doc["paperIds"].as_array().unwrap().len(), 3);
    assert_eq!(doc["nodes"].as_array().unwrap().len(), 4);
    let strengths: Vec<f64> = doc["edges"].as_array().unwrap().iter().map(|e| e["strength"].as_f64().unwrap()).collect();
    assert_eq!(strengths, [0.8, 0.3, 0.65]);
    assert_eq!(doc["briefs"][0]["literatureReferences"].as_array().unwrap().len(), 3);
    let states: Vec<&str> = doc["paperIds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|id| doc["papers"][id.as_str().unwrap()]["ingestState"].as_str().unwrap())
        .collect();
    assert_eq!(states, ["fullText", "fullText", "fallback"]);
}
