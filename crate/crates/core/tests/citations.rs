mod common;

use common::{naive_scan, random_tagged_text, Piece};
use ideaweave_core::prompt::{parse_citation_tags, CitedText, Segment};
use ideaweave_core::graph::Project;
use ideaweave_core::runtime::Runtime;
use proptest::prelude::*;
use rand::SeedableRng;

fn as_pieces(segments: &[Segment]) -> Vec<Piece> {
    segments
        .iter()
        .map(|s| match s {
            Segment::Text { text } => Piece::Text(text.clone()),
            Segment::Citation { corpus_id, .. } => Piece::Tag(corpus_id.clone()),
        })
        .collect()
}

fn check(text: &str) -> Result<(), TestCaseError> {
    let segments = parse_citation_tags(text);
    let joined: String = segments.iter().map(Segment::surface).collect();
    prop_assert_eq!(&joined, text);
    prop_assert_eq!(as_pieces(&segments), naive_scan(text));
    for s in &segments {
        if let Segment::Citation { span, .. } = s {
            prop_assert_eq!(&text[span.clone()], s.surface());
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn arbitrary_strings_round_trip(text in ".{0,80}") {
        check(&text)?;
    }

    #[test]
    fn tag_heavy_strings_match_the_scanner(seed in any::<u64>()) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let ids = vec!["249921".to_string(), "7".into(), "a b".into(), "漢".into()];
        check(&random_tagged_text(&mut rng, &ids))?;
    }
}

#[test]
fn edge_cases() {
    for text in ["", "@ref[]", "@ref[", "@ref[@ref[1]]", "@@ref[2]x", "[@ref[3]]", "@ref[[4]", "@ref[5]@ref[6]"] {
        check(text).unwrap();
    }
    assert_eq!(naive_scan("@ref[@ref[1]]"), vec![Piece::Text("@ref[".into()), Piece::Tag("1".into()), Piece::Text("]".into())]);
}

#[test]
fn uncollected_tags_stay_dangling() {
    let rt = Runtime::deterministic(1);
    let mut p = Project::new(&rt, "p");
    p.add_paper(&rt, common::fallback_paper("10", "Ten")).unwrap();
    let cited = CitedText::new("see @ref[10] and @ref[11]", &p);
    assert_eq!(cited.dangling, vec!["11".to_string()]);
    let kinds: Vec<_> = cited.segments.iter().map(|s| serde_json::to_value(s).unwrap()["kind"].clone()).collect();
    assert_eq!(kinds, ["text", "resolved", "text", "dangling"]);
}
