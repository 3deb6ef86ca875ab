mod common;

use common::{corrupt, corruption_base, random_project, CORRUPTIONS};
use ideaweave_core::graph::{load_project, save_project, ProjectStore};
use ideaweave_core::runtime::Runtime;
use proptest::prelude::*;
use rand::SeedableRng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn save_then_load_is_identity(seed in any::<u64>(), steps in 0usize..60) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rt = Runtime::deterministic(seed);
        let p = random_project(&mut rng, &rt, steps);
        let doc = save_project(&p);
        let back = load_project(&doc).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(save_project(&back), doc);
    }
}

#[test]
fn every_corruption_class_is_rejected() {
    let rt = Runtime::deterministic(3);
    let doc = save_project(&corruption_base(&rt));
    load_project(&doc).unwrap();
    for class in CORRUPTIONS {
        let err = load_project(&corrupt(&doc, class)).unwrap_err();
        assert_eq!(err.code(), "CorruptDocument", "{class}: {err}");
    }
}

#[test]
fn directory_store_survives_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let rt = Runtime::deterministic(4);
    let p = corruption_base(&rt);
    {
        let store = ProjectStore::open(dir.path()).unwrap();
        store.insert(p.clone()).unwrap();
    }
    let store = ProjectStore::open(dir.path()).unwrap();
    assert_eq!(store.snapshot(&p.id).unwrap(), p);
}
