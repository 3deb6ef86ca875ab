mod common;

use common::fuzz::{clamp_trial, CLAMP_ENDPOINTS};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stored_outputs_respect_cardinality(seed in any::<u64>(), which in 0..CLAMP_ENDPOINTS.len()) {
        let endpoint = CLAMP_ENDPOINTS[which];
        prop_assert_eq!(clamp_trial(seed, endpoint), Ok(()), "{:?}", endpoint);
    }
}
