mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use shml_core::symbolic::OutLabel;

use common::{system, weak_after};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reachable_is_closed(seed in any::<u64>()) {
        let l = system(seed);
        for s in 0..l.len() {
            for (_, t) in l.transitions(s) {
                prop_assert!(*t < l.len());
            }
        }
    }

    #[test]
    fn traces_grow_with_depth(seed in any::<u64>(), k in 0usize..5) {
        let l = system(seed);
        let short = l.traces(0, k);
        prop_assert!(short.contains(&Vec::new()));
        prop_assert!(short.is_subset(&l.traces(0, k + 1)));
    }

    #[test]
    fn weak_steps_contain_strong_steps(seed in any::<u64>()) {
        let l = system(seed);
        for s in 0..l.len() {
            for (lbl, t) in l.transitions(s) {
                if let OutLabel::Act(a) = lbl {
                    prop_assert!(l.weak_step(s, a).contains(t));
                }
            }
        }
    }

    #[test]
    fn weak_traces_match_explicit_closure(seed in any::<u64>()) {
        let l = system(seed);
        for t in l.traces(0, 4) {
            let mut set = BTreeSet::from([0usize]);
            set = weak_after(&l, &set, None);
            for a in &t {
                set = weak_after(&l, &set, Some(a));
            }
            let got: BTreeSet<usize> = l.weak_trace(0, &t).ones().collect();
            prop_assert_eq!(got, set);
        }
    }
}
