mod common;

use proptest::prelude::*;
use shml_core::logic::{holds_at, mc_eval, sat_oracle};
use shml_core::symbolic::OutLabel;

use common::{formula, system};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn oracle_agrees_with_model_checker(fs in any::<u64>(), ps in any::<u64>()) {
        let f = formula(fs);
        let l = system(ps);
        let sem = mc_eval(&f, &l, &Vec::new()).unwrap();
        for s in 0..l.len() {
            prop_assert_eq!(sat_oracle(&l, s, &f).unwrap(), sem.contains(s), "{} at {}", f, s);
        }
    }

    #[test]
    fn safety_is_tau_closed(fs in any::<u64>(), ps in any::<u64>()) {
        let f = formula(fs);
        let l = system(ps);
        for s in 0..l.len() {
            if !holds_at(&f, &l, s).unwrap() {
                continue;
            }
            for (lbl, t) in l.transitions(s) {
                if *lbl == OutLabel::Tau {
                    prop_assert!(holds_at(&f, &l, *t).unwrap());
                }
            }
        }
    }

    #[test]
    fn unfolding_preserves_meaning(fs in any::<u64>(), ps in any::<u64>()) {
        let f = formula(fs);
        let l = system(ps);
        prop_assert_eq!(mc_eval(&f, &l, &Vec::new()).unwrap(), mc_eval(&f.unfold(), &l, &Vec::new()).unwrap());
    }
}
