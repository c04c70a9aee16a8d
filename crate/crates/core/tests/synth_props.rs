mod common;

use std::sync::Arc;

use proptest::prelude::*;
use shml_core::bisim::{bisim_graphs, Graph};
use shml_core::normalize::normalize;
use shml_core::runtime::transducer_lts;
use shml_core::symbolic::Pattern;
use shml_core::synth::{optimize, synthesize};
use shml_core::transducer::{Target, Transducer, Trn};

use common::{dom, formula};

fn suppression_only(e: &Trn) -> bool {
    match &**e {
        Transducer::Id | Transducer::Var(_) => true,
        Transducer::Prefix { pat, out, cont, .. } => {
            let ok = match (pat, out) {
                (Pattern::Insert, _) => false,
                (_, Target::Tau) => true,
                (p, Target::Pat(q)) => p.underline().ok().as_ref() == Some(q),
            };
            ok && suppression_only(cont)
        }
        Transducer::Sum(es) => es.iter().all(suppression_only),
        Transducer::Rec(_, body) => suppression_only(body),
    }
}

fn labelled(g: Graph<(shml_core::symbolic::ExtAction, shml_core::symbolic::OutLabel)>) -> Graph<String> {
    let edges =
        g.edges.into_iter().map(|row| row.into_iter().map(|((a, u), t)| (format!("{a}>{u}"), t)).collect()).collect();
    Graph { names: g.names, edges }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn only_suppressions_and_identities(fs in any::<u64>()) {
        let nf = normalize(&formula(fs), &dom()).unwrap();
        let e = synthesize(&nf).unwrap();
        prop_assert!(suppression_only(&e), "{}", e);
    }

    #[test]
    fn deterministic(fs in any::<u64>()) {
        let nf = normalize(&formula(fs), &dom()).unwrap();
        let a = synthesize(&nf).unwrap();
        let b = synthesize(&nf).unwrap();
        prop_assert!(Arc::ptr_eq(&a, &b) || a == b);
    }

    #[test]
    fn optimize_keeps_behaviour(fs in any::<u64>()) {
        let d = dom();
        let e = synthesize(&normalize(&formula(fs), &d).unwrap()).unwrap();
        let ga = labelled(transducer_lts(&e, &d, 4096).unwrap());
        let gb = labelled(transducer_lts(&optimize(&e), &d, 4096).unwrap());
        prop_assert!(bisim_graphs(&ga, 0, &gb, 0).bisimilar, "{}", e);
    }
}
