mod common;

use std::collections::{HashSet, VecDeque};

use proptest::prelude::*;
use shml_core::bisim::{bisim_graphs, Graph};
use shml_core::harness::{
    after, check_soundness, check_transparency, check_violation_semantics, gen_process, is_sat, violates, Outcome,
};
use shml_core::logic::{holds_at, Formula};
use shml_core::normalize::normalize;
use shml_core::runtime::{istep, transducer_lts, Config, Rule};
use shml_core::symbolic::{Domain, OutLabel};
use shml_core::synth::{optimize, synthesize};
use shml_core::transducer::Trn;

use common::{dom, forcing_oracle, formula, system};

fn graph(e: &Trn, d: &Domain) -> Graph<String> {
    let g = transducer_lts(e, d, 4096).unwrap();
    let edges =
        g.edges.into_iter().map(|row| row.into_iter().map(|((a, u), t)| (format!("{a}>{u}"), t)).collect()).collect();
    Graph { names: g.names, edges }
}

fn same_enforcer(a: &Trn, b: &Trn, d: &Domain) -> bool {
    bisim_graphs(&graph(a, d), 0, &graph(b, d), 0).bisimilar
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn violation_matches_forward_oracle(fs in any::<u64>(), ps in any::<u64>()) {
        let f = formula(fs);
        let l = system(ps);
        for t in l.traces(0, 4) {
            prop_assert_eq!(violates(&l, 0, &t, &f).unwrap(), forcing_oracle(&l, 0, &t, &f), "{} on {:?}", f, t);
        }
    }

    #[test]
    fn sound_and_transparent_on_random_pairs(fs in any::<u64>(), ps in any::<u64>()) {
        let d = dom();
        let f = formula(fs);
        let l = system(ps);
        prop_assert_eq!(check_soundness(&f, "p", &l, &d).outcome, Outcome::Pass);
        prop_assert_eq!(check_transparency(&f, "p", &l, &d).outcome, Outcome::Pass);
        prop_assert_ne!(check_violation_semantics(&f, "p", &l, 6).outcome, Outcome::Fail);
    }

    #[test]
    fn sat_matches_nil(fs in any::<u64>()) {
        let d = dom();
        let f = formula(fs);
        let nil = shml_core::process::reachable(&shml_core::process::Process::nil(), 1).unwrap();
        prop_assert_eq!(is_sat(&f, &d).unwrap(), holds_at(&f, &nil, 0).unwrap());
    }

    /// A process that does not violate along `a.t` reaches, by `a`, only
    /// states that do not violate the residual along `t`. The formula `ff`
    /// is left out: it is violated along the empty trace only, and its
    /// residual is again `ff`.
    #[test]
    fn residuals_of_non_violating_traces(fs in any::<u64>(), ps in any::<u64>()) {
        let d = dom();
        let nf = normalize(&formula(fs), &d).unwrap();
        prop_assume!(nf != Formula::Ff);
        let l = system(ps);
        for t in l.traces(0, 4) {
            let Some((a, rest)) = t.split_first() else { continue };
            if violates(&l, 0, &t, &nf).unwrap() {
                continue;
            }
            let residual = after(&nf, &OutLabel::Act(a.clone())).unwrap();
            for q in l.weak_step(0, a) {
                prop_assert!(!violates(&l, q, rest, &residual).unwrap(), "{} after {} on {:?}", nf, a, rest);
            }
        }
    }

    /// Every step of the monitored system leaves the enforcer of the
    /// residual formula, compared as transducers.
    #[test]
    fn steps_follow_residuals(fs in any::<u64>(), ps in any::<u64>()) {
        let d = dom();
        let nf = normalize(&formula(fs), &d).unwrap();
        let p = gen_process(&d, 6, ps);
        let start = Config::new(optimize(&synthesize(&nf).unwrap()), p);
        let mut seen: HashSet<(Formula, Config)> = HashSet::new();
        let mut queue = VecDeque::from([(nf, start)]);
        while let Some((phi, cfg)) = queue.pop_front() {
            if seen.len() > 200 || !seen.insert((phi.clone(), cfg.clone())) {
                continue;
            }
            for (rule, label, next) in istep(&cfg) {
                let residual = match (rule, &label) {
                    (Rule::ITrn | Rule::ITer, OutLabel::Act(_)) => after(&phi, &label).unwrap(),
                    _ => phi.clone(),
                };
                let expect = optimize(&synthesize(&residual).unwrap());
                prop_assert!(
                    same_enforcer(&next.enforcer, &expect, &d),
                    "{} --{} {}--> {} but residual {} gives {}", cfg, rule, label, next.enforcer, residual, expect
                );
                queue.push_back((residual, next));
            }
        }
    }
}
