//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;

use shml_core::harness::{gen_formula, gen_process, FORMULA_BUDGET, PROCESS_BUDGET, PROCESS_STATES};
use shml_core::logic::Formula;
use shml_core::lts::Lts;
use shml_core::process::reachable;
use shml_core::symbolic::{name, Action, Cond, Dir, Domain, OutLabel, Pattern, Slot, SymAction, Term};

pub fn dom() -> Domain {
    Domain::new(["i", "j"], ["req", "ans", "cls"]).unwrap()
}

pub fn formula(seed: u64) -> Formula {
    gen_formula(&dom(), 1 + (seed % FORMULA_BUDGET as u64) as usize, seed)
}

pub fn system(seed: u64) -> Lts {
    let p = gen_process(&dom(), 1 + (seed % PROCESS_BUDGET as u64) as usize, seed);
    reachable(&p, PROCESS_STATES).unwrap()
}

/// Strong bisimilarity as the greatest fixpoint of the transfer condition,
/// by deleting pairs from the full relation until nothing changes.
pub fn naive_bisim(a: &Lts, sa: usize, b: &Lts, sb: usize) -> bool {
    let mut rel = vec![vec![true; b.len()]; a.len()];
    loop {
        let mut changed = false;
        for p in 0..a.len() {
            for q in 0..b.len() {
                if !rel[p][q] {
                    continue;
                }
                let forth = a
                    .transitions(p)
                    .iter()
                    .all(|(l, p2)| b.transitions(q).iter().any(|(m, q2)| l == m && rel[*p2][*q2]));
                let back = b
                    .transitions(q)
                    .iter()
                    .all(|(m, q2)| a.transitions(p).iter().any(|(l, p2)| l == m && rel[*p2][*q2]));
                if !(forth && back) {
                    rel[p][q] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return rel[sa][sb];
        }
    }
}

/// States reachable by `a` surrounded by any number of `tau`s, computed from
/// the raw transition lists.
pub fn weak_after(l: &Lts, from: &BTreeSet<usize>, a: Option<&Action>) -> BTreeSet<usize> {
    fn closure(l: &Lts, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut out = set.clone();
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for (lbl, t) in l.transitions(s) {
                if *lbl == OutLabel::Tau && out.insert(*t) {
                    stack.push(*t);
                }
            }
        }
        out
    }
    let pre = closure(l, from);
    match a {
        None => pre,
        Some(a) => {
            let mut mid = BTreeSet::new();
            for s in pre {
                for (lbl, t) in l.transitions(s) {
                    if lbl.action() == Some(a) {
                        mid.insert(*t);
                    }
                }
            }
            closure(l, &mid)
        }
    }
}

/// The forcing relation computed forwards: the set of (state, residual)
/// pairs reachable by consuming the trace one action at a time. The trace
/// is violating when `ff` is among the residuals at the end.
pub fn forcing_oracle(l: &Lts, s: usize, t: &[Action], f: &Formula) -> bool {
    fn expand(f: &Formula, out: &mut Vec<Formula>, depth: usize) {
        match f {
            Formula::And(fs) => fs.iter().for_each(|g| expand(g, out, depth)),
            Formula::Max(..) if depth < 64 => expand(&f.unfold(), out, depth + 1),
            other => out.push(other.clone()),
        }
    }
    let mut current: BTreeSet<(usize, Formula)> = BTreeSet::new();
    let mut parts = Vec::new();
    expand(f, &mut parts, 0);
    for g in parts {
        current.insert((s, g));
    }
    for a in t {
        let mut next = BTreeSet::new();
        for (q, g) in &current {
            if let Formula::Nec(sa, body) = g {
                if let Some(sigma) = sa.admits(a) {
                    let body = body.subst_values(&sigma);
                    let mut parts = Vec::new();
                    expand(&body, &mut parts, 0);
                    for q2 in weak_after(l, &BTreeSet::from([*q]), Some(a)) {
                        for h in &parts {
                            next.insert((q2, h.clone()));
                        }
                    }
                }
            }
        }
        current = next;
    }
    current.iter().any(|(_, g)| *g == Formula::Ff)
}

fn value() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("i"), Just("j"), Just("req"), Just("ans"), Just("cls")]
}

fn slot(var: &'static str, literals: &'static [&'static str]) -> impl Strategy<Value = Slot> {
    prop_oneof![proptest::sample::select(literals).prop_map(|v| Slot::Lit(name(v))), Just(Slot::Bind(name(var))),]
}

fn cond() -> impl Strategy<Value = Cond> {
    let term =
        prop_oneof![Just(Term::Var(name("x"))), Just(Term::Var(name("y"))), value().prop_map(|v| Term::Val(name(v))),];
    let atom = prop_oneof![
        Just(Cond::True),
        Just(Cond::False),
        (term.clone(), term.clone()).prop_map(|(a, b)| Cond::Eq(a, b)),
        (term.clone(), term).prop_map(|(a, b)| Cond::Neq(a, b)),
    ];
    atom.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 2).prop_map(Cond::And),
            proptest::collection::vec(inner.clone(), 2).prop_map(Cond::Or),
            inner.prop_map(|c| Cond::Not(Box::new(c))),
        ]
    })
}

/// Symbolic actions whose pattern binds `x` and/or `y` and whose condition
/// mentions only bound variables.
pub fn sym_action() -> impl Strategy<Value = SymAction> {
    (slot("x", &["i", "j"]), any::<bool>(), slot("y", &["req", "ans", "cls"]), cond()).prop_map(
        |(port, input, payload, c)| {
            let dir = if input { Dir::Input } else { Dir::Output };
            let bound: Vec<_> = [&port, &payload]
                .iter()
                .filter_map(|s| match s {
                    Slot::Bind(x) => Some(x.clone()),
                    _ => None,
                })
                .collect();
            let c = if c.free_vars().iter().all(|v| bound.contains(v)) { c } else { Cond::True };
            SymAction::new(Pattern::new(port, dir, payload), c)
        },
    )
}

pub fn action() -> impl Strategy<Value = Action> {
    (proptest::sample::select(&["i", "j"][..]), any::<bool>(), proptest::sample::select(&["req", "ans", "cls"][..]))
        .prop_map(|(p, input, v)| Action::new(p, if input { Dir::Input } else { Dir::Output }, v))
}
