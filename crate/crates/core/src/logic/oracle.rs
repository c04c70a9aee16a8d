//! The satisfaction relation for sHML, computed as the largest relation over
//! (state, closed formula) pairs closed under its defining implications.
//! Fixpoints are handled by syntactic unfolding and data by substitution, so
//! this shares nothing with the denotational checker beyond the LTS.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lts::Lts;

use super::Formula;

const PAIR_LIMIT: usize = 500_000;

pub fn sat_oracle(lts: &Lts, s: usize, f: &Formula) -> Result<bool> {
    let mut formulas: HashMap<Formula, usize> = HashMap::new();
    let mut formula_list: Vec<Formula> = Vec::new();
    let mut pairs: HashMap<(usize, usize), usize> = HashMap::new();
    let mut pair_list: Vec<(usize, usize)> = Vec::new();
    // Conjunctive requirements of each pair; None marks a pair that is false
    // outright.
    let mut needs: Vec<Option<Vec<usize>>> = Vec::new();

    let intern_formula = |g: Formula, formulas: &mut HashMap<Formula, usize>, list: &mut Vec<Formula>| -> usize {
        if let Some(&i) = formulas.get(&g) {
            return i;
        }
        list.push(g.clone());
        formulas.insert(g, list.len() - 1);
        list.len() - 1
    };

    let f0 = intern_formula(f.clone(), &mut formulas, &mut formula_list);
    pairs.insert((s, f0), 0);
    pair_list.push((s, f0));
    let mut next = 0;
    while next < pair_list.len() {
        let (state, fi) = pair_list[next];
        let formula = formula_list[fi].clone();
        let mut succ: Vec<(usize, Formula)> = Vec::new();
        let req = match &formula {
            Formula::Tt => Some(()),
            Formula::Ff => None,
            Formula::And(gs) => {
                succ.extend(gs.iter().map(|g| (state, g.clone())));
                Some(())
            }
            Formula::Nec(sa, g) => {
                if !sa.is_closed() {
                    return Err(Error::Fragment(format!("open necessity `[{sa}]`")));
                }
                for (a, targets) in lts.weak_row(state) {
                    if let Some(sigma) = sa.admits(a) {
                        let inst = g.subst_values(&sigma);
                        succ.extend(targets.ones().map(|t| (t, inst.clone())));
                    }
                }
                Some(())
            }
            Formula::Max(..) => {
                succ.push((state, formula.unfold()));
                Some(())
            }
            Formula::Var(x) => return Err(Error::UnboundLogicVar(x.to_string())),
            Formula::Or(_) | Formula::Dia(..) | Formula::Min(..) => {
                return Err(Error::Fragment(format!("`{formula}` is not sHML")))
            }
        };
        let ids = req.map(|()| {
            succ.into_iter()
                .map(|(t, g)| {
                    let gi = intern_formula(g, &mut formulas, &mut formula_list);
                    *pairs.entry((t, gi)).or_insert_with(|| {
                        pair_list.push((t, gi));
                        pair_list.len() - 1
                    })
                })
                .collect::<Vec<_>>()
        });
        needs.push(ids);
        if pair_list.len() > PAIR_LIMIT {
            return Err(Error::BoundExceeded(PAIR_LIMIT));
        }
        next += 1;
    }

    // Remove pairs until every remaining one has all its requirements.
    let n = pair_list.len();
    let mut alive = vec![true; n];
    let mut users: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut dead = Vec::new();
    for (i, need) in needs.iter().enumerate() {
        match need {
            None => dead.push(i),
            Some(ids) => ids.iter().for_each(|&j| users[j].push(i)),
        }
    }
    for &i in &dead {
        alive[i] = false;
    }
    while let Some(j) = dead.pop() {
        for &i in &users[j] {
            if alive[i] {
                alive[i] = false;
                dead.push(i);
            }
        }
    }
    Ok(alive[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{holds_at, parse_formula};
    use crate::process::{parse_process, reachable};

    fn check(p: &str, f: &str) -> bool {
        let lts = reachable(&parse_process(p, None).unwrap(), 100).unwrap();
        let f = parse_formula(f, None).unwrap();
        let o = sat_oracle(&lts, 0, &f).unwrap();
        assert_eq!(o, holds_at(&f, &lts, 0).unwrap());
        o
    }

    #[test]
    fn agrees_on_server() {
        let phi1 = "max X.[(x)?req when x!=j]([x!ans]X && [x?req]ff)";
        assert!(check("rec X.(i?req.i!ans.X + i?cls.nil)", phi1));
        assert!(!check("rec X.(i?req.X + i?req.i!ans.X + i?cls.nil)", phi1));
    }

    #[test]
    fn ff_never_holds() {
        assert!(!check("nil", "ff"));
        assert!(!check("i?a.nil", "ff"));
        assert!(check("nil", "[i?a]ff && max X.[i?b]X"));
    }

    #[test]
    fn rejects_non_safety() {
        let lts = reachable(&parse_process("nil", None).unwrap(), 10).unwrap();
        let f = parse_formula("<i?a>tt", None).unwrap();
        assert!(matches!(sat_oracle(&lts, 0, &f), Err(Error::Fragment(_))));
    }
}
