use crate::symbolic::{disjoint, Domain, Name, SymAction};

use super::Formula;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub closed: bool,
    pub guarded: bool,
    pub shml: bool,
    pub shmlnf: bool,
}

pub fn classify(f: &Formula, d: &Domain) -> Classification {
    Classification {
        closed: f.free_lvars().is_empty(),
        guarded: guarded(f, &mut Vec::new()),
        shml: is_shml(f),
        shmlnf: is_shml(f) && nf_shape(f, true) && guards_disjoint(f, d),
    }
}

pub fn is_guarded(f: &Formula) -> bool {
    guarded(f, &mut Vec::new())
}

/// Every occurrence of a bound logical variable sits under a modality
/// within the scope of its binder.
fn guarded(f: &Formula, unguarded: &mut Vec<Name>) -> bool {
    match f {
        Formula::Tt | Formula::Ff => true,
        Formula::Var(x) => !unguarded.contains(x),
        Formula::Or(fs) | Formula::And(fs) => fs.iter().all(|g| guarded(g, unguarded)),
        Formula::Dia(_, g) | Formula::Nec(_, g) => guarded(g, &mut Vec::new()),
        Formula::Min(x, g) | Formula::Max(x, g) => {
            unguarded.push(x.clone());
            let ok = guarded(g, unguarded);
            unguarded.pop();
            ok
        }
    }
}

/// The normal-form grammar alone, without the guard disjointness check.
pub fn nf_structure(f: &Formula) -> bool {
    is_shml(f) && nf_shape(f, true)
}

pub fn is_shml(f: &Formula) -> bool {
    match f {
        Formula::Tt | Formula::Ff | Formula::Var(_) => true,
        Formula::And(fs) => fs.iter().all(is_shml),
        Formula::Nec(_, g) | Formula::Max(_, g) => is_shml(g),
        Formula::Or(_) | Formula::Dia(..) | Formula::Min(..) => false,
    }
}

/// The normal-form grammar: `tt`/`ff` only at the top or right under a
/// necessity, conjunctions made of necessities only, and no vacuous binder.
fn nf_shape(f: &Formula, top: bool) -> bool {
    match f {
        Formula::Tt | Formula::Ff => top,
        Formula::Var(_) => true,
        Formula::Nec(_, g) => nf_body(g),
        Formula::And(fs) => !fs.is_empty() && fs.iter().all(|g| matches!(g, Formula::Nec(_, h) if nf_body(h))),
        Formula::Max(x, g) => g.has_free_lvar(x) && nf_shape(g, false),
        _ => false,
    }
}

fn nf_body(f: &Formula) -> bool {
    matches!(f, Formula::Tt | Formula::Ff) || nf_shape(f, false)
}

/// Sibling necessity guards are pairwise disjoint everywhere in `f`.
pub fn guards_disjoint(f: &Formula, d: &Domain) -> bool {
    match f {
        Formula::Tt | Formula::Ff | Formula::Var(_) => true,
        Formula::Nec(_, g) | Formula::Dia(_, g) | Formula::Max(_, g) | Formula::Min(_, g) => guards_disjoint(g, d),
        Formula::Or(fs) => fs.iter().all(|g| guards_disjoint(g, d)),
        Formula::And(fs) => {
            let guards: Vec<&SymAction> = fs
                .iter()
                .filter_map(|g| match g {
                    Formula::Nec(sa, _) => Some(sa),
                    _ => None,
                })
                .collect();
            for (i, a) in guards.iter().enumerate() {
                for b in &guards[i + 1..] {
                    if !disjoint(a, b, d) {
                        return false;
                    }
                }
            }
            fs.iter().all(|g| guards_disjoint(g, d))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn dom() -> Domain {
        Domain::new(["i", "j"], ["req", "ans", "cls"]).unwrap()
    }

    fn c(s: &str) -> Classification {
        classify(&parse_formula(s, None).unwrap(), &dom())
    }

    #[test]
    fn phi1_is_normal() {
        let k = c("max X.[(x)?req when x!=j]([x!ans]X && [x?req]ff)");
        assert_eq!(k, Classification { closed: true, guarded: true, shml: true, shmlnf: true });
    }

    #[test]
    fn phi_ns_not_safety() {
        let k = c("[i?req]ff || [i!ans]ff");
        assert!(k.closed && k.guarded && !k.shml && !k.shmlnf);
    }

    #[test]
    fn unguarded() {
        let k = c("max X.X");
        assert!(k.closed && !k.guarded);
        assert!(!c("max X.(X && [i?req]X)").guarded);
        assert!(!c("[i?req]X").closed);
    }

    #[test]
    fn nf_clauses() {
        // overlapping guards
        assert!(!c("[(x)?req]ff && [i?req]tt").shmlnf);
        // vacuous binder
        assert!(!c("max X.[i?req]ff").shmlnf);
        // tt below a conjunction
        assert!(!c("tt && [i?req]ff").shmlnf);
        assert!(c("tt").shmlnf);
        assert!(c("[i?req]ff && [i!ans]tt").shmlnf);
    }
}
