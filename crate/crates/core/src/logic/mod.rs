//! recHML formulas with symbolic actions.

mod classify;
mod mc;
mod oracle;
mod parse;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::symbolic::{name, Cond, Name, Pattern, SymAction, Term};

pub use classify::{classify, guards_disjoint, is_guarded, is_shml, nf_structure, Classification};
pub use mc::{holds_at, mc_eval, satisfies, Valuation};
pub use oracle::sat_oracle;
pub use parse::{parse_formula, parse_formula_at};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Tt,
    Ff,
    Or(Vec<Formula>),
    And(Vec<Formula>),
    Dia(SymAction, Box<Formula>),
    Nec(SymAction, Box<Formula>),
    Min(Name, Box<Formula>),
    Max(Name, Box<Formula>),
    Var(Name),
}

impl Formula {
    pub fn nec(sa: SymAction, body: Formula) -> Formula {
        Formula::Nec(sa, Box::new(body))
    }

    pub fn dia(sa: SymAction, body: Formula) -> Formula {
        Formula::Dia(sa, Box::new(body))
    }

    pub fn max(x: &str, body: Formula) -> Formula {
        Formula::Max(name(x), Box::new(body))
    }

    pub fn min(x: &str, body: Formula) -> Formula {
        Formula::Min(name(x), Box::new(body))
    }

    pub fn var(x: &str) -> Formula {
        Formula::Var(name(x))
    }

    /// Number of constructors, counting each symbolic action as one.
    pub fn size(&self) -> usize {
        match self {
            Formula::Tt | Formula::Ff | Formula::Var(_) => 1,
            Formula::Or(fs) | Formula::And(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
            Formula::Dia(_, f) | Formula::Nec(_, f) | Formula::Min(_, f) | Formula::Max(_, f) => 1 + f.size(),
        }
    }

    /// Free logical variables.
    pub fn free_lvars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_lvars(&mut Vec::new(), &mut out);
        out
    }

    fn collect_lvars(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Formula::Tt | Formula::Ff => {}
            Formula::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Formula::Or(fs) | Formula::And(fs) => fs.iter().for_each(|f| f.collect_lvars(bound, out)),
            Formula::Dia(_, f) | Formula::Nec(_, f) => f.collect_lvars(bound, out),
            Formula::Min(x, f) | Formula::Max(x, f) => {
                bound.push(x.clone());
                f.collect_lvars(bound, out);
                bound.pop();
            }
        }
    }

    pub fn has_free_lvar(&self, x: &Name) -> bool {
        self.free_lvars().contains(x)
    }

    /// Free data variables.
    pub fn free_dvars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_dvars(&mut Vec::new(), &mut out);
        out
    }

    fn collect_dvars(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Formula::Tt | Formula::Ff | Formula::Var(_) => {}
            Formula::Or(fs) | Formula::And(fs) => fs.iter().for_each(|f| f.collect_dvars(bound, out)),
            Formula::Min(_, f) | Formula::Max(_, f) => f.collect_dvars(bound, out),
            Formula::Dia(sa, f) | Formula::Nec(sa, f) => {
                for v in sa.free_vars() {
                    if !bound.contains(&v) {
                        out.insert(v);
                    }
                }
                let b = sa.pattern.binders();
                let n = b.len();
                bound.extend(b);
                f.collect_dvars(bound, out);
                bound.truncate(bound.len() - n);
            }
        }
    }

    /// All data variable names occurring anywhere, bound or free.
    pub fn all_dvars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit_actions(&mut |sa| {
            out.extend(sa.pattern.binders());
            out.extend(sa.pattern.free_vars());
            out.extend(sa.cond.free_vars());
        });
        out
    }

    pub fn visit_actions(&self, f: &mut dyn FnMut(&SymAction)) {
        match self {
            Formula::Tt | Formula::Ff | Formula::Var(_) => {}
            Formula::Or(fs) | Formula::And(fs) => fs.iter().for_each(|g| g.visit_actions(f)),
            Formula::Min(_, g) | Formula::Max(_, g) => g.visit_actions(f),
            Formula::Dia(sa, g) | Formula::Nec(sa, g) => {
                f(sa);
                g.visit_actions(f);
            }
        }
    }

    /// Capture-avoiding substitution of `psi` for the free occurrences of the
    /// logical variable `x`.
    pub fn subst_lvar(&self, x: &Name, psi: &Formula) -> Formula {
        let psi_dvars = psi.free_dvars();
        self.subst_lvar_in(x, psi, &psi_dvars)
    }

    fn subst_lvar_in(&self, x: &Name, psi: &Formula, psi_dvars: &BTreeSet<Name>) -> Formula {
        match self {
            Formula::Tt | Formula::Ff => self.clone(),
            Formula::Var(y) => {
                if y == x {
                    psi.clone()
                } else {
                    self.clone()
                }
            }
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.subst_lvar_in(x, psi, psi_dvars)).collect()),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.subst_lvar_in(x, psi, psi_dvars)).collect()),
            Formula::Min(y, f) | Formula::Max(y, f) => {
                if y == x {
                    return self.clone();
                }
                let body = Box::new(f.subst_lvar_in(x, psi, psi_dvars));
                if matches!(self, Formula::Min(..)) {
                    Formula::Min(y.clone(), body)
                } else {
                    Formula::Max(y.clone(), body)
                }
            }
            Formula::Dia(sa, f) | Formula::Nec(sa, f) => {
                let (sa, f) = rename_apart(sa, f, psi_dvars);
                let body = Box::new(f.subst_lvar_in(x, psi, psi_dvars));
                if matches!(self, Formula::Dia(..)) {
                    Formula::Dia(sa, body)
                } else {
                    Formula::Nec(sa, body)
                }
            }
        }
    }

    /// `φ[max X.φ/X]` for a top-level fixpoint; other formulas unchanged.
    pub fn unfold(&self) -> Formula {
        match self {
            Formula::Max(x, f) | Formula::Min(x, f) => f.subst_lvar(x, self),
            _ => self.clone(),
        }
    }

    /// Capture-avoiding substitution of data variables.
    pub fn subst_data(&self, map: &HashMap<Name, Term>) -> Formula {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            Formula::Tt | Formula::Ff | Formula::Var(_) => self.clone(),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.subst_data(map)).collect()),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.subst_data(map)).collect()),
            Formula::Min(y, f) => Formula::Min(y.clone(), Box::new(f.subst_data(map))),
            Formula::Max(y, f) => Formula::Max(y.clone(), Box::new(f.subst_data(map))),
            Formula::Dia(sa, f) | Formula::Nec(sa, f) => {
                let range: BTreeSet<Name> = map
                    .values()
                    .filter_map(|t| match t {
                        Term::Var(v) => Some(v.clone()),
                        Term::Val(_) => None,
                    })
                    .collect();
                let (sa, f) = rename_apart(sa, f, &range);
                let new_sa = sa.subst_free(map);
                let bound = sa.pattern.binders();
                let inner: HashMap<Name, Term> =
                    map.iter().filter(|(k, _)| !bound.contains(k)).map(|(k, v)| (k.clone(), v.clone())).collect();
                let body = Box::new(f.subst_data(&inner));
                if matches!(self, Formula::Dia(..)) {
                    Formula::Dia(new_sa, body)
                } else {
                    Formula::Nec(new_sa, body)
                }
            }
        }
    }

    pub fn subst_values(&self, sigma: &crate::symbolic::Subst) -> Formula {
        let map: HashMap<Name, Term> = sigma.iter().map(|(k, v)| (k.clone(), Term::Val(v.clone()))).collect();
        self.subst_data(&map)
    }

    /// Renames logical variables by `f`, free and bound alike.
    pub fn map_lvars(&self, f: &dyn Fn(&Name) -> Name) -> Formula {
        match self {
            Formula::Tt | Formula::Ff => self.clone(),
            Formula::Var(x) => Formula::Var(f(x)),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|g| g.map_lvars(f)).collect()),
            Formula::And(fs) => Formula::And(fs.iter().map(|g| g.map_lvars(f)).collect()),
            Formula::Min(x, g) => Formula::Min(f(x), Box::new(g.map_lvars(f))),
            Formula::Max(x, g) => Formula::Max(f(x), Box::new(g.map_lvars(f))),
            Formula::Dia(sa, g) => Formula::Dia(sa.clone(), Box::new(g.map_lvars(f))),
            Formula::Nec(sa, g) => Formula::Nec(sa.clone(), Box::new(g.map_lvars(f))),
        }
    }
}

/// Renames binders of `sa` that clash with `avoid`, in the pattern, the
/// condition and the continuation.
fn rename_apart(sa: &SymAction, body: &Formula, avoid: &BTreeSet<Name>) -> (SymAction, Formula) {
    let binders = sa.pattern.binders();
    if !binders.iter().any(|b| avoid.contains(b)) {
        return (sa.clone(), body.clone());
    }
    let mut used: BTreeSet<Name> = avoid.clone();
    used.extend(body.all_dvars());
    used.extend(binders.iter().cloned());
    used.extend(sa.cond.free_vars());
    let mut ren: HashMap<Name, Name> = HashMap::new();
    for b in binders.iter().filter(|b| avoid.contains(*b)) {
        let mut cand = format!("{b}'");
        while used.contains(cand.as_str()) {
            cand.push('\'');
        }
        let fresh = name(&cand);
        used.insert(fresh.clone());
        ren.insert(b.clone(), fresh);
    }
    let terms: HashMap<Name, Term> = ren.iter().map(|(k, v)| (k.clone(), Term::Var(v.clone()))).collect();
    let pattern: Pattern = sa.pattern.rename_binders(&ren);
    let cond: Cond = sa.cond.subst(&terms);
    (SymAction::new(pattern, cond), body.subst_data(&terms))
}

impl Formula {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            Formula::Tt => f.write_str("tt"),
            Formula::Ff => f.write_str("ff"),
            Formula::Var(x) => f.write_str(x),
            Formula::Or(fs) | Formula::And(fs) => {
                let (sep, level) = if matches!(self, Formula::Or(_)) { (" || ", 0) } else { (" && ", 1) };
                if fs.is_empty() {
                    return f.write_str(if level == 0 { "ff" } else { "tt" });
                }
                let paren = prec > level;
                if paren {
                    f.write_str("(")?;
                }
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    g.fmt_prec(f, level + 1)?;
                }
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Formula::Nec(sa, g) => {
                write!(f, "[{sa}]")?;
                g.fmt_prec(f, 2)
            }
            Formula::Dia(sa, g) => {
                write!(f, "<{sa}>")?;
                g.fmt_prec(f, 2)
            }
            Formula::Max(x, g) | Formula::Min(x, g) => {
                let kw = if matches!(self, Formula::Max(..)) { "max" } else { "min" };
                if prec > 0 {
                    write!(f, "({kw} {x}.")?;
                    g.fmt_prec(f, 0)?;
                    f.write_str(")")
                } else {
                    write!(f, "{kw} {x}.")?;
                    g.fmt_prec(f, 0)
                }
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}
