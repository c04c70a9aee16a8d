//! Transducer terms: identity, transformation prefixes, sums and recursion.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::symbolic::{name, Cond, Domain, Name, Pattern, Subst, Term};
use crate::syntax::{Parser, Tok};

/// Target of a transformation prefix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Pat(Pattern),
    Tau,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Transducer {
    Id,
    Prefix { pat: Pattern, cond: Cond, out: Target, cont: Arc<Transducer> },
    Sum(Vec<Arc<Transducer>>),
    Rec(Name, Arc<Transducer>),
    Var(Name),
}

pub type Trn = Arc<Transducer>;

impl Transducer {
    pub fn id() -> Trn {
        Arc::new(Transducer::Id)
    }

    pub fn prefix(pat: Pattern, cond: Cond, out: Target, cont: Trn) -> Trn {
        Arc::new(Transducer::Prefix { pat, cond, out, cont })
    }

    pub fn sum(parts: Vec<Trn>) -> Trn {
        let mut flat = Vec::new();
        for p in parts {
            match &*p {
                Transducer::Sum(inner) => flat.extend(inner.iter().cloned()),
                _ => flat.push(p),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Arc::new(Transducer::Sum(flat))
        }
    }

    pub fn rec(x: &str, body: Trn) -> Trn {
        Arc::new(Transducer::Rec(name(x), body))
    }

    pub fn var(x: &str) -> Trn {
        Arc::new(Transducer::Var(name(x)))
    }
}

/// Free recursion variables.
pub fn free_rvars(e: &Trn) -> BTreeSet<Name> {
    fn go(e: &Trn, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match &**e {
            Transducer::Id => {}
            Transducer::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Transducer::Prefix { cont, .. } => go(cont, bound, out),
            Transducer::Sum(es) => es.iter().for_each(|f| go(f, bound, out)),
            Transducer::Rec(x, body) => {
                bound.push(x.clone());
                go(body, bound, out);
                bound.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    go(e, &mut Vec::new(), &mut out);
    out
}

/// Substitutes values for free data variables (the `eσ` of a transformation
/// step). Binders shadow.
pub fn subst_data(e: &Trn, sigma: &Subst) -> Trn {
    if sigma.is_empty() {
        return e.clone();
    }
    let map: HashMap<Name, Term> = sigma.iter().map(|(k, v)| (k.clone(), Term::Val(v.clone()))).collect();
    subst_map(e, &map)
}

fn subst_map(e: &Trn, map: &HashMap<Name, Term>) -> Trn {
    match &**e {
        Transducer::Id | Transducer::Var(_) => e.clone(),
        Transducer::Prefix { pat, cond, out, cont } => {
            let bound = pat.binders();
            let inner: HashMap<Name, Term> =
                map.iter().filter(|(k, _)| !bound.contains(k)).map(|(k, v)| (k.clone(), v.clone())).collect();
            Transducer::prefix(
                pat.subst_free(map),
                cond.subst(&inner),
                match out {
                    Target::Tau => Target::Tau,
                    Target::Pat(p) => Target::Pat(p.subst_free(&inner)),
                },
                subst_map(cont, &inner),
            )
        }
        Transducer::Sum(es) => Arc::new(Transducer::Sum(es.iter().map(|f| subst_map(f, map)).collect())),
        Transducer::Rec(x, body) => Arc::new(Transducer::Rec(x.clone(), subst_map(body, map))),
    }
}

/// Substitutes `r` for free occurrences of the recursion variable `x`.
pub fn subst_rvar(e: &Trn, x: &Name, r: &Trn) -> Trn {
    match &**e {
        Transducer::Id => e.clone(),
        Transducer::Var(y) => {
            if y == x {
                r.clone()
            } else {
                e.clone()
            }
        }
        Transducer::Prefix { pat, cond, out, cont } => {
            Transducer::prefix(pat.clone(), cond.clone(), out.clone(), subst_rvar(cont, x, r))
        }
        Transducer::Sum(es) => Arc::new(Transducer::Sum(es.iter().map(|f| subst_rvar(f, x, r)).collect())),
        Transducer::Rec(y, body) => {
            if y == x {
                e.clone()
            } else {
                Arc::new(Transducer::Rec(y.clone(), subst_rvar(body, x, r)))
            }
        }
    }
}

pub fn unfold(e: &Trn) -> Trn {
    match &**e {
        Transducer::Rec(x, body) => subst_rvar(body, x, e),
        _ => e.clone(),
    }
}

/// Checks the well-formedness constraints: conditions and output patterns
/// bind nothing, every data variable is bound by an enclosing source
/// pattern, and (for `closed`) no recursion variable is free.
pub fn check_well_formed(e: &Trn, closed: bool) -> Result<()> {
    fn go(e: &Trn, scope: &mut Vec<Name>) -> Result<()> {
        match &**e {
            Transducer::Id | Transducer::Var(_) => Ok(()),
            Transducer::Prefix { pat, cond, out, cont } => {
                for v in pat.free_vars() {
                    if !scope.contains(&v) {
                        return Err(Error::IllFormed(format!("`{v}` is free in pattern `{pat}`")));
                    }
                }
                let b = pat.binders();
                let n = b.len();
                scope.extend(b);
                let mut r = Ok(());
                for v in cond.free_vars() {
                    if !scope.contains(&v) {
                        r = Err(Error::IllFormed(format!("`{v}` is free in condition `{cond}`")));
                    }
                }
                if let Target::Pat(p) = out {
                    if !p.binders().is_empty() {
                        r = Err(Error::IllFormed(format!("output pattern `{p}` binds variables")));
                    }
                    if *p == Pattern::Insert {
                        r = Err(Error::IllFormed("`*` cannot be an output".into()));
                    }
                    for v in p.free_vars() {
                        if !scope.contains(&v) {
                            r = Err(Error::IllFormed(format!("`{v}` is free in output `{p}`")));
                        }
                    }
                }
                if r.is_ok() {
                    r = go(cont, scope);
                }
                scope.truncate(scope.len() - n);
                r
            }
            Transducer::Sum(es) => es.iter().try_for_each(|f| go(f, scope)),
            Transducer::Rec(_, body) => go(body, scope),
        }
    }
    go(e, &mut Vec::new())?;
    if closed {
        if let Some(x) = free_rvars(e).into_iter().next() {
            return Err(Error::IllFormed(format!("recursion variable `{x}` is unbound")));
        }
    }
    Ok(())
}

/// Equality up to renaming of bound recursion and data variables.
pub fn alpha_eq(a: &Trn, b: &Trn) -> bool {
    fn slot_eq(x: &crate::symbolic::Slot, y: &crate::symbolic::Slot, da: &[Name], db: &[Name]) -> bool {
        use crate::symbolic::Slot;
        match (x, y) {
            (Slot::Lit(u), Slot::Lit(v)) => u == v,
            (Slot::Bind(_), Slot::Bind(_)) => true,
            (Slot::Var(u), Slot::Var(v)) => var_eq(u, v, da, db),
            _ => false,
        }
    }
    fn var_eq(u: &Name, v: &Name, da: &[Name], db: &[Name]) -> bool {
        let iu = da.iter().rposition(|n| n == u);
        let iv = db.iter().rposition(|n| n == v);
        match (iu, iv) {
            (Some(i), Some(j)) => da.len() - i == db.len() - j,
            (None, None) => u == v,
            _ => false,
        }
    }
    fn pat_eq(p: &Pattern, q: &Pattern, da: &[Name], db: &[Name]) -> bool {
        match (p.slot_parts(), q.slot_parts()) {
            (None, None) => true,
            (Some((a1, d1, b1)), Some((a2, d2, b2))) => d1 == d2 && slot_eq(a1, a2, da, db) && slot_eq(b1, b2, da, db),
            _ => false,
        }
    }
    fn term_eq(s: &Term, t: &Term, da: &[Name], db: &[Name]) -> bool {
        match (s, t) {
            (Term::Val(u), Term::Val(v)) => u == v,
            (Term::Var(u), Term::Var(v)) => var_eq(u, v, da, db),
            _ => false,
        }
    }
    fn cond_eq(c: &Cond, d: &Cond, da: &[Name], db: &[Name]) -> bool {
        match (c, d) {
            (Cond::True, Cond::True) | (Cond::False, Cond::False) => true,
            (Cond::Eq(a, b), Cond::Eq(x, y)) | (Cond::Neq(a, b), Cond::Neq(x, y)) => {
                term_eq(a, x, da, db) && term_eq(b, y, da, db)
            }
            (Cond::And(xs), Cond::And(ys)) | (Cond::Or(xs), Cond::Or(ys)) => {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| cond_eq(x, y, da, db))
            }
            (Cond::Not(x), Cond::Not(y)) => cond_eq(x, y, da, db),
            _ => false,
        }
    }
    fn go(a: &Trn, b: &Trn, ra: &mut Vec<Name>, rb: &mut Vec<Name>, da: &mut Vec<Name>, db: &mut Vec<Name>) -> bool {
        match (&**a, &**b) {
            (Transducer::Id, Transducer::Id) => true,
            (Transducer::Var(x), Transducer::Var(y)) => var_eq(x, y, ra, rb),
            (Transducer::Sum(xs), Transducer::Sum(ys)) => {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| go(x, y, ra, rb, da, db))
            }
            (Transducer::Rec(x, e), Transducer::Rec(y, f)) => {
                ra.push(x.clone());
                rb.push(y.clone());
                let r = go(e, f, ra, rb, da, db);
                ra.pop();
                rb.pop();
                r
            }
            (
                Transducer::Prefix { pat: p1, cond: c1, out: o1, cont: e1 },
                Transducer::Prefix { pat: p2, cond: c2, out: o2, cont: e2 },
            ) => {
                if !pat_eq(p1, p2, da, db) {
                    return false;
                }
                let (b1, b2) = (p1.binders(), p2.binders());
                let n = b1.len();
                da.extend(b1);
                db.extend(b2);
                let r = cond_eq(c1, c2, da, db)
                    && match (o1, o2) {
                        (Target::Tau, Target::Tau) => true,
                        (Target::Pat(x), Target::Pat(y)) => pat_eq(x, y, da, db),
                        _ => false,
                    }
                    && go(e1, e2, ra, rb, da, db);
                da.truncate(da.len() - n);
                db.truncate(db.len() - n);
                r
            }
            _ => false,
        }
    }
    go(a, b, &mut vec![], &mut vec![], &mut vec![], &mut vec![])
}

pub fn parse_transducer(text: &str, domain: Option<&Domain>) -> Result<Trn> {
    parse_transducer_at(text, 1, domain)
}

pub(crate) fn parse_transducer_at(text: &str, line0: usize, domain: Option<&Domain>) -> Result<Trn> {
    let mut p = Parser::new(text, line0, domain)?;
    let mut rvars = Vec::new();
    let e = sum(&mut p, &mut rvars)?;
    p.finish()?;
    check_well_formed(&e, true)?;
    Ok(e)
}

fn sum(p: &mut Parser, rvars: &mut Vec<Name>) -> Result<Trn> {
    let mut parts = vec![prefix(p, rvars)?];
    while p.eat(&Tok::Plus) {
        parts.push(prefix(p, rvars)?);
    }
    Ok(Transducer::sum(parts))
}

fn prefix(p: &mut Parser, rvars: &mut Vec<Name>) -> Result<Trn> {
    if p.eat_keyword("id") {
        return Ok(Transducer::id());
    }
    if p.eat_keyword("rec") {
        let x = name(&p.ident("a recursion variable")?);
        p.expect(&Tok::Dot)?;
        rvars.push(x.clone());
        let body = sum(p, rvars);
        rvars.pop();
        return Ok(Arc::new(Transducer::Rec(x, body?)));
    }
    if p.eat(&Tok::LParen) {
        let e = sum(p, rvars)?;
        p.expect(&Tok::RParen)?;
        return Ok(e);
    }
    if p.eat(&Tok::LBrace) {
        let (pat, cond, n) = p.sym_action()?;
        let out = if p.eat(&Tok::Arrow) {
            if p.eat_keyword("tau") {
                Target::Tau
            } else {
                let (q, binders) = p.pattern()?;
                if !binders.is_empty() {
                    p.bump_back();
                    p.pop_scope(n);
                    return Err(p.error(format!("output pattern `{q}` may not bind variables")));
                }
                Target::Pat(q)
            }
        } else {
            match pat.underline() {
                Ok(q) => Target::Pat(q),
                Err(_) => {
                    p.pop_scope(n);
                    return Err(p.error("an insertion prefix needs an explicit `-> output`"));
                }
            }
        };
        let r = p.expect(&Tok::RBrace).and_then(|()| p.expect(&Tok::Dot)).and_then(|()| prefix(p, rvars));
        p.pop_scope(n);
        return Ok(Transducer::prefix(pat, cond, out, r?));
    }
    let x = p.ident("a transducer")?;
    if !rvars.iter().any(|v| v.as_ref() == x) {
        p.bump_back();
        return Err(p.error(format!("unbound recursion variable `{x}`")));
    }
    Ok(Transducer::var(&x))
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Tau => f.write_str("tau"),
            Target::Pat(p) => p.fmt(f),
        }
    }
}

impl fmt::Display for Transducer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transducer::Id => f.write_str("id"),
            Transducer::Var(x) => f.write_str(x),
            Transducer::Prefix { pat, cond, out, cont } => {
                write!(f, "{{{pat}")?;
                if *cond != Cond::True {
                    write!(f, " when {cond}")?;
                }
                let elide = matches!(out, Target::Pat(q) if pat.underline().ok().as_ref() == Some(q));
                if !elide {
                    write!(f, " -> {out}")?;
                }
                f.write_str("}.")?;
                match &**cont {
                    Transducer::Sum(_) | Transducer::Rec(..) => write!(f, "({cont})"),
                    _ => write!(f, "{cont}"),
                }
            }
            Transducer::Sum(es) => {
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    match &**e {
                        Transducer::Sum(_) | Transducer::Rec(..) => write!(f, "({e})")?,
                        _ => write!(f, "{e}")?,
                    }
                }
                Ok(())
            }
            Transducer::Rec(x, body) => match &**body {
                Transducer::Sum(_) => write!(f, "rec {x}.({body})"),
                _ => write!(f, "rec {x}.{body}"),
            },
        }
    }
}
