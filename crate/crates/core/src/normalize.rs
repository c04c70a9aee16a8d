//! Normal form for sHML.
//!
//! A formula is turned into a system of parameterised equations, guards of
//! each body are split into disjoint minterms, conjunctions of targets are
//! merged into single states and the result is folded back into a formula.
//! When the symbolic merge does not settle, the same construction is run on
//! ground instances of the equations instead.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::logic::{classify, is_shml, Formula};
use crate::symbolic::{
    name, normalize_pattern_with, readable_names, satisfiable, Cond, Dir, Domain, Fresh, Name, Pattern, Slot, Subst,
    SymAction, Term,
};

const MAX_CONDITIONS: usize = 12;
const SYMBOLIC_STATE_CAP: usize = 256;
const GROUND_STATE_CAP: usize = 4096;
const SYMBOLIC_NODE_CAP: usize = 4000;
const GROUND_NODE_CAP: usize = 50_000;
const DEPTH_CAP: usize = 64;
/// Parameters of one symbolic state; each one multiplies the cost of the
/// satisfiability checks by the number of values.
const ARITY_CAP: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub guard: SymAction,
    pub target: usize,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Body {
    Tt,
    Ff,
    And(Vec<Branch>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub label: String,
    pub params: Vec<Name>,
    pub body: Body,
}

/// Equations indexed by position; `start` has no parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqSystem {
    pub eqs: Vec<Equation>,
    pub start: usize,
}

type Targets = Vec<(usize, Vec<Term>)>;

fn subst_term(t: &Term, map: &HashMap<Name, Term>) -> Term {
    match t {
        Term::Var(x) => map.get(x).cloned().unwrap_or_else(|| t.clone()),
        Term::Val(_) => t.clone(),
    }
}

fn var_terms(ren: &HashMap<Name, Name>) -> HashMap<Name, Term> {
    ren.iter().map(|(k, v)| (k.clone(), Term::Var(v.clone()))).collect()
}

fn rename_branch(b: &Branch, ren: &HashMap<Name, Name>) -> Branch {
    let terms = var_terms(ren);
    Branch {
        guard: SymAction::new(b.guard.pattern.rename_binders(ren), b.guard.cond.subst(&terms)),
        target: b.target,
        args: b.args.iter().map(|t| subst_term(t, &terms)).collect(),
    }
}

/// Substitution for the free variables of a branch; its binders shadow.
fn subst_branch_free(b: &Branch, map: &HashMap<Name, Term>) -> Branch {
    let bound = b.guard.pattern.binders();
    let inner: HashMap<Name, Term> =
        map.iter().filter(|(k, _)| !bound.contains(k)).map(|(k, v)| (k.clone(), v.clone())).collect();
    Branch {
        guard: b.guard.subst_free(map),
        target: b.target,
        args: b.args.iter().map(|t| subst_term(t, &inner)).collect(),
    }
}

fn param(prefix: &str, i: usize) -> Name {
    name(&format!("{prefix}#{i}"))
}

fn check_input(f: &Formula) -> Result<()> {
    if let Some(x) = f.free_lvars().into_iter().next() {
        return Err(Error::UnboundLogicVar(x.to_string()));
    }
    if let Some(x) = f.free_dvars().into_iter().next() {
        return Err(Error::UnboundDataVar(x.to_string()));
    }
    if !is_shml(f) {
        return Err(Error::Fragment(format!("`{f}` is not an sHML formula")));
    }
    if let Some(x) = unguarded_var(f, &mut Vec::new()) {
        return Err(Error::Unguarded(x.to_string()));
    }
    Ok(())
}

fn unguarded_var(f: &Formula, open: &mut Vec<Name>) -> Option<Name> {
    match f {
        Formula::Tt | Formula::Ff => None,
        Formula::Var(x) => open.contains(x).then(|| x.clone()),
        Formula::Or(fs) | Formula::And(fs) => fs.iter().find_map(|g| unguarded_var(g, open)),
        Formula::Dia(_, g) | Formula::Nec(_, g) => unguarded_var(g, &mut Vec::new()),
        Formula::Min(x, g) | Formula::Max(x, g) => {
            open.push(x.clone());
            let r = unguarded_var(g, open);
            open.pop();
            r
        }
    }
}

/// Free data variables in order of first occurrence.
fn ordered_free(f: &Formula) -> Vec<Name> {
    fn go(f: &Formula, bound: &mut Vec<Name>, out: &mut Vec<Name>) {
        match f {
            Formula::Tt | Formula::Ff | Formula::Var(_) => {}
            Formula::Or(fs) | Formula::And(fs) => fs.iter().for_each(|g| go(g, bound, out)),
            Formula::Min(_, g) | Formula::Max(_, g) => go(g, bound, out),
            Formula::Dia(sa, g) | Formula::Nec(sa, g) => {
                for v in sa.free_vars() {
                    if !bound.contains(&v) && !out.contains(&v) {
                        out.push(v);
                    }
                }
                let b = sa.pattern.binders();
                let n = b.len();
                bound.extend(b);
                go(g, bound, out);
                bound.truncate(bound.len() - n);
            }
        }
    }
    let mut out = Vec::new();
    go(f, &mut Vec::new(), &mut out);
    out
}

/// Every pattern slot becomes a binder constrained by an equality.
pub fn normalize_patterns(f: &Formula, fresh: &mut Fresh) -> Formula {
    let mut next = || fresh.next_name();
    map_actions(f, &mut |sa| normalize_pattern_with(sa, &mut next))
}

fn map_actions(f: &Formula, m: &mut dyn FnMut(&SymAction) -> SymAction) -> Formula {
    match f {
        Formula::Tt | Formula::Ff | Formula::Var(_) => f.clone(),
        Formula::Or(fs) => Formula::Or(fs.iter().map(|g| map_actions(g, m)).collect()),
        Formula::And(fs) => Formula::And(fs.iter().map(|g| map_actions(g, m)).collect()),
        Formula::Min(x, g) => Formula::Min(x.clone(), Box::new(map_actions(g, m))),
        Formula::Max(x, g) => Formula::Max(x.clone(), Box::new(map_actions(g, m))),
        Formula::Dia(sa, g) => Formula::Dia(m(sa), Box::new(map_actions(g, m))),
        Formula::Nec(sa, g) => Formula::Nec(m(sa), Box::new(map_actions(g, m))),
    }
}

/// Replaces each `max X.φ` by `φ[max X.φ/X]` once, top-down, leaving the
/// substituted copies alone.
pub fn stage1_unfold(f: &Formula) -> Result<Formula> {
    check_input(f)?;
    fn go(f: &Formula) -> Formula {
        match f {
            Formula::Max(x, body) => go(body).subst_lvar(x, f),
            Formula::And(fs) => Formula::And(fs.iter().map(go).collect()),
            Formula::Nec(sa, g) => Formula::Nec(sa.clone(), Box::new(go(g))),
            _ => f.clone(),
        }
    }
    Ok(go(f))
}

/// Key of an equation: free data variables renamed to parameters and
/// top-level fixpoints unfolded.
fn canon(phi: &Formula) -> (Formula, Vec<Name>) {
    let free = ordered_free(phi);
    let map: HashMap<Name, Term> =
        free.iter().enumerate().map(|(i, v)| (v.clone(), Term::Var(param("p", i)))).collect();
    let mut key = phi.subst_data(&map);
    while let Formula::Max(..) = key {
        key = key.unfold();
    }
    (key, free)
}

#[derive(Default)]
struct Interner {
    ids: HashMap<Formula, usize>,
    keys: Vec<(Formula, usize)>,
}

impl Interner {
    fn get(&mut self, key: Formula, arity: usize) -> usize {
        if let Some(&i) = self.ids.get(&key) {
            return i;
        }
        let i = self.keys.len();
        self.ids.insert(key.clone(), i);
        self.keys.push((key, arity));
        i
    }
}

/// Collects the branches of a key formula; `true` means the body is `ff`.
fn collect_body(psi: &Formula, intern: &mut Interner, out: &mut Vec<Branch>) -> Result<bool> {
    match psi {
        Formula::Tt => Ok(false),
        Formula::Ff => Ok(true),
        Formula::And(fs) => {
            for g in fs {
                if collect_body(g, intern, out)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Max(..) => collect_body(&psi.unfold(), intern, out),
        Formula::Nec(sa, g) => {
            let (key, free) = canon(g);
            let target = intern.get(key, free.len());
            out.push(Branch { guard: sa.clone(), target, args: free.into_iter().map(Term::Var).collect() });
            Ok(false)
        }
        Formula::Var(x) => Err(Error::UnboundLogicVar(x.to_string())),
        other => Err(Error::Fragment(format!("`{other}` is not an sHML formula"))),
    }
}

/// One equation per distinct subformula reachable below necessities.
pub fn stage2_equations(f: &Formula) -> Result<EqSystem> {
    check_input(f)?;
    let mut intern = Interner::default();
    let (key, _) = canon(f);
    let start = intern.get(key, 0);
    let mut eqs = Vec::new();
    let mut i = 0;
    while i < intern.keys.len() {
        let (key, arity) = intern.keys[i].clone();
        let mut branches = Vec::new();
        let body = if collect_body(&key, &mut intern, &mut branches)? {
            Body::Ff
        } else if branches.is_empty() {
            Body::Tt
        } else {
            Body::And(branches)
        };
        eqs.push(Equation { label: format!("X{i}"), params: (0..arity).map(|k| param("p", k)).collect(), body });
        i += 1;
    }
    Ok(EqSystem { eqs, start })
}

/// Renames the binders of each branch to those of the first branch with the
/// same direction, so patterns of one kind become syntactically equal.
fn align(branches: &[Branch]) -> Vec<Branch> {
    let mut firsts: Vec<(Dir, Vec<Name>)> = Vec::new();
    branches
        .iter()
        .map(|b| {
            let pat = &b.guard.pattern;
            let Some(dir) = pat.dir() else { return b.clone() };
            if !pat.is_normalised() {
                return b.clone();
            }
            match firsts.iter().find(|(d, _)| *d == dir) {
                None => {
                    firsts.push((dir, pat.binders()));
                    b.clone()
                }
                Some((_, names)) => {
                    let ren: HashMap<Name, Name> = pat.binders().into_iter().zip(names.iter().cloned()).collect();
                    rename_branch(b, &ren)
                }
            }
        })
        .collect()
}

fn map_bodies(sys: &EqSystem, mut f: impl FnMut(&Equation, &[Branch]) -> Result<Body>) -> Result<EqSystem> {
    let mut eqs = Vec::with_capacity(sys.eqs.len());
    for eq in &sys.eqs {
        let body = match &eq.body {
            Body::And(bs) => f(eq, bs)?,
            other => other.clone(),
        };
        eqs.push(Equation { label: eq.label.clone(), params: eq.params.clone(), body });
    }
    Ok(EqSystem { eqs, start: sys.start })
}

pub fn stage3_align(sys: &EqSystem) -> EqSystem {
    map_bodies(sys, |_, bs| Ok(Body::And(align(bs)))).expect("alignment cannot fail")
}

/// Groups aligned branches by pattern and splits each group's conditions
/// into satisfiable minterms, each carrying the union of the targets of the
/// conditions it keeps positive.
fn split(branches: &[Branch], params: &[Name], d: &Domain) -> Result<Vec<(SymAction, Targets)>> {
    let mut groups: Vec<(Pattern, Vec<(Cond, Targets)>)> = Vec::new();
    for b in align(branches) {
        let gi = match groups.iter().position(|(p, _)| *p == b.guard.pattern) {
            Some(i) => i,
            None => {
                groups.push((b.guard.pattern.clone(), Vec::new()));
                groups.len() - 1
            }
        };
        let conds = &mut groups[gi].1;
        let t = (b.target, b.args);
        match conds.iter_mut().find(|(c, _)| *c == b.guard.cond) {
            Some((_, ts)) => {
                if !ts.contains(&t) {
                    ts.push(t);
                }
            }
            None => conds.push((b.guard.cond, vec![t])),
        }
    }
    let mut out = Vec::new();
    for (pattern, conds) in groups {
        if conds.len() > MAX_CONDITIONS {
            return Err(Error::TooManyConditions(conds.len()));
        }
        let mut vars = pattern.binders();
        vars.extend(params.iter().cloned());
        let mut emit = |cond: Cond, ts: Targets| out.push((SymAction::new(pattern.clone(), cond), ts));
        minterms(&conds, &vars, d, &mut Vec::new(), &mut emit);
    }
    Ok(out)
}

/// Depth-first over sign choices, positive first, pruning unsatisfiable
/// prefixes. A negated condition is left out when the positive part already
/// excludes it.
fn minterms(
    conds: &[(Cond, Targets)],
    vars: &[Name],
    d: &Domain,
    chosen: &mut Vec<bool>,
    emit: &mut dyn FnMut(Cond, Targets),
) {
    let partial =
        Cond::and(chosen.iter().zip(conds).map(|(&on, (c, _))| if on { c.clone() } else { Cond::not(c.clone()) }));
    if !satisfiable(&partial, vars, d) {
        return;
    }
    if chosen.len() == conds.len() {
        if !chosen.contains(&true) {
            return;
        }
        let pos = Cond::and(chosen.iter().zip(conds).filter(|(on, _)| **on).map(|(_, (c, _))| c.clone()));
        let mut parts = vec![pos.clone()];
        let mut targets: Targets = Vec::new();
        for (&on, (c, ts)) in chosen.iter().zip(conds) {
            if on {
                for t in ts {
                    if !targets.contains(t) {
                        targets.push(t.clone());
                    }
                }
            } else if satisfiable(&Cond::and([pos.clone(), c.clone()]), vars, d) {
                parts.push(Cond::not(c.clone()));
            }
        }
        emit(Cond::and(parts), targets);
        return;
    }
    for on in [true, false] {
        chosen.push(on);
        minterms(conds, vars, d, chosen, emit);
        chosen.pop();
    }
}

/// Makes sibling guards of every body pairwise disjoint.
pub fn stage4_minterms(sys: &EqSystem, d: &Domain) -> Result<EqSystem> {
    map_bodies(sys, |eq, bs| {
        let mut out = Vec::new();
        for (guard, ts) in split(bs, &eq.params, d)? {
            for (target, args) in ts {
                out.push(Branch { guard: guard.clone(), target, args });
            }
        }
        Ok(Body::And(out))
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key<A> {
    Tt,
    Ff,
    Set(Vec<(usize, A)>),
}

fn kinds(sys: &EqSystem) -> Vec<Option<bool>> {
    sys.eqs
        .iter()
        .map(|eq| match &eq.body {
            Body::Tt => Some(true),
            Body::And(bs) if bs.is_empty() => Some(true),
            Body::Ff => Some(false),
            Body::And(_) => None,
        })
        .collect()
}

fn key_label<A>(key: &Key<A>, sys: &EqSystem, show: impl Fn(&A) -> String) -> String {
    match key {
        Key::Tt => "tt".into(),
        Key::Ff => "ff".into(),
        Key::Set(ms) => {
            let parts: Vec<String> = ms
                .iter()
                .map(|(v, a)| {
                    let s = show(a);
                    let base = sys.eqs[*v].label.trim_start_matches('X').to_string();
                    if s.is_empty() {
                        base
                    } else {
                        format!("{base}({s})")
                    }
                })
                .collect();
            format!("X{{{}}}", parts.join(","))
        }
    }
}

fn join_terms(ts: &[Term]) -> String {
    ts.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
}

/// Drops branches into trivially true states until nothing changes.
fn prune_tt(eqs: &mut [Equation]) {
    let mut tt: Vec<bool> = eqs.iter().map(|e| matches!(e.body, Body::Tt)).collect();
    loop {
        let mut changed = false;
        for (i, eq) in eqs.iter_mut().enumerate() {
            if let Body::And(bs) = &mut eq.body {
                bs.retain(|b| !tt[b.target]);
                if bs.is_empty() {
                    eq.body = Body::Tt;
                    tt[i] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return;
        }
    }
}

struct Powerset<'a> {
    sys: &'a EqSystem,
    kinds: Vec<Option<bool>>,
    ids: HashMap<Key<Vec<Term>>, usize>,
    keys: Vec<(Key<Vec<Term>>, usize)>,
}

impl Powerset<'_> {
    fn state(&mut self, members: &[(usize, Vec<Term>)]) -> Result<(usize, Vec<Term>)> {
        let (key, args, arity) = if members.iter().any(|(v, _)| self.kinds[*v] == Some(false)) {
            (Key::Ff, Vec::new(), 0)
        } else {
            let mut ms: Vec<(usize, Vec<Term>)> =
                members.iter().filter(|(v, _)| self.kinds[*v].is_none()).cloned().collect();
            if ms.is_empty() {
                (Key::Tt, Vec::new(), 0)
            } else {
                let shape = |args: &Vec<Term>| -> Vec<Term> {
                    args.iter()
                        .map(|t| match t {
                            Term::Var(_) => Term::Var(name("")),
                            v => v.clone(),
                        })
                        .collect()
                };
                ms.sort_by_key(|(v, a)| (*v, shape(a)));
                ms.dedup();
                let mut order: Vec<Name> = Vec::new();
                for (_, a) in &ms {
                    for t in a {
                        if let Term::Var(x) = t {
                            if !order.contains(x) {
                                order.push(x.clone());
                            }
                        }
                    }
                }
                let ren: HashMap<Name, Term> =
                    order.iter().enumerate().map(|(i, x)| (x.clone(), Term::Var(param("q", i)))).collect();
                let mut renamed: Vec<(usize, Vec<Term>)> =
                    ms.iter().map(|(v, a)| (*v, a.iter().map(|t| subst_term(t, &ren)).collect())).collect();
                renamed.sort();
                renamed.dedup();
                let n = order.len();
                (Key::Set(renamed), order.into_iter().map(Term::Var).collect(), n)
            }
        };
        if let Some(&i) = self.ids.get(&key) {
            return Ok((i, args));
        }
        if arity > ARITY_CAP {
            return Err(Error::Explosion(format!("a symbolic state with {arity} parameters")));
        }
        if self.keys.len() >= SYMBOLIC_STATE_CAP {
            return Err(Error::Explosion(format!("more than {SYMBOLIC_STATE_CAP} symbolic states")));
        }
        let i = self.keys.len();
        self.ids.insert(key.clone(), i);
        self.keys.push((key, arity));
        Ok((i, args))
    }

    fn body(&mut self, key: &Key<Vec<Term>>, arity: usize, d: &Domain) -> Result<Body> {
        let ms = match key {
            Key::Tt => return Ok(Body::Tt),
            Key::Ff => return Ok(Body::Ff),
            Key::Set(ms) => ms,
        };
        let mut branches = Vec::new();
        for (v, args) in ms {
            let eq = &self.sys.eqs[*v];
            let map: HashMap<Name, Term> = eq.params.iter().cloned().zip(args.iter().cloned()).collect();
            if let Body::And(bs) = &eq.body {
                branches.extend(bs.iter().map(|b| subst_branch_free(b, &map)));
            }
        }
        let params: Vec<Name> = (0..arity).map(|k| param("q", k)).collect();
        let parts = split(&branches, &params, d).map_err(|e| match e {
            Error::TooManyConditions(n) => Error::Explosion(format!("{n} conditions in a merged body")),
            other => other,
        })?;
        let mut out = Vec::new();
        for (guard, ts) in parts {
            let (target, args) = self.state(&ts)?;
            out.push(Branch { guard, target, args });
        }
        Ok(Body::And(out))
    }
}

/// Conjunctions of targets reached by the same guard become single states.
/// Fails with [`Error::Explosion`] when the construction does not settle
/// within a fixed number of states.
pub fn stage5_powerset(sys: &EqSystem, d: &Domain) -> Result<EqSystem> {
    let mut ps = Powerset { sys, kinds: kinds(sys), ids: HashMap::new(), keys: Vec::new() };
    let (start, _) = ps.state(&[(sys.start, Vec::new())])?;
    let mut eqs = Vec::new();
    let mut i = 0;
    while i < ps.keys.len() {
        let (key, arity) = ps.keys[i].clone();
        let body = ps.body(&key, arity, d)?;
        eqs.push(Equation {
            label: key_label(&key, sys, |a| join_terms(a)),
            params: (0..arity).map(|k| param("q", k)).collect(),
            body,
        });
        i += 1;
    }
    prune_tt(&mut eqs);
    Ok(EqSystem { eqs, start })
}

struct Ground<'a> {
    sys: &'a EqSystem,
    kinds: Vec<Option<bool>>,
    ids: HashMap<Key<Vec<Name>>, usize>,
    keys: Vec<Key<Vec<Name>>>,
}

impl Ground<'_> {
    fn state(&mut self, members: Vec<(usize, Vec<Name>)>) -> Result<usize> {
        let key = if members.iter().any(|(v, _)| self.kinds[*v] == Some(false)) {
            Key::Ff
        } else {
            let mut ms: Vec<_> = members.into_iter().filter(|(v, _)| self.kinds[*v].is_none()).collect();
            ms.sort();
            ms.dedup();
            if ms.is_empty() {
                Key::Tt
            } else {
                Key::Set(ms)
            }
        };
        if let Some(&i) = self.ids.get(&key) {
            return Ok(i);
        }
        if self.keys.len() >= GROUND_STATE_CAP {
            return Err(Error::Explosion(format!("more than {GROUND_STATE_CAP} ground states")));
        }
        self.ids.insert(key.clone(), self.keys.len());
        self.keys.push(key);
        Ok(self.keys.len() - 1)
    }

    fn body(&mut self, ms: &[(usize, Vec<Name>)], d: &Domain) -> Result<Body> {
        let sys = self.sys;
        let mut out = Vec::new();
        for a in d.actions() {
            let mut targets: Vec<(usize, Vec<Name>)> = Vec::new();
            for (v, vals) in ms {
                let eq = &sys.eqs[*v];
                let Body::And(bs) = &eq.body else { continue };
                let sigma0: Subst = eq.params.iter().cloned().zip(vals.iter().cloned()).collect();
                for b in bs {
                    let Some(sig) = b.guard.subst_values(&sigma0).admits(&a) else { continue };
                    let mut full = sigma0.clone();
                    full.extend(sig);
                    let args = b
                        .args
                        .iter()
                        .map(|t| match t {
                            Term::Val(v) => Ok(v.clone()),
                            Term::Var(x) => full.get(x).cloned().ok_or_else(|| Error::UnboundDataVar(x.to_string())),
                        })
                        .collect::<Result<Vec<Name>>>()?;
                    targets.push((b.target, args));
                }
            }
            if !targets.is_empty() {
                let target = self.state(targets)?;
                out.push(Branch { guard: SymAction::literal(&a), target, args: Vec::new() });
            }
        }
        Ok(Body::And(out))
    }
}

/// The powerset construction over ground instances: states are sets of
/// equations applied to values and guards are single actions.
pub fn ground_powerset(sys: &EqSystem, d: &Domain) -> Result<EqSystem> {
    let mut g = Ground { sys, kinds: kinds(sys), ids: HashMap::new(), keys: Vec::new() };
    let start = g.state(vec![(sys.start, Vec::new())])?;
    let mut eqs = Vec::new();
    let mut i = 0;
    while i < g.keys.len() {
        let key = g.keys[i].clone();
        let body = match &key {
            Key::Tt => Body::Tt,
            Key::Ff => Body::Ff,
            Key::Set(ms) => g.body(ms, d)?,
        };
        eqs.push(Equation { label: key_label(&key, sys, |a: &Vec<Name>| a.join(", ")), params: Vec::new(), body });
        i += 1;
    }
    prune_tt(&mut eqs);
    Ok(EqSystem { eqs, start })
}

struct Frame {
    state: usize,
    args: Vec<Term>,
    var: Name,
    used: bool,
}

struct Rebuild<'a> {
    sys: &'a EqSystem,
    stack: Vec<Frame>,
    scope: Vec<Name>,
    fresh: Fresh,
    nodes: usize,
    cap: usize,
}

impl Rebuild<'_> {
    fn go(&mut self, s: usize, args: Vec<Term>) -> Result<Formula> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(Error::Explosion(format!("rebuilt formula exceeds {} nodes", self.cap)));
        }
        let sys = self.sys;
        let eq = &sys.eqs[s];
        let bs = match &eq.body {
            Body::Tt => return Ok(Formula::Tt),
            Body::Ff => return Ok(Formula::Ff),
            Body::And(bs) if bs.is_empty() => return Ok(Formula::Tt),
            Body::And(bs) => bs,
        };
        if let Some(fr) = self.stack.iter_mut().rev().find(|f| f.state == s && f.args == args) {
            fr.used = true;
            return Ok(Formula::Var(fr.var.clone()));
        }
        if self.stack.len() >= DEPTH_CAP {
            return Err(Error::Explosion(format!("recursion deeper than {DEPTH_CAP}")));
        }
        let copies = self.stack.iter().filter(|f| f.state == s).count();
        let var = if copies == 0 { name(&format!("X{s}")) } else { name(&format!("X{s}_{copies}")) };
        let pmap: HashMap<Name, Term> = eq.params.iter().cloned().zip(args.iter().cloned()).collect();
        self.stack.push(Frame { state: s, args, var: var.clone(), used: false });
        let mut conj = Vec::with_capacity(bs.len());
        for b in bs {
            let mut ren = HashMap::new();
            for x in b.guard.pattern.binders() {
                let y = if self.scope.contains(&x) { self.fresh.next_name() } else { x.clone() };
                ren.insert(x, y);
            }
            let b = subst_branch_free(&rename_branch(b, &ren), &pmap);
            let binders = b.guard.pattern.binders();
            let n = binders.len();
            self.scope.extend(binders);
            let child = self.go(b.target, b.args);
            self.scope.truncate(self.scope.len() - n);
            conj.push(Formula::Nec(b.guard, Box::new(child?)));
        }
        let frame = self.stack.pop().expect("frame pushed above");
        let body = if conj.len() == 1 { conj.pop().unwrap() } else { Formula::And(conj) };
        Ok(if frame.used { Formula::Max(var, Box::new(body)) } else { body })
    }
}

/// Folds an equation system back into a formula, introducing a fixpoint
/// only where a state recurs with the same arguments.
pub fn stage6_rebuild(sys: &EqSystem) -> Result<Formula> {
    rebuild_with_cap(sys, SYMBOLIC_NODE_CAP)
}

fn rebuild_with_cap(sys: &EqSystem, cap: usize) -> Result<Formula> {
    let mut r = Rebuild { sys, stack: Vec::new(), scope: Vec::new(), fresh: Fresh::new("r#"), nodes: 0, cap };
    r.go(sys.start, Vec::new())
}

/// Turns `(y)` constrained by `y = t` back into the slot `t`.
fn denormalize(f: &Formula) -> Formula {
    match f {
        Formula::Tt | Formula::Ff | Formula::Var(_) => f.clone(),
        Formula::Or(fs) => Formula::Or(fs.iter().map(denormalize).collect()),
        Formula::And(fs) => Formula::And(fs.iter().map(denormalize).collect()),
        Formula::Min(x, g) => Formula::Min(x.clone(), Box::new(denormalize(g))),
        Formula::Max(x, g) => Formula::Max(x.clone(), Box::new(denormalize(g))),
        Formula::Dia(..) => f.clone(),
        Formula::Nec(sa, body) => {
            let Some((port, dir, payload)) = sa.pattern.slot_parts() else {
                return Formula::Nec(sa.clone(), Box::new(denormalize(body)));
            };
            let mut slots = [port.clone(), payload.clone()];
            let mut conj = sa.cond.conjuncts();
            let mut body = (**body).clone();
            for i in 0..2 {
                let Slot::Bind(b) = slots[i].clone() else { continue };
                let other = match &slots[1 - i] {
                    Slot::Bind(o) => Some(o.clone()),
                    _ => None,
                };
                let usable = |t: &Term| match t {
                    Term::Val(_) => true,
                    Term::Var(x) => *x != b && Some(x) != other.as_ref(),
                };
                let found = conj.iter().position(|c| match c {
                    Cond::Eq(Term::Var(x), t) | Cond::Eq(t, Term::Var(x)) => *x == b && usable(t),
                    _ => false,
                });
                let Some(k) = found else { continue };
                let t = match conj.remove(k) {
                    Cond::Eq(Term::Var(x), t) if x == b && usable(&t) => t,
                    Cond::Eq(t, _) => t,
                    _ => unreachable!(),
                };
                slots[i] = match &t {
                    Term::Val(v) => Slot::Lit(v.clone()),
                    Term::Var(x) => Slot::Var(x.clone()),
                };
                let m: HashMap<Name, Term> = [(b, t)].into_iter().collect();
                conj = conj.iter().map(|c| c.subst(&m)).collect();
                body = body.subst_data(&m);
            }
            let cond = Cond::and(conj).simplify();
            let [port, payload] = slots;
            Formula::Nec(SymAction::new(Pattern::Act { port, dir, payload }, cond), Box::new(denormalize(&body)))
        }
    }
}

/// Readable names: fixpoint variables numbered in order of appearance and
/// generated data binders drawn from `y, z, w, ...`.
fn prettify(f: &Formula, d: &Domain) -> Formula {
    fn lorder(f: &Formula, out: &mut Vec<Name>) {
        match f {
            Formula::Max(x, g) | Formula::Min(x, g) => {
                out.push(x.clone());
                lorder(g, out);
            }
            Formula::Or(fs) | Formula::And(fs) => fs.iter().for_each(|g| lorder(g, out)),
            Formula::Nec(_, g) | Formula::Dia(_, g) => lorder(g, out),
            _ => {}
        }
    }
    let mut order = Vec::new();
    lorder(f, &mut order);
    let lmap: HashMap<Name, Name> =
        order.iter().enumerate().map(|(i, x)| (x.clone(), name(&format!("X{i}")))).collect();
    let f = f.map_lvars(&|x| lmap.get(x).cloned().unwrap_or_else(|| x.clone()));

    let mut avoid: BTreeSet<Name> = f.all_dvars().into_iter().filter(|x| !x.contains('#')).collect();
    avoid.extend(d.values());
    rename_generated(&f, &avoid, &mut Vec::new())
}

fn rename_generated(f: &Formula, avoid: &BTreeSet<Name>, scope: &mut Vec<Name>) -> Formula {
    match f {
        Formula::Tt | Formula::Ff | Formula::Var(_) => f.clone(),
        Formula::Or(fs) => Formula::Or(fs.iter().map(|g| rename_generated(g, avoid, scope)).collect()),
        Formula::And(fs) => Formula::And(fs.iter().map(|g| rename_generated(g, avoid, scope)).collect()),
        Formula::Min(x, g) => Formula::Min(x.clone(), Box::new(rename_generated(g, avoid, scope))),
        Formula::Max(x, g) => Formula::Max(x.clone(), Box::new(rename_generated(g, avoid, scope))),
        Formula::Dia(sa, g) | Formula::Nec(sa, g) => {
            let mut ren: HashMap<Name, Name> = HashMap::new();
            for b in sa.pattern.binders().into_iter().filter(|b| b.contains('#')) {
                let pick = readable_names()
                    .find(|c| !avoid.contains(c) && !scope.contains(c) && !ren.values().any(|v| v == c))
                    .expect("infinite supply");
                ren.insert(b, pick);
            }
            let terms = var_terms(&ren);
            let sa = SymAction::new(sa.pattern.rename_binders(&ren), sa.cond.subst(&terms));
            let body = g.subst_data(&terms);
            let binders = sa.pattern.binders();
            let n = binders.len();
            scope.extend(binders);
            let body = Box::new(rename_generated(&body, avoid, scope));
            scope.truncate(scope.len() - n);
            if matches!(f, Formula::Dia(..)) {
                Formula::Dia(sa, body)
            } else {
                Formula::Nec(sa, body)
            }
        }
    }
}

/// Intermediate results of a normalisation run.
#[derive(Debug, Clone)]
pub struct Trace {
    pub stages: Vec<(String, String)>,
    /// The symbolic merge gave up and ground instances were used.
    pub ground: bool,
    pub result: Formula,
}

pub fn normalize_traced(f: &Formula, d: &Domain) -> Result<Trace> {
    check_input(f)?;
    let mut fresh = Fresh::new("v#");
    let g = normalize_patterns(f, &mut fresh);
    let s1 = stage1_unfold(&g)?;
    let s2 = stage2_equations(&s1)?;
    let s3 = stage3_align(&s2);
    let s4 = stage4_minterms(&s3, d)?;
    let symbolic = stage5_powerset(&s4, d).and_then(|s5| {
        let r = stage6_rebuild(&s5)?;
        Ok((s5, r))
    });
    let (s5, rebuilt, ground) = match symbolic {
        Ok((s5, r)) => (s5, r, false),
        Err(Error::Explosion(_)) => {
            let s5 = ground_powerset(&s4, d)?;
            let r = rebuild_with_cap(&s5, GROUND_NODE_CAP)?;
            (s5, r, true)
        }
        Err(e) => return Err(e),
    };
    let result = prettify(&denormalize(&rebuilt), d);
    if !classify(&result, d).shmlnf {
        return Err(Error::Internal(format!("normalisation produced `{result}`, which is not in normal form")));
    }
    let stages = vec![
        ("patterns".to_string(), g.to_string()),
        ("unfold".to_string(), s1.to_string()),
        ("equations".to_string(), s2.to_string()),
        ("align".to_string(), s3.to_string()),
        ("minterms".to_string(), s4.to_string()),
        (if ground { "powerset (ground)" } else { "powerset" }.to_string(), s5.to_string()),
        ("rebuild".to_string(), rebuilt.to_string()),
    ];
    Ok(Trace { stages, ground, result })
}

/// An equivalent formula in sHML normal form.
pub fn normalize(f: &Formula, d: &Domain) -> Result<Formula> {
    Ok(normalize_traced(f, d)?.result)
}

impl fmt::Display for EqSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for eq in &self.eqs {
            f.write_str(&eq.label)?;
            if !eq.params.is_empty() {
                write!(f, "({})", eq.params.join(", "))?;
            }
            f.write_str(" = ")?;
            match &eq.body {
                Body::Tt => f.write_str("tt")?,
                Body::Ff => f.write_str("ff")?,
                Body::And(bs) if bs.is_empty() => f.write_str("tt")?,
                Body::And(bs) => {
                    for (i, b) in bs.iter().enumerate() {
                        if i > 0 {
                            f.write_str(" && ")?;
                        }
                        write!(f, "[{}]{}", b.guard, self.eqs[b.target].label)?;
                        if !b.args.is_empty() {
                            write!(f, "({})", join_terms(&b.args))?;
                        }
                    }
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
