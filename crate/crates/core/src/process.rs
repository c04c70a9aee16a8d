//! Regular CCS: `nil`, prefixing, choice and guarded recursion.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lts::Lts;
use crate::symbolic::{name, Domain, Name, OutLabel};
use crate::syntax::{Parser, Tok};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Process {
    Nil,
    Prefix(OutLabel, Arc<Process>),
    Choice(Vec<Arc<Process>>),
    Rec(Name, Arc<Process>),
    Var(Name),
}

pub type Proc = Arc<Process>;

impl Process {
    pub fn nil() -> Proc {
        Arc::new(Process::Nil)
    }

    pub fn prefix(l: OutLabel, p: Proc) -> Proc {
        Arc::new(Process::Prefix(l, p))
    }

    /// n-ary choice; nested choices are flattened, and a single branch is
    /// returned as is.
    pub fn choice(ps: Vec<Proc>) -> Proc {
        let mut flat = Vec::new();
        for p in ps {
            match &*p {
                Process::Choice(inner) => flat.extend(inner.iter().cloned()),
                _ => flat.push(p),
            }
        }
        match flat.len() {
            0 => Process::nil(),
            1 => flat.pop().unwrap(),
            _ => Arc::new(Process::Choice(flat)),
        }
    }

    pub fn rec(x: &str, body: Proc) -> Proc {
        Arc::new(Process::Rec(name(x), body))
    }

    pub fn var(x: &str) -> Proc {
        Arc::new(Process::Var(name(x)))
    }
}

fn subst(p: &Proc, x: &Name, r: &Proc) -> Proc {
    match &**p {
        Process::Nil => p.clone(),
        Process::Var(y) => {
            if y == x {
                r.clone()
            } else {
                p.clone()
            }
        }
        Process::Prefix(l, q) => Process::prefix(l.clone(), subst(q, x, r)),
        Process::Choice(qs) => Arc::new(Process::Choice(qs.iter().map(|q| subst(q, x, r)).collect())),
        Process::Rec(y, body) => {
            if y == x {
                p.clone()
            } else {
                Arc::new(Process::Rec(y.clone(), subst(body, x, r)))
            }
        }
    }
}

/// One unfolding of `rec X.P`; other terms are returned unchanged.
pub fn unfold(p: &Proc) -> Proc {
    match &**p {
        Process::Rec(x, body) => subst(body, x, p),
        _ => p.clone(),
    }
}

/// Strong transitions of a closed, guarded term, in source order.
pub fn step(p: &Proc) -> Vec<(OutLabel, Proc)> {
    let mut out = Vec::new();
    step_into(p, &mut out, &mut |_, _| {});
    out
}

fn step_into(p: &Proc, out: &mut Vec<(OutLabel, Proc)>, on_unfold: &mut dyn FnMut(&Proc, &Proc)) {
    match &**p {
        Process::Nil | Process::Var(_) => {}
        Process::Prefix(l, q) => out.push((l.clone(), q.clone())),
        Process::Choice(qs) => {
            for q in qs {
                step_into(q, out, on_unfold);
            }
        }
        Process::Rec(..) => {
            let u = unfold(p);
            on_unfold(&u, p);
            step_into(&u, out, on_unfold);
        }
    }
}

/// Maps unfolded recursion terms back to their `rec` form so that a term and
/// its unfolding become one state.
#[derive(Default)]
pub(crate) struct Folding {
    back: HashMap<Proc, Proc>,
}

impl Folding {
    pub fn canon(&self, p: &Proc) -> Proc {
        let mut cur = p.clone();
        let mut hops = 0;
        while let Some(r) = self.back.get(&cur) {
            if *r == cur || hops > 64 {
                break;
            }
            cur = r.clone();
            hops += 1;
        }
        cur
    }

    /// Transitions of `p` with folded targets.
    pub fn step(&mut self, p: &Proc) -> Vec<(OutLabel, Proc)> {
        let mut out = Vec::new();
        let back = &mut self.back;
        step_into(p, &mut out, &mut |u, r| {
            back.entry(u.clone()).or_insert_with(|| r.clone());
        });
        out.into_iter().map(|(l, q)| (l, self.canon(&q))).collect()
    }
}

/// The finite LTS of states reachable from `p`, in BFS order with `p` as
/// state 0. Fails when more than `bound` states are found.
pub fn reachable(p: &Proc, bound: usize) -> Result<Lts> {
    let (lts, _) = reachable_terms(p, bound)?;
    Ok(lts)
}

/// [`reachable`] together with the term of every state.
pub fn reachable_terms(p: &Proc, bound: usize) -> Result<(Lts, Vec<Proc>)> {
    let mut fold = Folding::default();
    let mut index: HashMap<Proc, usize> = HashMap::new();
    let mut terms = vec![p.clone()];
    index.insert(p.clone(), 0);
    let mut edges: Vec<Vec<(OutLabel, usize)>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let term = terms[s].clone();
        for (l, q) in fold.step(&term) {
            let t = match index.get(&q) {
                Some(&t) => t,
                None => {
                    if terms.len() >= bound {
                        return Err(Error::BoundExceeded(bound));
                    }
                    let t = terms.len();
                    index.insert(q.clone(), t);
                    terms.push(q);
                    edges.push(Vec::new());
                    queue.push_back(t);
                    t
                }
            };
            if !edges[s].contains(&(l.clone(), t)) {
                edges[s].push((l, t));
            }
        }
    }
    let names = terms.iter().map(|t| t.to_string()).collect();
    Ok((Lts::new(names, edges, 0), terms))
}

/// Parses a closed, guarded process term.
pub fn parse_process(text: &str, domain: Option<&Domain>) -> Result<Proc> {
    parse_process_at(text, 1, domain)
}

pub(crate) fn parse_process_at(text: &str, line0: usize, domain: Option<&Domain>) -> Result<Proc> {
    let mut parser = Parser::new(text, line0, domain)?;
    let mut vars = Vec::new();
    let p = sum(&mut parser, &mut vars)?;
    parser.finish()?;
    check_guarded(&p, &mut Vec::new())?;
    Ok(p)
}

fn sum(p: &mut Parser, vars: &mut Vec<Name>) -> Result<Proc> {
    let mut parts = vec![prefix(p, vars)?];
    while p.eat(&Tok::Plus) {
        parts.push(prefix(p, vars)?);
    }
    Ok(Process::choice(parts))
}

fn prefix(p: &mut Parser, vars: &mut Vec<Name>) -> Result<Proc> {
    if p.eat_keyword("nil") {
        return Ok(Process::nil());
    }
    if p.eat_keyword("rec") {
        let x = name(&p.ident("a recursion variable")?);
        p.expect(&Tok::Dot)?;
        vars.push(x.clone());
        let body = sum(p, vars);
        vars.pop();
        return Ok(Arc::new(Process::Rec(x, body?)));
    }
    if p.eat(&Tok::LParen) {
        let inner = sum(p, vars)?;
        p.expect(&Tok::RParen)?;
        return Ok(inner);
    }
    let is_action =
        p.is_keyword("tau") || (matches!(p.peek(), Tok::Ident(_)) && matches!(p.peek_at(1), Tok::Question | Tok::Bang));
    if is_action {
        let l = p.out_label()?;
        p.expect(&Tok::Dot)?;
        let cont = prefix(p, vars)?;
        return Ok(Process::prefix(l, cont));
    }
    let x = p.ident("a process")?;
    if !vars.iter().any(|v| v.as_ref() == x) {
        return Err(p.error(format!("unbound process variable `{x}`")));
    }
    Ok(Process::var(&x))
}

fn check_guarded(p: &Proc, unguarded: &mut Vec<Name>) -> Result<()> {
    match &**p {
        Process::Nil => Ok(()),
        Process::Var(x) => {
            if unguarded.contains(x) {
                Err(Error::Unguarded(x.to_string()))
            } else {
                Ok(())
            }
        }
        Process::Prefix(_, q) => check_guarded(q, &mut Vec::new()),
        Process::Choice(qs) => qs.iter().try_for_each(|q| check_guarded(q, unguarded)),
        Process::Rec(x, body) => {
            unguarded.push(x.clone());
            let r = check_guarded(body, unguarded);
            unguarded.pop();
            r
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Nil => f.write_str("nil"),
            Process::Var(x) => f.write_str(x),
            Process::Prefix(l, q) => match &**q {
                Process::Choice(_) | Process::Rec(..) => write!(f, "{l}.({q})"),
                _ => write!(f, "{l}.{q}"),
            },
            Process::Choice(qs) => {
                for (i, q) in qs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    match &**q {
                        Process::Choice(_) | Process::Rec(..) => write!(f, "({q})")?,
                        _ => write!(f, "{q}")?,
                    }
                }
                Ok(())
            }
            Process::Rec(x, body) => match &**body {
                Process::Choice(_) => write!(f, "rec {x}.({body})"),
                _ => write!(f, "rec {x}.{body}"),
            },
        }
    }
}
