//! Actions, patterns, filtering conditions and symbolic actions.
//!
//! Values are untyped names drawn from a finite [`Domain`]. Ports and
//! payloads share one namespace for equality tests, so every question about
//! a condition can be settled by enumerating the domain.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Interned-ish name used for ports, payloads and variables.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Name::from(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    Input,
    Output,
}

impl Dir {
    pub fn symbol(self) -> char {
        match self {
            Dir::Input => '?',
            Dir::Output => '!',
        }
    }
}

/// The finite universe of ports and payloads actions range over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    ports: BTreeSet<Name>,
    payloads: BTreeSet<Name>,
}

impl Domain {
    pub fn new<P, Q>(ports: P, payloads: Q) -> Result<Self>
    where
        P: IntoIterator,
        P::Item: AsRef<str>,
        Q: IntoIterator,
        Q::Item: AsRef<str>,
    {
        let mut port_set = BTreeSet::new();
        for p in ports {
            if !port_set.insert(name(p.as_ref())) {
                return Err(Error::Domain(format!("port `{}` declared twice", p.as_ref())));
            }
        }
        let mut payload_set = BTreeSet::new();
        for p in payloads {
            if !payload_set.insert(name(p.as_ref())) {
                return Err(Error::Domain(format!("payload `{}` declared twice", p.as_ref())));
            }
        }
        if port_set.is_empty() || payload_set.is_empty() {
            return Err(Error::Domain("ports and payloads must both be non-empty".into()));
        }
        if let Some(clash) = port_set.intersection(&payload_set).next() {
            return Err(Error::Domain(format!("`{clash}` is both a port and a payload")));
        }
        Ok(Domain { ports: port_set, payloads: payload_set })
    }

    pub fn ports(&self) -> impl Iterator<Item = &Name> {
        self.ports.iter()
    }

    pub fn payloads(&self) -> impl Iterator<Item = &Name> {
        self.payloads.iter()
    }

    /// Ports followed by payloads.
    pub fn values(&self) -> Vec<Name> {
        self.ports.iter().chain(self.payloads.iter()).cloned().collect()
    }

    pub fn is_value(&self, n: &str) -> bool {
        self.ports.contains(n) || self.payloads.contains(n)
    }

    /// Every concrete action, in a fixed order (port, direction, payload).
    pub fn actions(&self) -> Vec<Action> {
        let mut out = Vec::with_capacity(self.ports.len() * 2 * self.payloads.len());
        for port in &self.ports {
            for dir in [Dir::Input, Dir::Output] {
                for payload in &self.payloads {
                    out.push(Action { port: port.clone(), dir, payload: payload.clone() });
                }
            }
        }
        out
    }

    pub fn contains(&self, a: &Action) -> bool {
        self.ports.contains(&a.port) && self.payloads.contains(&a.payload)
    }
}

/// An observable action such as `i?req` or `i!ans`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    pub port: Name,
    pub dir: Dir,
    pub payload: Name,
}

impl Action {
    pub fn new(port: &str, dir: Dir, payload: &str) -> Self {
        Action { port: name(port), dir, payload: name(payload) }
    }

    pub fn input(port: &str, payload: &str) -> Self {
        Action::new(port, Dir::Input, payload)
    }

    pub fn output(port: &str, payload: &str) -> Self {
        Action::new(port, Dir::Output, payload)
    }
}

/// An action, or the insertion marker `•` (printed `*`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtAction {
    Act(Action),
    Insert,
}

/// What an enforcer emits: an action, or the silent label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutLabel {
    Act(Action),
    Tau,
}

impl OutLabel {
    pub fn action(&self) -> Option<&Action> {
        match self {
            OutLabel::Act(a) => Some(a),
            OutLabel::Tau => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Lit(Name),
    Var(Name),
    Bind(Name),
}

impl Slot {
    fn binder(&self) -> Option<&Name> {
        match self {
            Slot::Bind(x) => Some(x),
            _ => None,
        }
    }

    fn free(&self) -> Option<&Name> {
        match self {
            Slot::Var(x) => Some(x),
            _ => None,
        }
    }

    fn absorb(&self, value: &Name, sigma: &mut Subst) -> bool {
        match self {
            Slot::Lit(v) => v == value,
            Slot::Bind(x) => {
                sigma.insert(x.clone(), value.clone());
                true
            }
            Slot::Var(_) => false,
        }
    }

    fn subst_free(&self, map: &HashMap<Name, Term>) -> Slot {
        match self {
            Slot::Var(x) => match map.get(x) {
                Some(Term::Var(y)) => Slot::Var(y.clone()),
                Some(Term::Val(v)) => Slot::Lit(v.clone()),
                None => self.clone(),
            },
            _ => self.clone(),
        }
    }

    fn rename_binder(&self, map: &HashMap<Name, Name>) -> Slot {
        match self {
            Slot::Bind(x) => Slot::Bind(map.get(x).cloned().unwrap_or_else(|| x.clone())),
            _ => self.clone(),
        }
    }

    fn instantiate(&self, sigma: &Subst) -> Option<Name> {
        match self {
            Slot::Lit(v) => Some(v.clone()),
            Slot::Var(x) | Slot::Bind(x) => sigma.get(x).cloned(),
        }
    }
}

/// A pattern over actions, or the insertion pattern `•`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    Act { port: Slot, dir: Dir, payload: Slot },
    Insert,
}

impl Pattern {
    pub fn new(port: Slot, dir: Dir, payload: Slot) -> Self {
        Pattern::Act { port, dir, payload }
    }

    pub fn literal(a: &Action) -> Self {
        Pattern::Act { port: Slot::Lit(a.port.clone()), dir: a.dir, payload: Slot::Lit(a.payload.clone()) }
    }

    pub fn dir(&self) -> Option<Dir> {
        match self {
            Pattern::Act { dir, .. } => Some(*dir),
            Pattern::Insert => None,
        }
    }

    fn slots(&self) -> Vec<&Slot> {
        match self {
            Pattern::Act { port, payload, .. } => vec![port, payload],
            Pattern::Insert => vec![],
        }
    }

    /// bv(p), in slot order.
    pub fn binders(&self) -> Vec<Name> {
        self.slots().into_iter().filter_map(|s| s.binder().cloned()).collect()
    }

    pub fn free_vars(&self) -> Vec<Name> {
        self.slots().into_iter().filter_map(|s| s.free().cloned()).collect()
    }

    /// Matching against an extended action. Only closed patterns can match;
    /// a free variable in a slot never matches.
    pub fn matches(&self, g: &ExtAction) -> Option<Subst> {
        match (self, g) {
            (Pattern::Insert, ExtAction::Insert) => Some(Subst::new()),
            (Pattern::Act { port, dir, payload }, ExtAction::Act(a)) => {
                if *dir != a.dir {
                    return None;
                }
                let mut sigma = Subst::new();
                if port.absorb(&a.port, &mut sigma) && payload.absorb(&a.payload, &mut sigma) {
                    Some(sigma)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn matches_action(&self, a: &Action) -> Option<Subst> {
        match self {
            Pattern::Act { port, dir, payload } => {
                if *dir != a.dir {
                    return None;
                }
                let mut sigma = Subst::new();
                if port.absorb(&a.port, &mut sigma) && payload.absorb(&a.payload, &mut sigma) {
                    Some(sigma)
                } else {
                    None
                }
            }
            Pattern::Insert => None,
        }
    }

    /// Binders become free occurrences of the same name.
    pub fn underline(&self) -> Result<Pattern> {
        match self {
            Pattern::Insert => Err(Error::UnderlineInsertion),
            Pattern::Act { port, dir, payload } => {
                let flip = |s: &Slot| match s {
                    Slot::Bind(x) => Slot::Var(x.clone()),
                    other => other.clone(),
                };
                Ok(Pattern::Act { port: flip(port), dir: *dir, payload: flip(payload) })
            }
        }
    }

    /// Instantiates every variable slot with `sigma`; `None` if some variable
    /// is unbound or the pattern is `•`.
    pub fn instantiate(&self, sigma: &Subst) -> Option<Action> {
        match self {
            Pattern::Act { port, dir, payload } => {
                Some(Action { port: port.instantiate(sigma)?, dir: *dir, payload: payload.instantiate(sigma)? })
            }
            Pattern::Insert => None,
        }
    }

    /// Replaces free variable slots; binders are left alone.
    pub fn subst_free(&self, map: &HashMap<Name, Term>) -> Pattern {
        match self {
            Pattern::Act { port, dir, payload } => {
                Pattern::Act { port: port.subst_free(map), dir: *dir, payload: payload.subst_free(map) }
            }
            Pattern::Insert => Pattern::Insert,
        }
    }

    pub fn rename_binders(&self, map: &HashMap<Name, Name>) -> Pattern {
        match self {
            Pattern::Act { port, dir, payload } => {
                Pattern::Act { port: port.rename_binder(map), dir: *dir, payload: payload.rename_binder(map) }
            }
            Pattern::Insert => Pattern::Insert,
        }
    }

    /// All slots are binders.
    pub fn is_normalised(&self) -> bool {
        self.slots().iter().all(|s| matches!(s, Slot::Bind(_)))
    }

    pub(crate) fn slot_parts(&self) -> Option<(&Slot, Dir, &Slot)> {
        match self {
            Pattern::Act { port, dir, payload } => Some((port, *dir, payload)),
            Pattern::Insert => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Name),
    Val(Name),
}

impl Term {
    fn resolve(&self, sigma: &Subst) -> Result<Name> {
        match self {
            Term::Val(v) => Ok(v.clone()),
            Term::Var(x) => sigma.get(x).cloned().ok_or_else(|| Error::UnboundDataVar(x.to_string())),
        }
    }

    fn subst(&self, map: &HashMap<Name, Term>) -> Term {
        match self {
            Term::Var(x) => map.get(x).cloned().unwrap_or_else(|| self.clone()),
            Term::Val(_) => self.clone(),
        }
    }
}

/// Filtering conditions: equality tests closed under the boolean connectives.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cond {
    True,
    False,
    Eq(Term, Term),
    Neq(Term, Term),
    And(Vec<Cond>),
    Or(Vec<Cond>),
    Not(Box<Cond>),
}

/// A finite map from data variables to values.
pub type Subst = BTreeMap<Name, Name>;

impl Cond {
    /// Flattening conjunction; `true` is dropped and `false` absorbs.
    pub fn and(parts: impl IntoIterator<Item = Cond>) -> Cond {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Cond::True => {}
                Cond::False => return Cond::False,
                Cond::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Cond::True,
            1 => out.pop().unwrap(),
            _ => Cond::And(out),
        }
    }

    pub fn not(c: Cond) -> Cond {
        match c {
            Cond::True => Cond::False,
            Cond::False => Cond::True,
            Cond::Not(inner) => *inner,
            other => Cond::Not(Box::new(other)),
        }
    }

    pub fn eval(&self, sigma: &Subst) -> Result<bool> {
        Ok(match self {
            Cond::True => true,
            Cond::False => false,
            Cond::Eq(a, b) => a.resolve(sigma)? == b.resolve(sigma)?,
            Cond::Neq(a, b) => a.resolve(sigma)? != b.resolve(sigma)?,
            Cond::And(cs) => {
                for c in cs {
                    if !c.eval(sigma)? {
                        return Ok(false);
                    }
                }
                true
            }
            Cond::Or(cs) => {
                for c in cs {
                    if c.eval(sigma)? {
                        return Ok(true);
                    }
                }
                false
            }
            Cond::Not(c) => !c.eval(sigma)?,
        })
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Name>) {
        let mut push = |t: &Term| {
            if let Term::Var(x) = t {
                if !out.contains(x) {
                    out.push(x.clone());
                }
            }
        };
        match self {
            Cond::True | Cond::False => {}
            Cond::Eq(a, b) | Cond::Neq(a, b) => {
                push(a);
                push(b);
            }
            Cond::And(cs) | Cond::Or(cs) => cs.iter().for_each(|c| c.collect_vars(out)),
            Cond::Not(c) => c.collect_vars(out),
        }
    }

    pub fn subst(&self, map: &HashMap<Name, Term>) -> Cond {
        match self {
            Cond::True | Cond::False => self.clone(),
            Cond::Eq(a, b) => Cond::Eq(a.subst(map), b.subst(map)),
            Cond::Neq(a, b) => Cond::Neq(a.subst(map), b.subst(map)),
            Cond::And(cs) => Cond::And(cs.iter().map(|c| c.subst(map)).collect()),
            Cond::Or(cs) => Cond::Or(cs.iter().map(|c| c.subst(map)).collect()),
            Cond::Not(c) => Cond::Not(Box::new(c.subst(map))),
        }
    }

    pub fn subst_values(&self, sigma: &Subst) -> Cond {
        let map: HashMap<Name, Term> = sigma.iter().map(|(k, v)| (k.clone(), Term::Val(v.clone()))).collect();
        self.subst(&map)
    }

    /// Constant folding of value-to-value comparisons and of the connectives.
    pub fn simplify(&self) -> Cond {
        match self {
            Cond::Eq(Term::Val(a), Term::Val(b)) => bool_cond(a == b),
            Cond::Neq(Term::Val(a), Term::Val(b)) => bool_cond(a != b),
            Cond::Eq(Term::Var(a), Term::Var(b)) if a == b => Cond::True,
            Cond::Neq(Term::Var(a), Term::Var(b)) if a == b => Cond::False,
            Cond::And(cs) => Cond::and(cs.iter().map(Cond::simplify)),
            Cond::Or(cs) => {
                let mut out = Vec::new();
                for c in cs.iter().map(Cond::simplify) {
                    match c {
                        Cond::True => return Cond::True,
                        Cond::False => {}
                        Cond::Or(inner) => out.extend(inner),
                        other => out.push(other),
                    }
                }
                match out.len() {
                    0 => Cond::False,
                    1 => out.pop().unwrap(),
                    _ => Cond::Or(out),
                }
            }
            Cond::Not(c) => Cond::not(c.simplify()),
            other => other.clone(),
        }
    }

    /// Top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<Cond> {
        match self {
            Cond::True => vec![],
            Cond::And(cs) => cs.iter().flat_map(Cond::conjuncts).collect(),
            other => vec![other.clone()],
        }
    }
}

fn bool_cond(b: bool) -> Cond {
    if b {
        Cond::True
    } else {
        Cond::False
    }
}

/// A pattern together with its filtering condition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymAction {
    pub pattern: Pattern,
    pub cond: Cond,
}

impl SymAction {
    pub fn new(pattern: Pattern, cond: Cond) -> Self {
        SymAction { pattern, cond }
    }

    pub fn literal(a: &Action) -> Self {
        SymAction { pattern: Pattern::literal(a), cond: Cond::True }
    }

    /// Variables that are free in the symbolic action: free pattern slots plus
    /// condition variables not bound by the pattern.
    pub fn free_vars(&self) -> Vec<Name> {
        let bound = self.pattern.binders();
        let mut out = self.pattern.free_vars();
        for v in self.cond.free_vars() {
            if !bound.contains(&v) && !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Match and condition check in one go.
    pub fn admits(&self, a: &Action) -> Option<Subst> {
        let sigma = self.pattern.matches_action(a)?;
        match self.cond.eval(&sigma) {
            Ok(true) => Some(sigma),
            _ => None,
        }
    }

    /// Replaces free occurrences; binders of the pattern shadow the map.
    pub fn subst_free(&self, map: &HashMap<Name, Term>) -> SymAction {
        let bound = self.pattern.binders();
        let inner: HashMap<Name, Term> =
            map.iter().filter(|(k, _)| !bound.contains(k)).map(|(k, v)| (k.clone(), v.clone())).collect();
        SymAction { pattern: self.pattern.subst_free(&inner), cond: self.cond.subst(&inner) }
    }

    pub fn subst_values(&self, sigma: &Subst) -> SymAction {
        let map: HashMap<Name, Term> = sigma.iter().map(|(k, v)| (k.clone(), Term::Val(v.clone()))).collect();
        self.subst_free(&map)
    }
}

/// `⟦⟨p,c⟩⟧` restricted to the domain. Open symbolic actions denote nothing.
pub fn denote(sa: &SymAction, d: &Domain) -> BTreeSet<Action> {
    d.actions().into_iter().filter(|a| sa.admits(a).is_some()).collect()
}

/// Whether some assignment of `vars` (plus any other free variable of `c`)
/// into the domain's values makes `c` true.
pub fn satisfiable(c: &Cond, vars: &[Name], d: &Domain) -> bool {
    let mut all: Vec<Name> = vars.to_vec();
    for v in c.free_vars() {
        if !all.contains(&v) {
            all.push(v);
        }
    }
    let values = d.values();
    any_assignment(&all, &values, &mut Subst::new(), &mut |sigma| c.eval(sigma).unwrap_or(false))
}

pub(crate) fn any_assignment(
    vars: &[Name],
    values: &[Name],
    sigma: &mut Subst,
    pred: &mut dyn FnMut(&Subst) -> bool,
) -> bool {
    match vars.split_first() {
        None => pred(sigma),
        Some((v, rest)) => {
            for val in values {
                sigma.insert(v.clone(), val.clone());
                if any_assignment(rest, values, sigma, pred) {
                    sigma.remove(v);
                    return true;
                }
            }
            sigma.remove(v);
            false
        }
    }
}

/// Whether two symbolic actions can never admit the same action. Free
/// variables are universally quantified over the domain.
pub fn disjoint(a: &SymAction, b: &SymAction, d: &Domain) -> bool {
    let mut free = a.free_vars();
    for v in b.free_vars() {
        if !free.contains(&v) {
            free.push(v);
        }
    }
    let values = d.values();
    let actions = d.actions();
    !any_assignment(&free, &values, &mut Subst::new(), &mut |sigma| {
        let ca = a.subst_values(sigma);
        let cb = b.subst_values(sigma);
        actions.iter().any(|act| ca.admits(act).is_some() && cb.admits(act).is_some())
    })
}

/// Source of fresh variable names.
#[derive(Debug, Clone)]
pub struct Fresh {
    prefix: String,
    next: usize,
}

impl Fresh {
    /// Names produced by a generator whose prefix contains `#` cannot clash
    /// with parsed identifiers.
    pub fn new(prefix: &str) -> Self {
        Fresh { prefix: prefix.to_string(), next: 0 }
    }

    pub fn next_name(&mut self) -> Name {
        let n = name(&format!("{}{}", self.prefix, self.next));
        self.next += 1;
        n
    }
}

/// Replaces every literal or free slot with a fresh binder plus an equality
/// constraint, using the given name source.
pub fn normalize_pattern_with(sa: &SymAction, fresh: &mut dyn FnMut() -> Name) -> SymAction {
    let Some((port, dir, payload)) = sa.pattern.slot_parts() else {
        return sa.clone();
    };
    let mut extra = Vec::new();
    let mut fix = |slot: &Slot| -> Slot {
        let term = match slot {
            Slot::Bind(_) => return slot.clone(),
            Slot::Lit(v) => Term::Val(v.clone()),
            Slot::Var(x) => Term::Var(x.clone()),
        };
        let y = fresh();
        extra.push(Cond::Eq(Term::Var(y.clone()), term));
        Slot::Bind(y)
    };
    let port = fix(port);
    let payload = fix(payload);
    if extra.is_empty() {
        return sa.clone();
    }
    let mut parts = vec![sa.cond.clone()];
    parts.extend(extra);
    SymAction { pattern: Pattern::Act { port, dir, payload }, cond: Cond::and(parts) }
}

/// [`normalize_pattern_with`] drawing readable names (`y`, `z`, ...) that do
/// not occur in `sa`.
pub fn normalize_pattern(sa: &SymAction) -> SymAction {
    let mut used: BTreeSet<Name> = sa.pattern.binders().into_iter().collect();
    used.extend(sa.pattern.free_vars());
    used.extend(sa.cond.free_vars());
    if let Some((p, _, q)) = sa.pattern.slot_parts() {
        for s in [p, q] {
            if let Slot::Lit(v) = s {
                used.insert(v.clone());
            }
        }
    }
    let mut candidates = readable_names();
    let mut fresh = move || loop {
        let c = candidates.next().unwrap();
        if !used.contains(&c) {
            used.insert(c.clone());
            return c;
        }
    };
    normalize_pattern_with(sa, &mut fresh)
}

/// `y, z, w, u, v, y1, z1, ...`
pub(crate) fn readable_names() -> impl Iterator<Item = Name> {
    const BASE: [&str; 5] = ["y", "z", "w", "u", "v"];
    (0..).flat_map(|round: usize| {
        BASE.iter().map(move |b| if round == 0 { name(b) } else { name(&format!("{b}{round}")) })
    })
}

pub fn underline(p: &Pattern) -> Result<Pattern> {
    p.underline()
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.port, self.dir.symbol(), self.payload)
    }
}

impl fmt::Display for ExtAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtAction::Act(a) => a.fmt(f),
            ExtAction::Insert => f.write_str("*"),
        }
    }
}

impl fmt::Display for OutLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutLabel::Act(a) => a.fmt(f),
            OutLabel::Tau => f.write_str("tau"),
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Lit(v) | Slot::Var(v) => f.write_str(v),
            Slot::Bind(x) => write!(f, "({x})"),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Act { port, dir, payload } => write!(f, "{port}{}{payload}", dir.symbol()),
            Pattern::Insert => f.write_str("*"),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) | Term::Val(x) => f.write_str(x),
        }
    }
}

impl Cond {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        // 0: or, 1: and, 2: unary/atom
        match self {
            Cond::True => f.write_str("true"),
            Cond::False => f.write_str("false"),
            Cond::Eq(a, b) => {
                if prec > 1 {
                    write!(f, "({a} = {b})")
                } else {
                    write!(f, "{a} = {b}")
                }
            }
            Cond::Neq(a, b) => {
                if prec > 1 {
                    write!(f, "({a} != {b})")
                } else {
                    write!(f, "{a} != {b}")
                }
            }
            Cond::And(cs) => {
                if prec > 1 {
                    f.write_str("(")?;
                }
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" && ")?;
                    }
                    c.fmt_prec(f, 1)?;
                }
                if prec > 1 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Cond::Or(cs) => {
                if prec > 0 {
                    f.write_str("(")?;
                }
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" || ")?;
                    }
                    c.fmt_prec(f, 1)?;
                }
                if prec > 0 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Cond::Not(c) => {
                f.write_str("!")?;
                c.fmt_prec(f, 2)
            }
        }
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl fmt::Display for SymAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.cond {
            Cond::True => write!(f, "{}", self.pattern),
            _ => write!(f, "{} when {}", self.pattern, self.cond),
        }
    }
}
