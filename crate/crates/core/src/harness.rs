//! Bounded checks of the enforcement criteria, the violation semantics and
//! the random corpus they run over.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bisim::bisim;
use crate::error::{Error, Result};
use crate::logic::{holds_at, is_guarded, is_shml, Formula};
use crate::lts::Lts;
use crate::normalize::normalize;
use crate::process::{reachable, Proc, Process};
use crate::runtime::composite_on_lts;
use crate::symbolic::{name, Action, Cond, Dir, Domain, Name, OutLabel, Pattern, Slot, SymAction, Term};
use crate::synth::compile;
use crate::transducer::Trn;

/// Composite state spaces larger than this give an inconclusive verdict.
pub const COMPOSITE_BOUND: usize = 4096;
/// Longest trace tried when looking for a soundness witness.
pub const WITNESS_DEPTH: usize = 8;
/// Reachable states allowed for a generated process.
pub const PROCESS_STATES: usize = 16;
/// Largest generator budget used for corpus formulas; sizes stay at most
/// twice the budget.
pub const FORMULA_BUDGET: usize = 4;
pub const PROCESS_BUDGET: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Criterion {
    Soundness,
    Transparency,
    Nvtt,
    ViolationSemantics,
    NormalizationEquivalence,
    OracleAgreement,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Soundness => "soundness",
            Criterion::Transparency => "transparency",
            Criterion::Nvtt => "nvtt",
            Criterion::ViolationSemantics => "violation-sem",
            Criterion::NormalizationEquivalence => "normalization-equivalence",
            Criterion::OracleAgreement => "oracle-agreement",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub criterion: Criterion,
    pub subject: String,
    pub outcome: Outcome,
    pub witness: Option<String>,
    /// Trace depth the check was bounded by, if any.
    pub bound: Option<usize>,
}

impl Verdict {
    fn new(criterion: Criterion, subject: &str, outcome: Outcome) -> Self {
        Verdict { criterion, subject: subject.to_string(), outcome, witness: None, bound: None }
    }

    fn pass(criterion: Criterion, subject: &str) -> Self {
        Self::new(criterion, subject, Outcome::Pass)
    }

    fn fail(criterion: Criterion, subject: &str, witness: String) -> Self {
        Verdict { witness: Some(witness), ..Self::new(criterion, subject, Outcome::Fail) }
    }

    fn inconclusive(criterion: Criterion, subject: &str, why: String) -> Self {
        Verdict { witness: Some(why), ..Self::new(criterion, subject, Outcome::Inconclusive) }
    }

    fn vacuous(criterion: Criterion, subject: &str, why: &str) -> Self {
        Verdict { witness: Some(format!("vacuous: {why}")), ..Self::pass(criterion, subject) }
    }

    fn bounded(mut self, k: usize) -> Self {
        self.bound = Some(k);
        self
    }

    /// Errors that come from a bound become inconclusive verdicts, anything
    /// else is a failure.
    fn from_error(criterion: Criterion, subject: &str, e: Error) -> Self {
        match e {
            Error::BoundExceeded(_) | Error::Explosion(_) => Self::inconclusive(criterion, subject, e.to_string()),
            other => Self::fail(criterion, subject, format!("error: {other}")),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.criterion, self.subject, self.outcome)?;
        if let Some(k) = self.bound {
            write!(f, " depth={k}")?;
        }
        if let Some(w) = &self.witness {
            write!(f, " {w}")?;
        }
        Ok(())
    }
}

pub fn trace_str(t: &[Action]) -> String {
    if t.is_empty() {
        return "eps".into();
    }
    t.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(".")
}

fn nil_lts() -> Lts {
    Lts::new(vec!["nil".into()], vec![Vec::new()], 0)
}

/// Satisfiability through the normal form: unsatisfiable exactly when the
/// body under the leading fixpoints is `ff`. The answer is checked against
/// `nil`, which satisfies every satisfiable safety formula.
pub fn is_sat(f: &Formula, d: &Domain) -> Result<bool> {
    let nf = normalize(f, d)?;
    let mut body = &nf;
    while let Formula::Max(_, g) = body {
        body = g;
    }
    let by_nf = *body != Formula::Ff;
    let by_nil = holds_at(f, &nil_lts(), 0)?;
    if by_nf != by_nil {
        return Err(Error::Internal(format!("satisfiability of `{f}`: normal form says {by_nf}, nil says {by_nil}")));
    }
    Ok(by_nf)
}

fn check_safety(f: &Formula) -> Result<()> {
    if let Some(x) = f.free_lvars().into_iter().next() {
        return Err(Error::UnboundLogicVar(x.to_string()));
    }
    if !is_shml(f) {
        return Err(Error::Fragment(format!("`{f}` is not an sHML formula")));
    }
    if !is_guarded(f) {
        return Err(Error::Unguarded(f.to_string()));
    }
    Ok(())
}

/// The forcing relation for a fixed trace, memoised on (state, position,
/// formula).
struct Forcing<'a> {
    lts: &'a Lts,
    trace: &'a [Action],
    memo: HashMap<(usize, usize, Formula), bool>,
}

impl Forcing<'_> {
    fn go(&mut self, s: usize, i: usize, f: &Formula) -> bool {
        let key = (s, i, f.clone());
        if let Some(&b) = self.memo.get(&key) {
            return b;
        }
        let r = match f {
            Formula::Ff => i == self.trace.len(),
            Formula::And(fs) => fs.iter().any(|g| self.go(s, i, g)),
            Formula::Nec(sa, g) => match self.trace.get(i) {
                None => false,
                Some(a) => match sa.admits(a) {
                    None => false,
                    Some(sigma) => {
                        let next = g.subst_values(&sigma);
                        self.lts.weak_step(s, a).into_iter().any(|q| self.go(q, i + 1, &next))
                    }
                },
            },
            Formula::Max(..) => self.go(s, i, &f.unfold()),
            _ => false,
        };
        self.memo.insert(key, r);
        r
    }
}

/// Whether state `s` violates `f` along exactly the trace `t`.
pub fn violates(lts: &Lts, s: usize, t: &[Action], f: &Formula) -> Result<bool> {
    check_safety(f)?;
    Ok(Forcing { lts, trace: t, memo: HashMap::new() }.go(s, 0, f))
}

/// The residual normal-form formula once `u` has been observed.
pub fn after(f: &Formula, u: &OutLabel) -> Result<Formula> {
    let OutLabel::Act(a) = u else { return Ok(f.clone()) };
    match f {
        Formula::Tt | Formula::Ff => Ok(f.clone()),
        Formula::Max(..) => after(&f.unfold(), u),
        Formula::Nec(..) => after(&Formula::And(vec![f.clone()]), u),
        Formula::And(fs) => {
            for g in fs {
                let Formula::Nec(sa, body) = g else {
                    return Err(Error::Fragment(format!("conjunct `{g}` is not a necessity")));
                };
                if let Some(sigma) = sa.admits(a) {
                    return Ok(body.subst_values(&sigma));
                }
            }
            Ok(Formula::Tt)
        }
        Formula::Var(x) => Err(Error::UnboundLogicVar(x.to_string())),
        other => Err(Error::Fragment(format!("`{other}` is not in sHML normal form"))),
    }
}

/// The shortest (then least) trace of `lts` up to `depth` along which the
/// start state violates `f`.
pub fn shortest_violation(lts: &Lts, f: &Formula, depth: usize) -> Result<Option<Vec<Action>>> {
    let mut traces: Vec<Vec<Action>> = lts.traces(lts.init(), depth).into_iter().collect();
    traces.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    for t in traces {
        if violates(lts, lts.init(), &t, f)? {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Soundness of `e` for `f` on one system: if `f` is satisfiable then the
/// monitored system satisfies it.
pub fn check_soundness_with(f: &Formula, e: &Trn, subject: &str, p: &Lts, d: &Domain) -> Verdict {
    let c = Criterion::Soundness;
    let run = || -> Result<Verdict> {
        if !is_sat(f, d)? {
            return Ok(Verdict::vacuous(c, subject, "formula unsatisfiable"));
        }
        let (comp, _) = composite_on_lts(e, p, p.init(), COMPOSITE_BOUND)?;
        if holds_at(f, &comp, 0)? {
            return Ok(Verdict::pass(c, subject));
        }
        let w = match shortest_violation(&comp, f, WITNESS_DEPTH)? {
            Some(t) => trace_str(&t),
            None => format!("no violating trace within depth {WITNESS_DEPTH}"),
        };
        Ok(Verdict::fail(c, subject, w))
    };
    run().unwrap_or_else(|e| Verdict::from_error(c, subject, e))
}

/// Transparency of `e` for `f` on one system: a satisfying system is left
/// strongly bisimilar to itself.
pub fn check_transparency_with(f: &Formula, e: &Trn, subject: &str, p: &Lts) -> Verdict {
    let c = Criterion::Transparency;
    let run = || -> Result<Verdict> {
        if !holds_at(f, p, p.init())? {
            return Ok(Verdict::vacuous(c, subject, "system violates the formula"));
        }
        let (comp, _) = composite_on_lts(e, p, p.init(), COMPOSITE_BOUND)?;
        let r = bisim(&comp, 0, p, p.init());
        if r.bisimilar {
            return Ok(Verdict::pass(c, subject));
        }
        Ok(Verdict::fail(c, subject, r.witness.unwrap_or_default().join(".")))
    };
    run().unwrap_or_else(|e| Verdict::from_error(c, subject, e))
}

/// Non-violating trace transparency up to depth `k`: along every trace of
/// length at most `k` that `p` does not violate, the monitored system
/// reaches exactly the system states that `p` reaches.
pub fn check_nvtt_with(f: &Formula, e: &Trn, subject: &str, p: &Lts, k: usize) -> Verdict {
    let c = Criterion::Nvtt;
    let run = || -> Result<Verdict> {
        let (comp, states) = composite_on_lts(e, p, p.init(), COMPOSITE_BOUND)?;
        let mut traces = p.traces(p.init(), k);
        traces.extend(comp.traces(0, k));
        let mut ordered: Vec<Vec<Action>> = traces.into_iter().collect();
        ordered.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        for t in ordered {
            if violates(p, p.init(), &t, f)? {
                continue;
            }
            let plain: BTreeSet<usize> = p.weak_trace(p.init(), &t).ones().collect();
            let monitored: BTreeSet<usize> = comp.weak_trace(0, &t).ones().map(|s| states[s].1).collect();
            if let Some(q) = plain.difference(&monitored).next() {
                return Ok(Verdict::fail(
                    c,
                    subject,
                    format!("forward {}: system reaches `{}` unmonitored only", trace_str(&t), p.name(*q)),
                )
                .bounded(k));
            }
            if let Some(q) = monitored.difference(&plain).next() {
                return Ok(Verdict::fail(
                    c,
                    subject,
                    format!("backward {}: system reaches `{}` monitored only", trace_str(&t), p.name(*q)),
                )
                .bounded(k));
            }
        }
        Ok(Verdict::pass(c, subject).bounded(k))
    };
    run().unwrap_or_else(|e| Verdict::from_error(c, subject, e))
}

/// Both conditions of a violating-trace semantics, searched up to depth `k`.
/// The second is inconclusive when a violation exists but no violating trace
/// of length at most `k` was found.
pub fn check_violation_semantics(f: &Formula, subject: &str, p: &Lts, k: usize) -> Verdict {
    let c = Criterion::ViolationSemantics;
    let run = || -> Result<Verdict> {
        let holds = holds_at(f, p, p.init())?;
        let mut found = None;
        let mut ordered: Vec<Vec<Action>> = p.traces(p.init(), k).into_iter().collect();
        ordered.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        for t in ordered {
            if !violates(p, p.init(), &t, f)? {
                continue;
            }
            if holds {
                return Ok(
                    Verdict::fail(c, subject, format!("{} violates a satisfied formula", trace_str(&t))).bounded(k)
                );
            }
            if p.weak_trace(p.init(), &t).is_clear() {
                return Ok(
                    Verdict::fail(c, subject, format!("{} is not a trace of the system", trace_str(&t))).bounded(k)
                );
            }
            found.get_or_insert(t);
        }
        Ok(match (holds, found) {
            (true, _) => Verdict::pass(c, subject).bounded(k),
            (false, Some(t)) => Verdict { witness: Some(trace_str(&t)), ..Verdict::pass(c, subject).bounded(k) },
            (false, None) => {
                Verdict::inconclusive(c, subject, format!("no violating trace within depth {k}")).bounded(k)
            }
        })
    };
    run().unwrap_or_else(|e| Verdict::from_error(c, subject, e))
}

pub fn check_soundness(f: &Formula, subject: &str, p: &Lts, d: &Domain) -> Verdict {
    match compile(f, d) {
        Ok(e) => check_soundness_with(f, &e, subject, p, d),
        Err(e) => Verdict::from_error(Criterion::Soundness, subject, e),
    }
}

pub fn check_transparency(f: &Formula, subject: &str, p: &Lts, d: &Domain) -> Verdict {
    match compile(f, d) {
        Ok(e) => check_transparency_with(f, &e, subject, p),
        Err(e) => Verdict::from_error(Criterion::Transparency, subject, e),
    }
}

pub fn check_nvtt(f: &Formula, subject: &str, p: &Lts, k: usize, d: &Domain) -> Verdict {
    match compile(f, d) {
        Ok(e) => check_nvtt_with(f, &e, subject, p, k),
        Err(e) => Verdict::from_error(Criterion::Nvtt, subject, e),
    }
}

const BINDERS: [&str; 6] = ["x", "y", "z", "w", "u", "v"];
const LVARS: [&str; 4] = ["X", "Y", "Z", "W"];

struct FormulaGen {
    ports: Vec<Name>,
    payloads: Vec<Name>,
    rng: ChaCha8Rng,
    lvars: usize,
    dvars: usize,
}

impl FormulaGen {
    fn pick(&mut self, from: &[Name]) -> Name {
        from.choose(&mut self.rng).expect("non-empty domain").clone()
    }

    fn fresh_lvar(&mut self) -> Name {
        let k = self.lvars;
        self.lvars += 1;
        match LVARS.get(k) {
            Some(x) => name(x),
            None => name(&format!("X{k}")),
        }
    }

    fn fresh_dvar(&mut self) -> Name {
        let k = self.dvars;
        self.dvars += 1;
        match BINDERS.get(k) {
            Some(x) => name(x),
            None => name(&format!("x{k}")),
        }
    }

    fn dir(&mut self) -> Dir {
        if self.rng.gen_bool(0.5) {
            Dir::Input
        } else {
            Dir::Output
        }
    }

    /// A symbolic action plus the binders it introduces.
    fn sym_action(&mut self, data: &[Name]) -> (SymAction, Vec<Name>) {
        let dir = self.dir();
        let ports = self.ports.clone();
        let payloads = self.payloads.clone();
        match self.rng.gen_range(0..10) {
            0..=3 => {
                let a = Action::new(&self.pick(&ports), dir, &self.pick(&payloads));
                (SymAction::literal(&a), Vec::new())
            }
            4..=6 => {
                let x = self.fresh_dvar();
                let payload = Slot::Lit(self.pick(&payloads));
                let port_val = self.pick(&ports);
                let cond = match self.rng.gen_range(0..3) {
                    0 => Cond::True,
                    1 => Cond::Neq(Term::Var(x.clone()), Term::Val(port_val)),
                    _ => Cond::Eq(Term::Var(x.clone()), Term::Val(port_val)),
                };
                (SymAction::new(Pattern::new(Slot::Bind(x.clone()), dir, payload), cond), vec![x])
            }
            7 if !data.is_empty() => {
                let x = data.choose(&mut self.rng).unwrap().clone();
                let payload = Slot::Lit(self.pick(&payloads));
                (SymAction::new(Pattern::new(Slot::Var(x), dir, payload), Cond::True), Vec::new())
            }
            _ => {
                let y = self.fresh_dvar();
                let port = Slot::Lit(self.pick(&ports));
                let cond = if self.rng.gen_bool(0.5) {
                    Cond::Neq(Term::Var(y.clone()), Term::Val(self.pick(&payloads)))
                } else {
                    Cond::True
                };
                (SymAction::new(Pattern::new(port, dir, Slot::Bind(y.clone())), cond), vec![y])
            }
        }
    }

    fn leaf(&mut self, data: &[Name], ready: &[Name], pending: &[Name]) -> Formula {
        let guarded: Vec<Name> = ready.iter().chain(pending).cloned().collect();
        let mut choice = self.rng.gen_range(0..6);
        if choice == 4 && ready.is_empty() || choice == 5 && guarded.is_empty() {
            choice = self.rng.gen_range(0..4);
        }
        match choice {
            0 => Formula::Tt,
            1 => Formula::Ff,
            4 => Formula::Var(ready.choose(&mut self.rng).unwrap().clone()),
            5 => {
                let (sa, _) = self.sym_action(data);
                Formula::nec(sa, Formula::Var(guarded.choose(&mut self.rng).unwrap().clone()))
            }
            k => {
                let (sa, _) = self.sym_action(data);
                Formula::nec(sa, if k == 2 { Formula::Tt } else { Formula::Ff })
            }
        }
    }

    /// `ready` variables may occur anywhere, `pending` ones only below a
    /// necessity.
    fn formula(&mut self, budget: usize, data: &mut Vec<Name>, ready: &[Name], pending: &[Name]) -> Formula {
        if budget <= 1 {
            return self.leaf(data, ready, pending);
        }
        let choice = self.rng.gen_range(0..10);
        match choice {
            0..=3 => {
                let (sa, binders) = self.sym_action(data);
                let n = binders.len();
                data.extend(binders);
                let inner: Vec<Name> = ready.iter().chain(pending).cloned().collect();
                let body = self.formula(budget - 1, data, &inner, &[]);
                data.truncate(data.len() - n);
                Formula::nec(sa, body)
            }
            4..=6 if budget >= 3 => {
                let a = self.rng.gen_range(1..budget - 1);
                let l = self.formula(a, data, ready, pending);
                let r = self.formula(budget - 1 - a, data, ready, pending);
                Formula::And(vec![l, r])
            }
            _ => {
                let x = self.fresh_lvar();
                let mut pend = pending.to_vec();
                pend.push(x.clone());
                let body = self.formula(budget - 1, data, ready, &pend);
                Formula::Max(x, Box::new(body))
            }
        }
    }
}

/// A closed, guarded sHML formula drawn deterministically from `seed`.
/// Budget 1 gives one of `tt`, `ff`, `[sa]tt` or `[sa]ff`; in general the
/// size is at most twice the budget.
pub fn gen_formula(d: &Domain, size: usize, seed: u64) -> Formula {
    let mut g = FormulaGen {
        ports: d.ports().cloned().collect(),
        payloads: d.payloads().cloned().collect(),
        rng: ChaCha8Rng::seed_from_u64(seed),
        lvars: 0,
        dvars: 0,
    };
    g.formula(size.max(1), &mut Vec::new(), &[], &[])
}

struct ProcessGen {
    palette: Vec<Action>,
    rng: ChaCha8Rng,
    vars: usize,
}

impl ProcessGen {
    fn label(&mut self) -> OutLabel {
        if self.rng.gen_range(0..8) == 0 {
            OutLabel::Tau
        } else {
            OutLabel::Act(self.palette.choose(&mut self.rng).unwrap().clone())
        }
    }

    fn leaf(&mut self, guarded: &[Name]) -> Proc {
        match self.rng.gen_range(0..4) {
            0 => Process::nil(),
            1 if !guarded.is_empty() => Process::var(guarded.choose(&mut self.rng).unwrap()),
            _ => {
                let l = self.label();
                let tail = match guarded.choose(&mut self.rng) {
                    Some(x) if self.rng.gen_bool(0.5) => Process::var(x),
                    _ => Process::nil(),
                };
                Process::prefix(l, tail)
            }
        }
    }

    /// `guarded` variables may occur anywhere, `open` ones only after a
    /// prefix.
    fn process(&mut self, budget: usize, guarded: &[Name], open: &[Name]) -> Proc {
        if budget <= 1 {
            return self.leaf(guarded);
        }
        match self.rng.gen_range(0..10) {
            0..=4 => {
                let l = self.label();
                let inner: Vec<Name> = guarded.iter().chain(open).cloned().collect();
                Process::prefix(l, self.process(budget - 1, &inner, &[]))
            }
            5..=7 if budget >= 3 => {
                let a = self.rng.gen_range(1..budget - 1);
                let l = self.process(a, guarded, open);
                let r = self.process(budget - 1 - a, guarded, open);
                Process::choice(vec![l, r])
            }
            _ => {
                let x = format!("P{}", self.vars);
                self.vars += 1;
                let mut o = open.to_vec();
                o.push(name(&x));
                Process::rec(&x, self.process(budget - 1, guarded, &o))
            }
        }
    }
}

/// A closed regular process with at most [`PROCESS_STATES`] reachable
/// states, drawn deterministically from `seed`. Budget 1 gives `nil`, a
/// single action or a single `tau`.
pub fn gen_process(d: &Domain, size: usize, seed: u64) -> Proc {
    let actions = d.actions();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..64 {
        let n = rng.gen_range(2..=4).min(actions.len());
        let palette: Vec<Action> = actions.choose_multiple(&mut rng, n).cloned().collect();
        let mut g = ProcessGen { palette, rng: ChaCha8Rng::seed_from_u64(rng.gen()), vars: 0 };
        let p = g.process(size.max(1), &[], &[]);
        if reachable(&p, PROCESS_STATES).is_ok() {
            return p;
        }
    }
    Process::nil()
}

/// One (formula, process) pair of the random corpus.
#[derive(Debug, Clone)]
pub struct Case {
    pub id: usize,
    pub formula: Formula,
    pub process: Proc,
    pub lts: Lts,
}

impl Case {
    pub fn subject(&self) -> String {
        format!("#{}", self.id)
    }
}

/// `n` pairs drawn from `seed`, formulas of size at most `2 * FORMULA_BUDGET`
/// and processes of at most [`PROCESS_STATES`] states.
pub fn corpus(d: &Domain, n: usize, seed: u64) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|id| {
            let fb = rng.gen_range(1..=FORMULA_BUDGET);
            let pb = rng.gen_range(1..=PROCESS_BUDGET);
            let formula = gen_formula(d, fb, rng.gen());
            let process = gen_process(d, pb, rng.gen());
            let lts = reachable(&process, PROCESS_STATES).expect("generator respects the state cap");
            Case { id, formula, process, lts }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Property {
    Soundness,
    Transparency,
    Nvtt,
    ViolationSemantics,
}

impl Property {
    pub const ALL: [Property; 4] =
        [Property::Soundness, Property::Transparency, Property::Nvtt, Property::ViolationSemantics];

    /// One property name, `all`, or a comma-separated list of names.
    pub fn parse(s: &str) -> Option<Vec<Property>> {
        if s.contains(',') {
            let mut out = Vec::new();
            for part in s.split(',') {
                for p in Property::parse(part.trim())? {
                    if !out.contains(&p) {
                        out.push(p);
                    }
                }
            }
            return Some(out);
        }
        Some(match s {
            "soundness" => vec![Property::Soundness],
            "transparency" => vec![Property::Transparency],
            "nvtt" => vec![Property::Nvtt],
            "violation-sem" => vec![Property::ViolationSemantics],
            "all" => Property::ALL.to_vec(),
            _ => return None,
        })
    }
}

/// Runs the given properties over every case in parallel; the result is in
/// case order, then property order.
pub fn run_suite(cases: &[Case], props: &[Property], k: usize, d: &Domain) -> Vec<Verdict> {
    let pairs: Vec<(String, &Formula, &Lts)> = cases.iter().map(|c| (c.subject(), &c.formula, &c.lts)).collect();
    run_pairs(&pairs, props, k, d)
}

/// [`run_suite`] over named (formula, system) pairs.
pub fn run_pairs(pairs: &[(String, &Formula, &Lts)], props: &[Property], k: usize, d: &Domain) -> Vec<Verdict> {
    pairs
        .par_iter()
        .map(|(subject, f, p)| {
            let compiled = compile(f, d);
            props
                .iter()
                .map(|prop| {
                    let crit = match prop {
                        Property::Soundness => Criterion::Soundness,
                        Property::Transparency => Criterion::Transparency,
                        Property::Nvtt => Criterion::Nvtt,
                        Property::ViolationSemantics => {
                            return check_violation_semantics(f, subject, p, k);
                        }
                    };
                    let e = match &compiled {
                        Ok(e) => e,
                        Err(err) => return Verdict::from_error(crit, subject, err.clone()),
                    };
                    match prop {
                        Property::Soundness => check_soundness_with(f, e, subject, p, d),
                        Property::Transparency => check_transparency_with(f, e, subject, p),
                        _ => check_nvtt_with(f, e, subject, p, k),
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}
