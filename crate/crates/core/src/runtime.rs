//! Transducer dynamics and the instrumented composite `⟨e, p⟩`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lts::Lts;
use crate::process::{Folding, Proc, Process};
use crate::symbolic::{Domain, ExtAction, OutLabel};
use crate::transducer::{subst_data, unfold, Target, Transducer, Trn};

/// Transitions of `e` on input `g`, as `(output, continuation)` in source
/// order (rules eId, eSel, eRec, eTrn).
pub fn transitions_on(e: &Trn, g: &ExtAction) -> Vec<(OutLabel, Trn)> {
    let mut out = Vec::new();
    trans_into(e, g, &mut out, &mut |_, _| {});
    out
}

fn trans_into(e: &Trn, g: &ExtAction, out: &mut Vec<(OutLabel, Trn)>, on_unfold: &mut dyn FnMut(&Trn, &Trn)) {
    match &**e {
        Transducer::Id => {
            if let ExtAction::Act(a) = g {
                out.push((OutLabel::Act(a.clone()), e.clone()));
            }
        }
        Transducer::Var(_) => {}
        Transducer::Prefix { pat, cond, out: target, cont } => {
            let Some(sigma) = pat.matches(g) else { return };
            if !cond.eval(&sigma).unwrap_or(false) {
                return;
            }
            let u = match target {
                Target::Tau => OutLabel::Tau,
                Target::Pat(q) => match q.instantiate(&sigma) {
                    Some(a) => OutLabel::Act(a),
                    None => return,
                },
            };
            out.push((u, subst_data(cont, &sigma)));
        }
        Transducer::Sum(es) => {
            for f in es {
                trans_into(f, g, out, on_unfold);
            }
        }
        Transducer::Rec(..) => {
            let u = unfold(e);
            on_unfold(&u, e);
            trans_into(&u, g, out, on_unfold);
        }
    }
}

/// Every transition of `e` over the domain's actions followed by `•`.
pub fn tstep(e: &Trn, d: &Domain) -> Vec<(ExtAction, OutLabel, Trn)> {
    let mut out = Vec::new();
    let inputs = d.actions().into_iter().map(ExtAction::Act).chain([ExtAction::Insert]);
    for g in inputs {
        for (u, f) in transitions_on(e, &g) {
            out.push((g.clone(), u, f));
        }
    }
    out
}

#[derive(Default)]
struct TrnFolding {
    back: HashMap<Trn, Trn>,
}

impl TrnFolding {
    fn canon(&self, e: &Trn) -> Trn {
        let mut cur = e.clone();
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

    fn on(&mut self, e: &Trn, g: &ExtAction) -> Vec<(OutLabel, Trn)> {
        let mut out = Vec::new();
        let back = &mut self.back;
        trans_into(e, g, &mut out, &mut |u, r| {
            back.entry(u.clone()).or_insert_with(|| r.clone());
        });
        out.into_iter().map(|(l, f)| (l, self.canon(&f))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    ITrn,
    IAsy,
    IIns,
    ITer,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::ITrn => "iTrn",
            Rule::IAsy => "iAsy",
            Rule::IIns => "iIns",
            Rule::ITer => "iTer",
        })
    }
}

/// A monitored system `⟨e, p⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Config {
    pub enforcer: Trn,
    pub system: Proc,
}

impl Config {
    pub fn new(enforcer: Trn, system: Proc) -> Self {
        Config { enforcer, system }
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{} | {}>", self.enforcer, self.system)
    }
}

/// Stepping with recursion folding in both components, so that a term and
/// its unfolding denote the same configuration.
#[derive(Default)]
pub struct Stepper {
    procs: Folding,
    trns: TrnFolding,
}

impl Stepper {
    pub fn new() -> Self {
        Self::default()
    }

    /// Instrumentation steps in rule order iTrn, iAsy, iIns, iTer; within a
    /// rule, system transitions then enforcer branches in source order.
    pub fn istep(&mut self, cfg: &Config) -> Vec<(Rule, OutLabel, Config)> {
        let sys = self.procs.step(&cfg.system);
        instrument(&mut self.trns, &cfg.enforcer, &cfg.system, &sys)
            .into_iter()
            .map(|(r, l, e, p)| (r, l, Config::new(e, p)))
            .collect()
    }
}

/// The instrumentation rules over an arbitrary representation `S` of system
/// states, given the system's own transitions.
fn instrument<S: Clone>(
    trns: &mut TrnFolding,
    e: &Trn,
    here: &S,
    sys: &[(OutLabel, S)],
) -> Vec<(Rule, OutLabel, Trn, S)> {
    let inserts = trns.on(e, &ExtAction::Insert);
    let mut trn = Vec::new();
    let mut asy = Vec::new();
    let mut ter = Vec::new();
    for (l, p2) in sys {
        match l {
            OutLabel::Tau => asy.push((Rule::IAsy, OutLabel::Tau, e.clone(), p2.clone())),
            OutLabel::Act(a) => {
                let moves = trns.on(e, &ExtAction::Act(a.clone()));
                if moves.is_empty() && inserts.is_empty() {
                    ter.push((Rule::ITer, l.clone(), Transducer::id(), p2.clone()));
                }
                for (u, e2) in moves {
                    trn.push((Rule::ITrn, u, e2, p2.clone()));
                }
            }
        }
    }
    let ins = inserts.into_iter().map(|(u, e2)| (Rule::IIns, u, e2, here.clone()));
    trn.into_iter().chain(asy).chain(ins).chain(ter).collect()
}

/// The composite of `e` with state `s0` of an explicit LTS. Each composite
/// state is reported as `(enforcer, system state)`, so system components can
/// be compared with states of `lts` directly.
pub fn composite_on_lts(e: &Trn, lts: &Lts, s0: usize, bound: usize) -> Result<(Lts, Vec<(Trn, usize)>)> {
    let mut trns = TrnFolding::default();
    let start = (e.clone(), s0);
    let mut index: HashMap<(Trn, usize), usize> = HashMap::from([(start.clone(), 0)]);
    let mut states = vec![start];
    let mut edges: Vec<Vec<(OutLabel, usize)>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let (e, p) = states[s].clone();
        for (_, l, e2, p2) in instrument(&mut trns, &e, &p, lts.transitions(p)) {
            let key = (e2, p2);
            let t = match index.get(&key) {
                Some(&t) => t,
                None => {
                    if states.len() >= bound {
                        return Err(Error::BoundExceeded(bound));
                    }
                    let t = states.len();
                    index.insert(key.clone(), t);
                    states.push(key);
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
    let names = states.iter().map(|(e, p)| format!("<{e} | {}>", lts.name(*p))).collect();
    Ok((Lts::new(names, edges, 0), states))
}

pub fn istep(cfg: &Config) -> Vec<(Rule, OutLabel, Config)> {
    Stepper::new().istep(cfg)
}

/// The reachable composite LTS from `⟨e, p⟩`, state 0 being the start.
pub fn composite_lts(e: &Trn, p: &Proc, bound: usize) -> Result<Lts> {
    Ok(composite_with_configs(e, p, bound)?.0)
}

pub fn composite_with_configs(e: &Trn, p: &Proc, bound: usize) -> Result<(Lts, Vec<Config>)> {
    let mut stepper = Stepper::new();
    let start = Config::new(e.clone(), p.clone());
    let mut index: HashMap<Config, usize> = HashMap::from([(start.clone(), 0)]);
    let mut configs = vec![start];
    let mut edges: Vec<Vec<(OutLabel, usize)>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let cfg = configs[s].clone();
        for (_, l, c2) in stepper.istep(&cfg) {
            let t = match index.get(&c2) {
                Some(&t) => t,
                None => {
                    if configs.len() >= bound {
                        return Err(Error::BoundExceeded(bound));
                    }
                    let t = configs.len();
                    index.insert(c2.clone(), t);
                    configs.push(c2);
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
    let names = configs.iter().map(|c| c.to_string()).collect();
    Ok((Lts::new(names, edges, 0), configs))
}

/// The transducer's own LTS over `γ▸μ` labels, for comparing enforcers.
pub fn transducer_lts(e: &Trn, d: &Domain, bound: usize) -> Result<crate::bisim::Graph<(ExtAction, OutLabel)>> {
    let mut fold = TrnFolding::default();
    let mut index: HashMap<Trn, usize> = HashMap::from([(e.clone(), 0)]);
    let mut terms = vec![e.clone()];
    let mut edges: Vec<Vec<((ExtAction, OutLabel), usize)>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);
    let inputs: Vec<ExtAction> = d.actions().into_iter().map(ExtAction::Act).chain([ExtAction::Insert]).collect();
    while let Some(s) = queue.pop_front() {
        let term = terms[s].clone();
        for g in &inputs {
            for (u, f) in fold.on(&term, g) {
                let t = match index.get(&f) {
                    Some(&t) => t,
                    None => {
                        if terms.len() >= bound {
                            return Err(Error::BoundExceeded(bound));
                        }
                        index.insert(f.clone(), terms.len());
                        terms.push(f);
                        edges.push(Vec::new());
                        queue.push_back(terms.len() - 1);
                        terms.len() - 1
                    }
                };
                let lbl = (g.clone(), u);
                if !edges[s].contains(&(lbl.clone(), t)) {
                    edges[s].push((lbl, t));
                }
            }
        }
    }
    Ok(crate::bisim::Graph { names: terms.iter().map(|t| t.to_string()).collect(), edges })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Policy {
    /// Rule order then source order, preferring a step that reaches a
    /// configuration not yet visited in this run.
    First,
    Random(u64),
    /// Candidate index to take at each step; the run stops when the script
    /// runs out or names a missing candidate.
    Script(Vec<usize>),
}

impl Policy {
    pub fn parse(s: &str) -> Option<Policy> {
        if s == "first" {
            return Some(Policy::First);
        }
        if let Some(seed) = s.strip_prefix("random:") {
            return seed.parse().ok().map(Policy::Random);
        }
        if let Some(list) = s.strip_prefix("script:") {
            let idx: std::result::Result<Vec<usize>, _> =
                list.split(',').filter(|x| !x.is_empty()).map(str::parse).collect();
            return idx.ok().map(Policy::Script);
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimStep {
    pub rule: Rule,
    pub label: OutLabel,
    pub config: Config,
}

impl fmt::Display for SimStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}  {}", self.rule, self.label, self.config)
    }
}

/// One resolved run of at most `steps` steps; stops early on deadlock.
pub fn simulate(e: &Trn, p: &Proc, steps: usize, policy: &Policy) -> Vec<SimStep> {
    let mut stepper = Stepper::new();
    let mut cfg = Config::new(e.clone(), p.clone());
    let mut visited: HashSet<Config> = HashSet::from([cfg.clone()]);
    let mut rng = match policy {
        Policy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    let mut run = Vec::new();
    for k in 0..steps {
        let cands = stepper.istep(&cfg);
        if cands.is_empty() {
            break;
        }
        let pick = match policy {
            Policy::First => cands.iter().position(|(_, _, c)| !visited.contains(c)).unwrap_or(0),
            Policy::Random(_) => rng.as_mut().map(|r| r.gen_range(0..cands.len())).unwrap_or(0),
            Policy::Script(script) => match script.get(k) {
                Some(&i) if i < cands.len() => i,
                _ => break,
            },
        };
        let (rule, label, next) = cands.into_iter().nth(pick).unwrap();
        visited.insert(next.clone());
        run.push(SimStep { rule, label, config: next.clone() });
        cfg = next;
    }
    run
}

pub fn nil_config() -> Config {
    Config::new(Transducer::id(), Process::nil())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::parse_process;
    use crate::symbolic::Action;
    use crate::transducer::parse_transducer;

    const PB: &str = "rec X.(i?req.X + i?req.i!ans.X + i?cls.nil)";
    const ESS: &str = "rec x.{(x)?req when x!=j}.rec y.({x!ans}.x + {x?req -> tau}.y)";
    const ES: &str = "rec x.({(x)?req when x!=j -> tau}.x + {(x)!ans when x!=j}.x)";
    const EI: &str = "{* -> i?req}.{* -> i!ans}.id";
    const ER: &str = "rec x.({(x)?req -> j?req}.x + {(x)!ans -> j!ans}.x + {(x)?cls -> j?cls}.x)";

    fn dom() -> Domain {
        Domain::new(["i", "j"], ["req", "ans", "cls"]).unwrap()
    }

    fn run(e: &str, steps: usize) -> Vec<(String, String)> {
        let e = parse_transducer(e, None).unwrap();
        let p = parse_process(PB, None).unwrap();
        simulate(&e, &p, steps, &Policy::First).into_iter().map(|s| (s.rule.to_string(), s.label.to_string())).collect()
    }

    fn pairs(v: &[(&str, &str)]) -> Vec<(String, String)> {
        v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn identity_mirrors() {
        let d = dom();
        let t = tstep(&Transducer::id(), &d);
        assert_eq!(t.len(), d.actions().len());
        assert!(
            t.iter()
                .all(|(g, u, e)| matches!(g, ExtAction::Act(a) if *u == OutLabel::Act(a.clone()))
                    && **e == Transducer::Id)
        );
    }

    #[test]
    fn suppression_step_substitutes() {
        let e = parse_transducer(ESS, None).unwrap();
        let Transducer::Rec(_, body) = &*e else { unreachable!() };
        let Transducer::Prefix { cont, .. } = &**body else { unreachable!() };
        let inner = cont.clone();
        let got = transitions_on(&inner, &ExtAction::Act(Action::input("i", "req")));
        assert!(got.is_empty());
        let mut s = crate::symbolic::Subst::new();
        s.insert(crate::symbolic::name("x"), crate::symbolic::name("i"));
        let closed = subst_data(&inner, &s);
        let got = transitions_on(&closed, &ExtAction::Act(Action::input("i", "req")));
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].0, OutLabel::Tau);
    }

    #[test]
    fn insertion_prefix() {
        let e = parse_transducer(EI, None).unwrap();
        let t = tstep(&e, &dom());
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].0, ExtAction::Insert);
        assert_eq!(t[0].1.to_string(), "i?req");
        assert_eq!(t[0].2.to_string(), "{* -> i!ans}.id");
    }

    #[test]
    fn example_runs() {
        assert_eq!(run(ESS, 3), pairs(&[("iTrn", "i?req"), ("iTrn", "tau"), ("iTrn", "i!ans")]));
        assert_eq!(run(EI, 2), pairs(&[("iIns", "i?req"), ("iIns", "i!ans")]));
        assert_eq!(run(ER, 3), pairs(&[("iTrn", "j?req"), ("iTrn", "j!ans"), ("iTrn", "j?cls")]));
        assert_eq!(run(ES, 3), pairs(&[("iTrn", "tau"), ("iTrn", "i!ans"), ("iTer", "i?cls")]));
        let e = parse_transducer("id", None).unwrap();
        assert!(simulate(&e, &Process::nil(), 5, &Policy::First).is_empty());
    }

    #[test]
    fn es_terminates_into_identity() {
        let e = parse_transducer(ES, None).unwrap();
        let p = parse_process(PB, None).unwrap();
        let steps = istep(&Config::new(e, p));
        let ter: Vec<_> = steps.iter().filter(|(r, _, _)| *r == Rule::ITer).collect();
        assert_eq!(ter.len(), 1);
        assert_eq!(ter[0].1.to_string(), "i?cls");
        assert_eq!(ter[0].2, nil_config());
        assert!(istep(&nil_config()).is_empty());
    }

    #[test]
    fn composite_sizes() {
        let ess = parse_transducer(ESS, None).unwrap();
        let pb = parse_process(PB, None).unwrap();
        let lts = composite_lts(&ess, &pb, 100).unwrap();
        assert!(lts.len() <= 10);
        let id = Transducer::id();
        let pg = parse_process("rec X.(i?req.i!ans.X + i?cls.nil)", None).unwrap();
        assert_eq!(composite_lts(&id, &pg, 100).unwrap().len(), 3);
    }

    #[test]
    fn composite_on_lts_matches_terms() {
        let pb = parse_process(PB, None).unwrap();
        let lts = crate::process::reachable(&pb, 100).unwrap();
        for e in [ESS, ES, EI, ER] {
            let e = parse_transducer(e, None).unwrap();
            let (on_lts, states) = composite_on_lts(&e, &lts, 0, 100).unwrap();
            assert_eq!(states.len(), on_lts.len());
            let by_terms = composite_lts(&e, &pb, 100).unwrap();
            assert!(crate::bisim::bisim(&on_lts, 0, &by_terms, 0).bisimilar, "{e}");
        }
    }

    #[test]
    fn insertion_loop_hits_bound() {
        let e = parse_transducer("rec x.{* -> i?req}.{* -> i!ans}.x", None).unwrap();
        // finite thanks to folding
        assert!(composite_lts(&e, &Process::nil(), 10).is_ok());
    }

    #[test]
    fn policies_parse() {
        assert_eq!(Policy::parse("first"), Some(Policy::First));
        assert_eq!(Policy::parse("random:7"), Some(Policy::Random(7)));
        assert_eq!(Policy::parse("script:0,1"), Some(Policy::Script(vec![0, 1])));
        assert_eq!(Policy::parse("bogus"), None);
    }
}
