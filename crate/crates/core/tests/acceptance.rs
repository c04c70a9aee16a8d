//! End-to-end acceptance checks. Each criterion prints one line:
//! `criterion N PASS|FAIL <what> (<measured>; tolerance <pinned>)`.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shml_core::bisim::{bisim, bisim_graphs, Graph};
use shml_core::harness::{
    check_nvtt_with, check_soundness_with, check_transparency_with, corpus, gen_formula, run_suite, trace_str,
    violates, Case, Outcome, Property, Verdict, FORMULA_BUDGET, PROCESS_STATES,
};
use shml_core::logic::{guards_disjoint, holds_at, mc_eval, nf_structure, parse_formula, sat_oracle, Formula};
use shml_core::lts::Lts;
use shml_core::normalize::normalize;
use shml_core::process::{parse_process, reachable, Proc};
use shml_core::runtime::{composite_on_lts, istep, simulate, transducer_lts, Config, Policy, Rule};
use shml_core::symbolic::{Action, Domain, OutLabel};
use shml_core::synth::{compile, optimize, synthesize};
use shml_core::transducer::{alpha_eq, parse_transducer, Trn};

use common::{dom, forcing_oracle, naive_bisim};

const PG: &str = "rec X.(i?req.i!ans.X + i?cls.nil)";
const PB: &str = "rec X.(i?req.X + i?req.i!ans.X + i?cls.nil)";
const PHI0: &str = "max X.[i?req]([i!ans]X && [i?req]ff)";
const PHI1: &str = "max X.[(x)?req when x != j]([x!ans]X && [x?req]ff)";
const EI: &str = "{* -> i?req}.{* -> i!ans}.id";
const ER: &str = "rec x.({(x)?req -> j?req}.x + {(x)!ans -> j!ans}.x + {(x)?cls -> j?cls}.x)";
const ES: &str = "rec x.({(x)?req when x != j -> tau}.x + {(x)!ans when x != j}.x)";
const ESS: &str = "rec x.{(x)?req when x != j}.rec y.({x!ans}.x + {x?req -> tau}.y)";
/// `ess` after `i?req`: the inner loop with `x` fixed to `i`.
const ESS_I: &str =
    "rec y.({i!ans}.(rec x.{(x)?req when x != j}.rec y.({x!ans}.x + {x?req -> tau}.y)) + {i?req -> tau}.y)";

const CORPUS_SEED: u64 = 42;
const CORPUS_SIZE: usize = 200;
const DEPTH: usize = 6;

fn f(s: &str) -> Formula {
    parse_formula(s, None).unwrap()
}

fn p(s: &str) -> Proc {
    parse_process(s, None).unwrap()
}

fn e(s: &str) -> Trn {
    parse_transducer(s, None).unwrap()
}

fn lts(s: &str) -> Lts {
    reachable(&p(s), 64).unwrap()
}

struct Line {
    n: usize,
    pass: bool,
    what: &'static str,
    detail: String,
    tolerance: &'static str,
    elapsed: Duration,
    budget: Duration,
}

impl Line {
    fn print(&self) {
        let ok = self.pass && self.elapsed < self.budget;
        println!(
            "criterion {:>2} {} {} ({}; {:.2?} of {:?}; tolerance {})",
            self.n,
            if ok { "PASS" } else { "FAIL" },
            self.what,
            self.detail,
            self.elapsed,
            self.budget,
            self.tolerance,
        );
    }
}

fn timed<T>(run: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = run();
    (out, t.elapsed())
}

fn the_corpus() -> Vec<Case> {
    corpus(&dom(), CORPUS_SIZE, CORPUS_SEED)
}

fn labelled(g: Graph<(shml_core::symbolic::ExtAction, OutLabel)>) -> Graph<String> {
    let edges =
        g.edges.into_iter().map(|row| row.into_iter().map(|((a, u), t)| (format!("{a}>{u}"), t)).collect()).collect();
    Graph { names: g.names, edges }
}

fn criterion_1() -> Line {
    let (res, elapsed) = timed(|| {
        let (pg, pb) = (lts(PG), lts(PB));
        [
            holds_at(&f(PHI1), &pg, 0).unwrap(),
            !holds_at(&f(PHI1), &pb, 0).unwrap(),
            holds_at(&f(PHI0), &pg, 0).unwrap(),
            !holds_at(&f(PHI0), &pb, 0).unwrap(),
        ]
    });
    Line {
        n: 1,
        pass: res.iter().all(|&b| b),
        what: "phi1 and phi0 hold on pg and fail on pb",
        detail: format!("{res:?}"),
        tolerance: "exact boolean",
        elapsed,
        budget: Duration::from_secs(1),
    }
}

/// A run step as expected: rule, label, enforcer term and system term.
type Expected<'a> = (Rule, &'a str, &'a str, &'a str);

fn run_matches(enforcer: &str, steps: &[Expected]) -> Result<(), String> {
    let run = simulate(&e(enforcer), &p(PB), steps.len(), &Policy::First);
    if run.len() != steps.len() {
        return Err(format!("{enforcer}: {} steps instead of {}", run.len(), steps.len()));
    }
    for (got, (rule, label, en, sys)) in run.iter().zip(steps) {
        let ok = got.rule == *rule
            && got.label.to_string() == *label
            && alpha_eq(&got.config.enforcer, &e(en))
            && got.config.system == p(sys);
        if !ok {
            return Err(format!("{enforcer}: got `{got}`, expected {rule} {label} <{en} | {sys}>"));
        }
    }
    Ok(())
}

fn criterion_2() -> Line {
    let pb_ans = format!("i!ans.({PB})");
    let (res, elapsed) = timed(|| -> Result<(), String> {
        run_matches(EI, &[(Rule::IIns, "i?req", "{* -> i!ans}.id", PB), (Rule::IIns, "i!ans", "id", PB)])?;
        // after the insertions the identity passes on whatever pb does
        let third = simulate(&e(EI), &p(PB), 3, &Policy::First);
        if !(third[2].rule == Rule::ITrn && alpha_eq(&third[2].config.enforcer, &e("id"))) {
            return Err(format!("ei: third step `{}`", third[2]));
        }
        run_matches(
            ER,
            &[(Rule::ITrn, "j?req", ER, &pb_ans), (Rule::ITrn, "j!ans", ER, PB), (Rule::ITrn, "j?cls", ER, "nil")],
        )?;
        run_matches(
            ES,
            &[(Rule::ITrn, "tau", ES, &pb_ans), (Rule::ITrn, "i!ans", ES, PB), (Rule::ITer, "i?cls", "id", "nil")],
        )?;
        run_matches(
            ESS,
            &[(Rule::ITrn, "i?req", ESS_I, PB), (Rule::ITrn, "tau", ESS_I, &pb_ans), (Rule::ITrn, "i!ans", ESS, PB)],
        )?;
        // es keeps suppressing as well: tau, ans, tau, ans is a run too
        let again = istep(&Config::new(e(ES), p(PB)));
        let tau_again = again.iter().any(|(r, l, c)| *r == Rule::ITrn && *l == OutLabel::Tau && c.system == p(&pb_ans));
        if !tau_again {
            return Err("es: no second suppression from <es | pb>".into());
        }
        Ok(())
    });
    Line {
        n: 2,
        pass: res.is_ok(),
        what: "runs of ei, er, es, ess over pb",
        detail: res.err().unwrap_or_else(|| "all steps match".into()),
        tolerance: "exact rule, label and configuration",
        elapsed,
        budget: Duration::from_secs(1),
    }
}

fn criterion_3() -> Line {
    let (res, elapsed) = timed(|| {
        let d = dom();
        let got = optimize(&synthesize(&normalize(&f(PHI1), &d).unwrap()).unwrap());
        let ga = labelled(transducer_lts(&got, &d, 4096).unwrap());
        let gb = labelled(transducer_lts(&e(ESS), &d, 4096).unwrap());
        (bisim_graphs(&ga, 0, &gb, 0).bisimilar, alpha_eq(&got, &e(ESS)), got.to_string())
    });
    Line {
        n: 3,
        pass: res.0 && res.1,
        what: "synthesis of phi1 gives ess",
        detail: format!("bisimilar {}, equal up to renaming {}: {}", res.0, res.1, res.2),
        tolerance: "exact",
        elapsed,
        budget: Duration::from_secs(1),
    }
}

fn criterion_4() -> Line {
    let (res, elapsed) = timed(|| {
        let d = dom();
        let phi1 = f(PHI1);
        let (pg, pb, req) = (lts(PG), lts(PB), lts("i?req.nil"));
        let unsound = check_soundness_with(&phi1, &e(EI), "ei/pb", &pb, &d);
        let opaque_es = check_transparency_with(&phi1, &e(ES), "es/pg", &pg);
        let opaque_er = check_transparency_with(&phi1, &e(ER), "er/req", &req);
        let fine = check_transparency_with(&phi1, &e(ESS), "ess/pg", &pg);
        let (ess_pg, _) = composite_on_lts(&e(ESS), &pg, 0, 4096).unwrap();
        let expected = unsound.outcome == Outcome::Fail
            && unsound.witness.as_deref() == Some("i?req.i!ans.i?req.i?req")
            && opaque_es.outcome == Outcome::Fail
            && opaque_er.outcome == Outcome::Fail
            && opaque_er.witness.as_deref() == Some("j?req")
            && fine.outcome == Outcome::Pass
            && bisim(&ess_pg, 0, &pg, 0).bisimilar;
        (expected, [unsound, opaque_es, opaque_er, fine])
    });
    Line {
        n: 4,
        pass: res.0,
        what: "ei unsound on pb, es and er opaque, ess transparent on pg",
        detail: res.1.iter().map(Verdict::to_string).collect::<Vec<_>>().join(" / "),
        tolerance: "exact verdicts",
        elapsed,
        budget: Duration::from_secs(5),
    }
}

fn corpus_shape_ok(cases: &[Case]) -> bool {
    cases.iter().all(|c| c.formula.size() <= 2 * FORMULA_BUDGET && c.lts.len() <= PROCESS_STATES)
}

fn suite_line(n: usize, what: &'static str, prop: Property, budget: u64) -> Line {
    let d = dom();
    let (res, elapsed) = timed(|| {
        let cases = the_corpus();
        let verdicts = run_suite(&cases, &[prop], DEPTH, &d);
        (corpus_shape_ok(&cases), verdicts)
    });
    let count = |o: Outcome| res.1.iter().filter(|v| v.outcome == o).count();
    let vacuous = res.1.iter().filter(|v| v.witness.as_deref().is_some_and(|w| w.starts_with("vacuous"))).count();
    let first_bad =
        res.1.iter().find(|v| v.outcome != Outcome::Pass).map(|v| format!("; first: {v}")).unwrap_or_default();
    Line {
        n,
        pass: res.0 && count(Outcome::Fail) == 0 && count(Outcome::Inconclusive) == 0,
        what,
        detail: format!(
            "{} pairs, {} pass ({} vacuous), {} fail, {} inconclusive{first_bad}",
            res.1.len(),
            count(Outcome::Pass),
            vacuous,
            count(Outcome::Fail),
            count(Outcome::Inconclusive)
        ),
        tolerance: "zero failures",
        elapsed,
        budget: Duration::from_secs(budget),
    }
}

fn criterion_7() -> Line {
    let d = dom();
    let (res, elapsed) = timed(|| {
        let systems: Vec<Lts> = the_corpus().into_iter().map(|c| c.lts).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut bad = Vec::new();
        for k in 0..100 {
            let phi = gen_formula(&d, rng.gen_range(1..=FORMULA_BUDGET), rng.gen());
            let nf = normalize(&phi, &d).unwrap();
            if !guards_disjoint(&nf, &d) || !nf_structure(&nf) {
                bad.push(format!("#{k} `{nf}` not in normal form"));
            }
            for (s, l) in systems.iter().enumerate() {
                if mc_eval(&phi, l, &Vec::new()).unwrap() != mc_eval(&nf, l, &Vec::new()).unwrap() {
                    bad.push(format!("#{k} `{phi}` vs `{nf}` on system {s}"));
                }
            }
        }
        bad
    });
    Line {
        n: 7,
        pass: res.is_empty(),
        what: "normal forms keep meaning and shape",
        detail: format!(
            "100 formulas x {CORPUS_SIZE} systems, {} failures{}",
            res.len(),
            res.first().map(|b| format!("; first: {b}")).unwrap_or_default()
        ),
        tolerance: "zero failures",
        elapsed,
        budget: Duration::from_secs(60),
    }
}

/// Why a trace-transparency failure happened, if it is one of the two known
/// shapes:
/// - forward: the trace extends a violating trace, so the enforcer has
///   already suppressed part of it;
/// - backward: the state reached only under monitoring is reached without
///   monitoring by a longer trace, whose extra actions were suppressed.
fn explain(case: &Case, witness: &str) -> Option<&'static str> {
    let (dir, rest) = witness.split_once(' ')?;
    let trace_text = rest.split(':').next()?;
    let t: Vec<Action> = match trace_text {
        "eps" => Vec::new(),
        s => s
            .split('.')
            .map(|a| shml_core::syntax::parse_label(a, None).ok()?.action().cloned())
            .collect::<Option<_>>()?,
    };
    let l = &case.lts;
    match dir {
        "forward" => (0..t.len())
            .any(|k| violates(l, 0, &t[..k], &case.formula).unwrap())
            .then_some("forward: extends a violating trace"),
        "backward" => {
            let state = rest.split('`').nth(1)?;
            let longer = l.traces(0, t.len() + DEPTH).into_iter().any(|u| {
                u.len() > t.len() && u.starts_with(&t) && l.weak_trace(0, &u).ones().any(|q| l.name(q) == state)
            });
            longer.then_some("backward: reached by suppressing further actions")
        }
        _ => None,
    }
}

struct NvttReport {
    line: Line,
    unexplained: Vec<String>,
    instance_ok: bool,
    hand_made: [bool; 2],
}

fn criterion_8() -> NvttReport {
    let d = dom();
    let (res, elapsed) = timed(|| {
        let cases = the_corpus();
        let verdicts = run_suite(&cases, &[Property::Nvtt], DEPTH, &d);
        let mut explained = BTreeSet::new();
        let mut unexplained = Vec::new();
        for (case, v) in cases.iter().zip(&verdicts) {
            if v.outcome == Outcome::Pass {
                continue;
            }
            match v.witness.as_deref().and_then(|w| explain(case, w)) {
                Some(kind) => {
                    explained.insert(kind);
                }
                None => unexplained.push(format!("{v} for `{}` on `{}`", case.formula, case.process)),
            }
        }
        // ess keeps req.ans of pb in both directions
        let pb = lts(PB);
        let (mon, states) = composite_on_lts(&e(ESS), &pb, 0, 4096).unwrap();
        let t = [Action::input("i", "req"), Action::output("i", "ans")];
        let plain: BTreeSet<usize> = pb.weak_trace(0, &t).ones().collect();
        let monitored: BTreeSet<usize> = mon.weak_trace(0, &t).ones().map(|s| states[s].1).collect();
        let instance = !violates(&pb, 0, &t, &f(PHI1)).unwrap()
            && plain == monitored
            && plain.contains(&0)
            && mon.weak_trace(0, &t).contains(0);
        // over all of pb the check still fails, on a trace extending req.req
        let whole = check_nvtt_with(&f(PHI1), &e(ESS), "ess/pb", &pb, DEPTH);
        let pb_case = Case { id: 0, formula: f(PHI1), process: p(PB), lts: pb.clone() };
        if whole.outcome != Outcome::Pass && whole.witness.as_deref().and_then(|w| explain(&pb_case, w)).is_none() {
            unexplained.push(whole.to_string());
        }
        // the two smallest shapes of failure
        let aa = f("[i?req][i?req]ff");
        let backward = check_nvtt_with(&aa, &compile(&aa, &d).unwrap(), "a", &lts("i?req.i?req.nil"), DEPTH);
        let a = f("[i?req]ff");
        // req.ans is not violating under exact forcing, yet only the plain
        // system can perform it
        let two = lts("i?req.i!ans.nil");
        let (mon2, _) = composite_on_lts(&compile(&a, &d).unwrap(), &two, 0, 4096).unwrap();
        let hand = [
            backward.witness.as_deref().is_some_and(|w| w.starts_with("backward i?req:")),
            !violates(&two, 0, &t, &a).unwrap()
                && !two.weak_trace(0, &t).is_clear()
                && mon2.weak_trace(0, &t).is_clear(),
        ];
        (verdicts, explained, unexplained, instance, hand)
    });
    let (verdicts, explained, unexplained, instance, hand) = res;
    let fails: Vec<&Verdict> = verdicts.iter().filter(|v| v.outcome == Outcome::Fail).collect();
    let line = Line {
        n: 8,
        pass: fails.is_empty() && instance && unexplained.is_empty(),
        what: "non-violating traces pass through unchanged, depth 6",
        detail: format!(
            "{} pairs, {} fail, req.ans of pb preserved {instance}; failure kinds {:?}{}",
            verdicts.len(),
            fails.len(),
            explained,
            fails.first().map(|v| format!("; first: {v}")).unwrap_or_default()
        ),
        tolerance: "zero failures",
        elapsed,
        budget: Duration::from_secs(120),
    };
    NvttReport { line, unexplained, instance_ok: instance, hand_made: hand }
}

fn criterion_9() -> Line {
    let (res, elapsed) = timed(|| {
        let cases = the_corpus();
        let mut disagreements = Vec::new();
        for c in cases.iter().take(100) {
            let sem = mc_eval(&c.formula, &c.lts, &Vec::new()).unwrap();
            for s in 0..c.lts.len() {
                if sat_oracle(&c.lts, s, &c.formula).unwrap() != sem.contains(s) {
                    disagreements.push(format!("sat #{} state {s}", c.id));
                }
            }
        }
        let small: Vec<&Lts> = cases.iter().map(|c| &c.lts).filter(|l| l.len() <= 5).collect();
        let mut pairs = 0;
        for a in &small {
            for b in &small {
                pairs += 1;
                if bisim(a, 0, b, 0).bisimilar != naive_bisim(a, 0, b, 0) {
                    disagreements.push(format!("bisim pair {pairs}"));
                }
            }
        }
        (pairs, disagreements)
    });
    Line {
        n: 9,
        pass: res.1.is_empty() && res.0 > 0,
        what: "model checker vs oracle, refinement vs naive bisimulation",
        detail: format!("100 formula pairs, {} system pairs, {} disagreements", res.0, res.1.len()),
        tolerance: "zero disagreements",
        elapsed,
        budget: Duration::from_secs(60),
    }
}

fn criterion_10() -> Line {
    let d: Domain = dom();
    let (res, elapsed) = timed(|| {
        let cases = the_corpus();
        let verdicts = run_suite(&cases, &[Property::ViolationSemantics], DEPTH, &d);
        let mut problems = Vec::new();
        let mut found = 0;
        let mut truncated = 0;
        for (c, v) in cases.iter().zip(&verdicts) {
            let holds = holds_at(&c.formula, &c.lts, 0).unwrap();
            // condition 1, on every violating trace the oracle finds
            for t in c.lts.traces(0, DEPTH) {
                if forcing_oracle(&c.lts, 0, &t, &c.formula) {
                    found += 1;
                    if holds || c.lts.weak_trace(0, &t).is_clear() {
                        problems.push(format!("#{} {}", c.id, trace_str(&t)));
                    }
                }
            }
            // condition 2 never passes without a witness
            match (holds, v.outcome) {
                (_, Outcome::Fail) => problems.push(v.to_string()),
                (false, Outcome::Pass) if v.witness.is_none() => problems.push(v.to_string()),
                (false, Outcome::Inconclusive) => truncated += 1,
                (true, Outcome::Inconclusive) => problems.push(v.to_string()),
                _ => {}
            }
        }
        (found, truncated, problems)
    });
    Line {
        n: 10,
        pass: res.2.is_empty(),
        what: "violating traces of violating systems only, witnesses for every violation",
        detail: format!("{} violating traces checked, {} inconclusive, {} problems", res.0, res.1, res.2.len()),
        tolerance: "exact; inconclusive allowed, false pass not",
        elapsed,
        budget: Duration::from_secs(60),
    }
}

fn main() {
    let lines = vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        suite_line(5, "soundness on the random corpus", Property::Soundness, 60),
        suite_line(6, "transparency on the random corpus", Property::Transparency, 60),
        criterion_7(),
    ];
    let nvtt = criterion_8();
    let rest = [criterion_9(), criterion_10()];
    for l in lines.iter().chain([&nvtt.line]).chain(&rest) {
        l.print();
    }

    for l in lines.iter().chain(&rest) {
        assert!(l.pass && l.elapsed < l.budget, "criterion {} did not pass: {}", l.n, l.detail);
    }
    // Trace transparency fails on this corpus in two known ways (see the
    // README). What is pinned here is that the worked instance
    // holds, that the two smallest counterexamples reproduce, and that every
    // corpus failure has one of the two explained shapes.
    assert!(nvtt.instance_ok, "req.ans of pb is not preserved");
    assert_eq!(nvtt.hand_made, [true, true], "the minimal counterexamples no longer reproduce");
    assert!(nvtt.unexplained.is_empty(), "unexplained trace-transparency failures: {:#?}", nvtt.unexplained);
    assert!(nvtt.line.elapsed < nvtt.line.budget);
}
