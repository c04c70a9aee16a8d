use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use shml_core::bisim::bisim;
use shml_core::harness::{self, Outcome, Property, Verdict};
use shml_core::logic::{holds_at, is_guarded, is_shml, parse_formula, Formula};
use shml_core::lts::{parse_lts, Lts};
use shml_core::normalize::normalize_traced;
use shml_core::process::{parse_process, reachable, Proc};
use shml_core::runtime::{composite_on_lts, simulate, Policy};
use shml_core::specfile::{parse_spec, Item, SpecFile};
use shml_core::symbolic::Domain;
use shml_core::synth::{optimize, synthesize};
use shml_core::transducer::{parse_transducer, Trn};
use shml_core::Error;

const PASS: u8 = 0;
const FAIL: u8 = 1;
const USAGE: u8 = 2;
const INCONCLUSIVE: u8 = 3;

/// Compile safety formulas into suppression enforcers, run them against
/// labelled transition systems and check the results.
#[derive(Parser)]
#[command(name = "shml", version)]
struct Cli {
    /// File with a domain block and named formulas, processes, transducers
    /// and transition systems.
    #[arg(long, global = true)]
    spec: Option<PathBuf>,

    /// Cap on explored states for processes and monitored systems.
    #[arg(long, global = true, default_value_t = harness::COMPOSITE_BOUND)]
    domain_bound: usize,

    /// Seed for `random` policies and corpora that do not name one.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Does the system satisfy the formula?
    Check { formula: String, process: String },
    /// Print the normal form of a safety formula.
    Normalize {
        formula: String,
        #[arg(long)]
        dump_stages: bool,
    },
    /// Print the suppression enforcer for a safety formula.
    Synthesize {
        formula: String,
        #[arg(long)]
        no_optimize: bool,
        #[arg(long)]
        dump_stages: bool,
    },
    /// Run an enforcer instrumented over a process, one step per line.
    Simulate {
        #[arg(long)]
        enforcer: String,
        #[arg(long)]
        process: String,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// first, random[:SEED] or script:I,J,...
        #[arg(long, default_value = "first")]
        policy: String,
    },
    /// Strong bisimilarity of two systems; `<E|P>` names a monitored system.
    Bisim {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Check enforcement properties over a corpus.
    Verify {
        /// soundness, transparency, nvtt, violation-sem, all, or a comma list
        #[arg(long, default_value = "all")]
        property: String,
        /// A spec file (every safety formula against every system) or
        /// random:N[:SEED].
        #[arg(long)]
        corpus: Option<String>,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
}

struct Ctx {
    spec: SpecFile,
    bound: usize,
    seed: u64,
}

fn default_domain() -> Domain {
    Domain::new(["i", "j"], ["req", "ans", "cls"]).expect("valid default domain")
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::UnknownName(format!("{}: {e}", path.display())))
}

/// Text for an argument: the contents of an existing file, else the
/// argument itself.
fn text_of(arg: &str) -> Result<String, Error> {
    let path = Path::new(arg);
    if path.is_file() {
        read(path)
    } else {
        Ok(arg.to_string())
    }
}

impl Ctx {
    fn domain(&self) -> Option<&Domain> {
        self.spec.domain.as_ref()
    }

    fn domain_or_default(&self) -> Domain {
        self.spec.domain.clone().unwrap_or_else(default_domain)
    }

    fn formula(&self, arg: &str) -> Result<Formula, Error> {
        match self.spec.get(arg) {
            Some(Item::Formula(f)) => Ok(f.clone()),
            Some(_) => Err(Error::UnknownName(format!("{arg} is not a formula"))),
            None => parse_formula(&text_of(arg)?, self.domain()),
        }
    }

    fn transducer(&self, arg: &str) -> Result<Trn, Error> {
        match self.spec.get(arg) {
            Some(Item::Transducer(e)) => Ok(e.clone()),
            Some(_) => Err(Error::UnknownName(format!("{arg} is not a transducer"))),
            None => parse_transducer(&text_of(arg)?, self.domain()),
        }
    }

    fn process(&self, arg: &str) -> Result<Proc, Error> {
        match self.spec.get(arg) {
            Some(Item::Process(p)) => Ok(p.clone()),
            Some(_) => Err(Error::UnknownName(format!("{arg} is not a process term"))),
            None => parse_process(&text_of(arg)?, self.domain()),
        }
    }

    /// A system as an explicit graph: a named process or transition
    /// system, a monitored system `<E|P>`, an LTS file or a process term.
    fn system(&self, arg: &str) -> Result<Lts, Error> {
        let arg = arg.trim();
        if let Some(inner) = arg.strip_prefix('<').and_then(|r| r.strip_suffix('>')) {
            let bar = split_bar(inner).ok_or_else(|| Error::UnknownName(format!("expected `<E|P>`, got `{arg}`")))?;
            let e = self.transducer(inner[..bar].trim())?;
            let p = self.system(inner[bar + 1..].trim())?;
            return Ok(composite_on_lts(&e, &p, p.init(), self.bound)?.0);
        }
        match self.spec.get(arg) {
            Some(Item::Process(p)) => reachable(p, self.bound),
            Some(Item::Lts(l)) => Ok(l.clone()),
            Some(_) => Err(Error::UnknownName(format!("{arg} is not a system"))),
            None => {
                let text = text_of(arg)?;
                if text.contains("->") && !text.contains('{') {
                    parse_lts(&text, self.domain())
                } else {
                    reachable(&parse_process(&text, self.domain())?, self.bound)
                }
            }
        }
    }
}

/// Position of the first `|` that is not part of `||`.
fn split_bar(s: &str) -> Option<usize> {
    let b = s.as_bytes();
    (0..b.len()).find(|&k| b[k] == b'|' && b.get(k + 1) != Some(&b'|') && (k == 0 || b[k - 1] != b'|'))
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::BoundExceeded(_) | Error::Explosion(_) => INCONCLUSIVE,
        _ => USAGE,
    }
}

fn check(ctx: &Ctx, formula: &str, process: &str) -> Result<u8, Error> {
    let f = ctx.formula(formula)?;
    let p = ctx.system(process)?;
    if holds_at(&f, &p, p.init())? {
        println!("holds");
        return Ok(PASS);
    }
    if is_shml(&f) && is_guarded(&f) && f.free_lvars().is_empty() {
        match harness::shortest_violation(&p, &f, harness::WITNESS_DEPTH)? {
            Some(t) => println!("fails: violating trace {}", harness::trace_str(&t)),
            None => println!("fails: no violating trace within depth {}", harness::WITNESS_DEPTH),
        }
    } else {
        println!("fails");
    }
    Ok(FAIL)
}

fn print_stages(stages: &[(String, String)]) {
    for (name, body) in stages {
        println!("## {name}");
        println!("{}", body.trim_end());
    }
}

fn normalize_cmd(ctx: &Ctx, formula: &str, dump: bool) -> Result<u8, Error> {
    let f = ctx.formula(formula)?;
    let trace = normalize_traced(&f, &ctx.domain_or_default())?;
    if dump {
        print_stages(&trace.stages);
        println!("## result");
    }
    println!("{}", trace.result);
    Ok(PASS)
}

fn synthesize_cmd(ctx: &Ctx, formula: &str, no_optimize: bool, dump: bool) -> Result<u8, Error> {
    let f = ctx.formula(formula)?;
    let trace = normalize_traced(&f, &ctx.domain_or_default())?;
    let raw = synthesize(&trace.result)?;
    if dump {
        print_stages(&trace.stages);
        println!("## synthesize");
        println!("{raw}");
        println!("## result");
    }
    if no_optimize {
        println!("{raw}");
    } else {
        println!("{}", optimize(&raw));
    }
    Ok(PASS)
}

fn simulate_cmd(ctx: &Ctx, enforcer: &str, process: &str, steps: usize, policy: &str) -> Result<u8, Error> {
    let e = ctx.transducer(enforcer)?;
    let p = ctx.process(process)?;
    let policy = match policy {
        "random" => Policy::Random(ctx.seed),
        other => Policy::parse(other).ok_or_else(|| Error::UnknownName(format!("policy `{other}`")))?,
    };
    for step in simulate(&e, &p, steps, &policy) {
        println!("{step}");
    }
    Ok(PASS)
}

fn bisim_cmd(ctx: &Ctx, left: &str, right: &str) -> Result<u8, Error> {
    let l = ctx.system(left)?;
    let r = ctx.system(right)?;
    let res = bisim(&l, l.init(), &r, r.init());
    if res.bisimilar {
        println!("bisimilar");
        Ok(PASS)
    } else {
        println!("not bisimilar: {}", res.witness.unwrap_or_default().join("."));
        Ok(FAIL)
    }
}

fn verify_cmd(ctx: &Ctx, property: &str, corpus: Option<&str>, depth: usize) -> Result<u8, Error> {
    let props = Property::parse(property).ok_or_else(|| Error::UnknownName(format!("property `{property}`")))?;
    let corpus = corpus.map(str::to_string).unwrap_or_else(|| format!("random:200:{}", ctx.seed));
    let verdicts: Vec<Verdict> = if let Some(rest) = corpus.strip_prefix("random:") {
        let mut parts = rest.split(':');
        let n = parts.next().and_then(|s| s.parse().ok());
        let seed = match parts.next() {
            None => Some(ctx.seed),
            Some(s) => s.parse().ok(),
        };
        let (Some(n), Some(seed), None) = (n, seed, parts.next()) else {
            return Err(Error::UnknownName(format!("corpus `{corpus}`; expected random:N[:SEED]")));
        };
        let d = ctx.domain_or_default();
        harness::run_suite(&harness::corpus(&d, n, seed), &props, depth, &d)
    } else {
        let file = parse_spec(&read(Path::new(&corpus))?)?;
        let d = file.domain.clone().unwrap_or_else(default_domain);
        let systems = file.systems(ctx.bound)?;
        let mut formulas = Vec::new();
        for (name, f) in file.formulas() {
            if is_shml(f) && is_guarded(f) && f.free_lvars().is_empty() {
                formulas.push((name, f));
            } else {
                println!("# skipped {name}: not a closed guarded safety formula");
            }
        }
        let pairs: Vec<(String, &Formula, &Lts)> = formulas
            .iter()
            .flat_map(|(fname, f)| systems.iter().map(move |(pname, l)| (format!("{fname}/{pname}"), *f, l)))
            .collect();
        harness::run_pairs(&pairs, &props, depth, &d)
    };
    let count = |o: Outcome| verdicts.iter().filter(|v| v.outcome == o).count();
    for v in &verdicts {
        println!("{v}");
    }
    let (pass, fail, inconclusive) = (count(Outcome::Pass), count(Outcome::Fail), count(Outcome::Inconclusive));
    println!("# pass {pass} fail {fail} inconclusive {inconclusive}");
    Ok(if fail > 0 {
        FAIL
    } else if inconclusive > 0 {
        INCONCLUSIVE
    } else {
        PASS
    })
}

fn run(cli: Cli) -> Result<u8, Error> {
    let spec = match &cli.spec {
        Some(path) => parse_spec(&read(path)?)?,
        None => SpecFile::default(),
    };
    let ctx = Ctx { spec, bound: cli.domain_bound, seed: cli.seed };
    match &cli.cmd {
        Cmd::Check { formula, process } => check(&ctx, formula, process),
        Cmd::Normalize { formula, dump_stages } => normalize_cmd(&ctx, formula, *dump_stages),
        Cmd::Synthesize { formula, no_optimize, dump_stages } => {
            synthesize_cmd(&ctx, formula, *no_optimize, *dump_stages)
        }
        Cmd::Simulate { enforcer, process, steps, policy } => simulate_cmd(&ctx, enforcer, process, *steps, policy),
        Cmd::Bisim { left, right } => bisim_cmd(&ctx, left, right),
        Cmd::Verify { property, corpus, depth } => verify_cmd(&ctx, property, corpus.as_deref(), *depth),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { PASS });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
