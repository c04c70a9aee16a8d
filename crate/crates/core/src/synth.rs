//! Suppression-enforcer synthesis from sHML normal form.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::logic::{nf_structure, Formula};
use crate::normalize::normalize;
use crate::symbolic::{name, Domain, Name, SymAction};
use crate::transducer::{free_rvars, Target, Transducer, Trn};

/// Recursion variable standing for a logical variable: the name with its
/// first letter lowered.
pub fn rvar_of(x: &str) -> Name {
    let mut cs = x.chars();
    match cs.next() {
        Some(c) => name(&format!("{}{}", c.to_ascii_lowercase(), cs.as_str())),
        None => name(x),
    }
}

struct Synth {
    taken: BTreeSet<Name>,
    next: usize,
}

impl Synth {
    fn fresh(&mut self) -> Name {
        loop {
            let cand = if self.next == 0 { name("y") } else { name(&format!("y{}", self.next)) };
            self.next += 1;
            if self.taken.insert(cand.clone()) {
                return cand;
            }
        }
    }

    fn go(&mut self, f: &Formula) -> Result<Trn> {
        Ok(match f {
            Formula::Tt | Formula::Ff => Transducer::id(),
            Formula::Var(x) => Arc::new(Transducer::Var(rvar_of(x))),
            Formula::Max(x, g) => Arc::new(Transducer::Rec(rvar_of(x), self.go(g)?)),
            Formula::Nec(..) => self.conj(std::slice::from_ref(f))?,
            Formula::And(fs) => self.conj(fs)?,
            other => return Err(Error::Fragment(format!("`{other}` is not in sHML normal form"))),
        })
    }

    fn conj(&mut self, fs: &[Formula]) -> Result<Trn> {
        if fs.is_empty() {
            return Ok(Transducer::id());
        }
        let y = self.fresh();
        let mut branches = Vec::with_capacity(fs.len());
        for f in fs {
            let Formula::Nec(SymAction { pattern, cond }, body) = f else {
                return Err(Error::Fragment(format!("conjunct `{f}` is not a necessity")));
            };
            let branch = if **body == Formula::Ff {
                Transducer::prefix(pattern.clone(), cond.clone(), Target::Tau, Arc::new(Transducer::Var(y.clone())))
            } else {
                let out = pattern.underline()?;
                Transducer::prefix(pattern.clone(), cond.clone(), Target::Pat(out), self.go(body)?)
            };
            branches.push(branch);
        }
        Ok(Arc::new(Transducer::Rec(y, Transducer::sum(branches))))
    }
}

fn lvars(f: &Formula, out: &mut BTreeSet<Name>) {
    match f {
        Formula::Var(x) => {
            out.insert(rvar_of(x));
        }
        Formula::Max(x, g) | Formula::Min(x, g) => {
            out.insert(rvar_of(x));
            lvars(g, out);
        }
        Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| lvars(g, out)),
        Formula::Nec(_, g) | Formula::Dia(_, g) => lvars(g, out),
        Formula::Tt | Formula::Ff => {}
    }
}

/// The structural translation. The input must be closed, guarded and in
/// normal form (guard disjointness is the caller's responsibility since it
/// needs a domain).
pub fn synthesize(f: &Formula) -> Result<Trn> {
    if !f.free_lvars().is_empty() {
        return Err(Error::Fragment(format!("`{f}` has free logical variables")));
    }
    if !nf_structure(f) {
        return Err(Error::Fragment(format!("`{f}` is not in sHML normal form")));
    }
    let mut taken = BTreeSet::new();
    lvars(f, &mut taken);
    Synth { taken, next: 0 }.go(f)
}

/// Drops every `rec x.e` whose variable does not occur in `e`.
pub fn optimize(e: &Trn) -> Trn {
    match &**e {
        Transducer::Id | Transducer::Var(_) => e.clone(),
        Transducer::Prefix { pat, cond, out, cont } => {
            Transducer::prefix(pat.clone(), cond.clone(), out.clone(), optimize(cont))
        }
        Transducer::Sum(es) => Arc::new(Transducer::Sum(es.iter().map(optimize).collect())),
        Transducer::Rec(x, body) => {
            let body = optimize(body);
            if free_rvars(&body).contains(x) {
                Arc::new(Transducer::Rec(x.clone(), body))
            } else {
                body
            }
        }
    }
}

/// `optimize(synthesize(normalize(f)))`.
pub fn compile(f: &Formula, d: &Domain) -> Result<Trn> {
    let nf = normalize(f, d)?;
    Ok(optimize(&synthesize(&nf)?))
}
