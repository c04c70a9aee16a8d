//! Denotational model checking over a finite LTS.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lts::{Lts, StateSet};
use crate::process::{reachable, Proc};
use crate::symbolic::{Name, Subst, SymAction};

use super::Formula;

/// Meaning of free logical variables; later entries shadow earlier ones.
pub type Valuation = Vec<(Name, StateSet)>;

/// `⟦f, ρ⟧` over `lts`. Data variables bound by patterns are instantiated as
/// the modalities are crossed, so `f` must be closed data-wise.
pub fn mc_eval(f: &Formula, lts: &Lts, rho: &Valuation) -> Result<StateSet> {
    let mut rho = rho.clone();
    eval(f, lts, &Subst::new(), &mut rho)
}

pub fn holds_at(f: &Formula, lts: &Lts, s: usize) -> Result<bool> {
    Ok(mc_eval(f, lts, &Vec::new())?.contains(s))
}

/// `p ∈ ⟦f⟧` on the reachable state space of `p`.
pub fn satisfies(p: &Proc, f: &Formula, bound: usize) -> Result<bool> {
    let lts = reachable(p, bound)?;
    holds_at(f, &lts, 0)
}

fn eval(f: &Formula, lts: &Lts, env: &Subst, rho: &mut Valuation) -> Result<StateSet> {
    Ok(match f {
        Formula::Tt => lts.full_set(),
        Formula::Ff => lts.empty_set(),
        Formula::Var(x) => rho
            .iter()
            .rev()
            .find(|(y, _)| y == x)
            .map(|(_, s)| s.clone())
            .ok_or_else(|| Error::UnboundLogicVar(x.to_string()))?,
        Formula::And(fs) => {
            let mut acc = lts.full_set();
            for g in fs {
                acc.intersect_with(&eval(g, lts, env, rho)?);
            }
            acc
        }
        Formula::Or(fs) => {
            let mut acc = lts.empty_set();
            for g in fs {
                acc.union_with(&eval(g, lts, env, rho)?);
            }
            acc
        }
        Formula::Nec(sa, g) => modal(sa, g, lts, env, rho, true)?,
        Formula::Dia(sa, g) => modal(sa, g, lts, env, rho, false)?,
        Formula::Max(x, g) | Formula::Min(x, g) => {
            let greatest = matches!(f, Formula::Max(..));
            let mut cur = if greatest { lts.full_set() } else { lts.empty_set() };
            loop {
                rho.push((x.clone(), cur.clone()));
                let next = eval(g, lts, env, rho);
                rho.pop();
                let next = next?;
                if next == cur {
                    break cur;
                }
                cur = next;
            }
        }
    })
}

fn modal(sa: &SymAction, g: &Formula, lts: &Lts, env: &Subst, rho: &mut Valuation, nec: bool) -> Result<StateSet> {
    let inst = sa.subst_values(env);
    if let Some(v) = inst.free_vars().first() {
        return Err(Error::UnboundDataVar(v.to_string()));
    }
    let mut cache: HashMap<Subst, StateSet> = HashMap::new();
    let mut out = if nec { lts.full_set() } else { lts.empty_set() };
    for s in 0..lts.len() {
        for (a, targets) in lts.weak_row(s) {
            let Some(sigma) = inst.admits(a) else { continue };
            if !cache.contains_key(&sigma) {
                let mut env2 = env.clone();
                env2.extend(sigma.iter().map(|(k, v)| (k.clone(), v.clone())));
                let set = eval(g, lts, &env2, rho)?;
                cache.insert(sigma.clone(), set);
            }
            let good = &cache[&sigma];
            if nec {
                if !targets.is_subset(good) {
                    out.set(s, false);
                    break;
                }
            } else if !targets.is_disjoint(good) {
                out.insert(s);
                break;
            }
        }
    }
    Ok(out)
}
