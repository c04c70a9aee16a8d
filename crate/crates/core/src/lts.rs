//! Finite labelled transition systems over `Act ∪ {τ}`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::OnceLock;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::symbolic::{Action, Domain, OutLabel};
use crate::syntax::parse_label;

pub type StateSet = FixedBitSet;

/// Weak successors of one state, grouped by action.
pub type WeakRow = BTreeMap<Action, StateSet>;

#[derive(Debug)]
pub struct Lts {
    names: Vec<String>,
    edges: Vec<Vec<(OutLabel, usize)>>,
    init: usize,
    weak: OnceLock<Vec<WeakRow>>,
    closure: OnceLock<Vec<StateSet>>,
}

impl Clone for Lts {
    fn clone(&self) -> Self {
        Lts::new(self.names.clone(), self.edges.clone(), self.init)
    }
}

impl Lts {
    pub fn new(names: Vec<String>, edges: Vec<Vec<(OutLabel, usize)>>, init: usize) -> Self {
        assert_eq!(names.len(), edges.len());
        assert!(init < names.len());
        Lts { names, edges, init, weak: OnceLock::new(), closure: OnceLock::new() }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn init(&self) -> usize {
        self.init
    }

    pub fn name(&self, s: usize) -> &str {
        &self.names[s]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn transitions(&self, s: usize) -> &[(OutLabel, usize)] {
        &self.edges[s]
    }

    /// All transitions as triples.
    pub fn triples(&self) -> Vec<(usize, OutLabel, usize)> {
        let mut out = Vec::new();
        for (s, row) in self.edges.iter().enumerate() {
            for (l, t) in row {
                out.push((s, l.clone(), *t));
            }
        }
        out
    }

    pub fn empty_set(&self) -> StateSet {
        FixedBitSet::with_capacity(self.len())
    }

    pub fn full_set(&self) -> StateSet {
        let mut s = self.empty_set();
        s.insert_range(..);
        s
    }

    /// `{ q | s (-τ->)* q }`, cached.
    pub fn tau_closure(&self, s: usize) -> &StateSet {
        &self.closure.get_or_init(|| (0..self.len()).map(|s| self.compute_closure(s)).collect())[s]
    }

    fn compute_closure(&self, s: usize) -> StateSet {
        let mut seen = self.empty_set();
        seen.insert(s);
        let mut stack = vec![s];
        while let Some(q) = stack.pop() {
            for (l, t) in &self.edges[q] {
                if *l == OutLabel::Tau && !seen.contains(*t) {
                    seen.insert(*t);
                    stack.push(*t);
                }
            }
        }
        seen
    }

    fn close_set(&self, set: &StateSet) -> StateSet {
        let mut out = self.empty_set();
        for q in set.ones() {
            out.union_with(self.tau_closure(q));
        }
        out
    }

    /// The weak-transition table row of `s`: for every action α, the set of
    /// `(-τ->)* -α-> (-τ->)*` derivatives.
    pub fn weak_row(&self, s: usize) -> &WeakRow {
        &self.weak.get_or_init(|| (0..self.len()).map(|s| self.compute_weak(s)).collect())[s]
    }

    fn compute_weak(&self, s: usize) -> WeakRow {
        let mut strong: BTreeMap<Action, StateSet> = BTreeMap::new();
        for q in self.tau_closure(s).ones() {
            for (l, t) in &self.edges[q] {
                if let OutLabel::Act(a) = l {
                    strong.entry(a.clone()).or_insert_with(|| self.empty_set()).insert(*t);
                }
            }
        }
        strong.into_iter().map(|(a, set)| (a, self.close_set(&set))).collect()
    }

    pub fn weak_step(&self, s: usize, a: &Action) -> Vec<usize> {
        self.weak_row(s).get(a).map(|set| set.ones().collect()).unwrap_or_default()
    }

    /// States reachable by `p =t=> q`.
    pub fn weak_trace(&self, s: usize, t: &[Action]) -> StateSet {
        let mut cur = self.tau_closure(s).clone();
        for a in t {
            let mut next = self.empty_set();
            for q in cur.ones() {
                if let Some(set) = self.weak_row(q).get(a) {
                    next.union_with(set);
                }
            }
            cur = next;
            if cur.is_clear() {
                break;
            }
        }
        cur
    }

    /// Observable traces of length at most `k` from `s`.
    pub fn traces(&self, s: usize, k: usize) -> BTreeSet<Vec<Action>> {
        let mut out = BTreeSet::new();
        let mut memo: HashMap<(Vec<usize>, usize), BTreeSet<Vec<Action>>> = HashMap::new();
        let start: Vec<usize> = self.tau_closure(s).ones().collect();
        for t in self.traces_from(&start, k, &mut memo) {
            out.insert(t);
        }
        out
    }

    fn traces_from(
        &self,
        set: &[usize],
        k: usize,
        memo: &mut HashMap<(Vec<usize>, usize), BTreeSet<Vec<Action>>>,
    ) -> BTreeSet<Vec<Action>> {
        if let Some(hit) = memo.get(&(set.to_vec(), k)) {
            return hit.clone();
        }
        let mut out = BTreeSet::new();
        out.insert(Vec::new());
        if k > 0 {
            let mut by_action: BTreeMap<Action, StateSet> = BTreeMap::new();
            for &q in set {
                for (a, targets) in self.weak_row(q) {
                    by_action.entry(a.clone()).or_insert_with(|| self.empty_set()).union_with(targets);
                }
            }
            for (a, targets) in by_action {
                let next: Vec<usize> = targets.ones().collect();
                for rest in self.traces_from(&next, k - 1, memo) {
                    let mut t = Vec::with_capacity(rest.len() + 1);
                    t.push(a.clone());
                    t.extend(rest);
                    out.insert(t);
                }
            }
        }
        memo.insert((set.to_vec(), k), out.clone());
        out
    }

    /// Restriction to the states reachable from `s`, renumbered in BFS order.
    pub fn rooted_at(&self, s: usize) -> Lts {
        let mut index = HashMap::new();
        let mut order = vec![s];
        index.insert(s, 0);
        let mut q = VecDeque::from([s]);
        while let Some(x) = q.pop_front() {
            for (_, t) in &self.edges[x] {
                if !index.contains_key(t) {
                    index.insert(*t, order.len());
                    order.push(*t);
                    q.push_back(*t);
                }
            }
        }
        let names = order.iter().map(|&x| self.names[x].clone()).collect();
        let edges = order.iter().map(|&x| self.edges[x].iter().map(|(l, t)| (l.clone(), index[t])).collect()).collect();
        Lts::new(names, edges, 0)
    }

    /// Line-oriented text form accepted by [`parse_lts`].
    pub fn to_text(&self) -> String {
        let mut out = format!("init {}\n", self.names[self.init]);
        for (s, row) in self.edges.iter().enumerate() {
            if row.is_empty() {
                out.push_str(&format!("state {}\n", self.names[s]));
            }
            for (l, t) in row {
                out.push_str(&format!("{} -{}-> {}\n", self.names[s], l, self.names[*t]));
            }
        }
        out
    }
}

/// Parses `init s`, `state s` and `s -label-> t` lines. `#` starts a comment.
/// States are numbered in order of first mention. Without an `init` line the
/// first mentioned state is initial.
pub fn parse_lts(text: &str, domain: Option<&Domain>) -> Result<Lts> {
    parse_lts_at(text, 1, domain)
}

pub(crate) fn parse_lts_at(text: &str, line0: usize, domain: Option<&Domain>) -> Result<Lts> {
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edges: Vec<Vec<(OutLabel, usize)>> = Vec::new();
    let mut init = None;
    let mut intern = |n: &str, names: &mut Vec<String>, edges: &mut Vec<Vec<(OutLabel, usize)>>| -> usize {
        *index.entry(n.to_string()).or_insert_with(|| {
            names.push(n.to_string());
            edges.push(Vec::new());
            names.len() - 1
        })
    };
    for (k, raw) in text.lines().enumerate() {
        let line_no = line0 + k;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["init", s] => {
                if init.is_some() {
                    return Err(Error::parse(line_no, 1, "more than one `init` line"));
                }
                init = Some(intern(s, &mut names, &mut edges));
            }
            ["state", s] => {
                intern(s, &mut names, &mut edges);
            }
            [s, arrow, t] if arrow.starts_with('-') && arrow.ends_with("->") && arrow.len() > 3 => {
                let label_text = &arrow[1..arrow.len() - 2];
                let col = raw.find(arrow).map(|c| c + 2).unwrap_or(1);
                let label = parse_label(label_text, domain).map_err(|e| match e {
                    Error::Parse { msg, .. } => Error::parse(line_no, col, msg),
                    other => other,
                })?;
                let a = intern(s, &mut names, &mut edges);
                let b = intern(t, &mut names, &mut edges);
                edges[a].push((label, b));
            }
            _ => return Err(Error::parse(line_no, 1, "expected `init s`, `state s` or `s -label-> t`")),
        }
    }
    if names.is_empty() {
        return Err(Error::parse(line0, 1, "empty transition system"));
    }
    Ok(Lts::new(names, edges, init.unwrap_or(0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> Action {
        crate::syntax::parse_action(s, None).unwrap()
    }

    #[test]
    fn weak_step_skips_taus() {
        // τ.a.τ.nil
        let lts = parse_lts("s0 -tau-> s1\ns1 -i?a-> s2\ns2 -tau-> s3\nstate s3", None).unwrap();
        assert_eq!(lts.weak_step(0, &a("i?a")), vec![2, 3]);
        assert!(lts.weak_step(3, &a("i?a")).is_empty());
    }

    #[test]
    fn traces_basic() {
        let lts = parse_lts("s -i?a-> t\nt -i?b-> s", None).unwrap();
        let tr = lts.traces(0, 2);
        assert_eq!(tr.len(), 3);
        assert!(tr.contains(&vec![a("i?a"), a("i?b")]));
        assert_eq!(lts.traces(0, 0).len(), 1);
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = parse_lts("s -i?a-> t\nbogus line here now", None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn text_roundtrip() {
        let lts = parse_lts("init t\ns -i?a-> t\nt -tau-> s\nstate u", None).unwrap();
        let again = parse_lts(&lts.to_text(), None).unwrap();
        assert_eq!(again.len(), 3);
        assert_eq!(again.name(again.init()), "t");
    }
}
