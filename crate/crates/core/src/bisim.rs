//! Strong bisimilarity by signature-based partition refinement.

use std::collections::BTreeMap;
use std::fmt::Display;

use crate::lts::Lts;
use crate::symbolic::OutLabel;

/// A finite labelled graph with arbitrary label type.
#[derive(Debug, Clone)]
pub struct Graph<L> {
    pub names: Vec<String>,
    pub edges: Vec<Vec<(L, usize)>>,
}

impl<L: Clone> Graph<L> {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

impl From<&Lts> for Graph<OutLabel> {
    fn from(l: &Lts) -> Self {
        Graph { names: l.names().to_vec(), edges: (0..l.len()).map(|s| l.transitions(s).to_vec()).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BisimResult {
    pub bisimilar: bool,
    /// On failure, a label path after which one side can move where the
    /// other cannot follow.
    pub witness: Option<Vec<String>>,
    pub rounds: usize,
}

/// The coarsest stable partition of a graph; `history[r][s]` is the block of
/// `s` after round `r`.
pub fn refine<L: Ord + Clone>(g: &Graph<L>) -> Vec<Vec<usize>> {
    let n = g.len();
    let mut history = vec![vec![0usize; n]];
    let mut count = if n == 0 { 0 } else { 1 };
    loop {
        let cur = history.last().unwrap();
        let mut ids: BTreeMap<(usize, Vec<(L, usize)>), usize> = BTreeMap::new();
        let mut next = vec![0usize; n];
        for s in 0..n {
            let mut sig: Vec<(L, usize)> = g.edges[s].iter().map(|(l, t)| (l.clone(), cur[*t])).collect();
            sig.sort();
            sig.dedup();
            let fresh = ids.len();
            next[s] = *ids.entry((cur[s], sig)).or_insert(fresh);
        }
        let new_count = ids.len();
        history.push(next);
        if new_count == count {
            return history;
        }
        count = new_count;
    }
}

fn disjoint_union<L: Clone>(a: &Graph<L>, b: &Graph<L>) -> Graph<L> {
    let off = a.len();
    let mut names = a.names.clone();
    names.extend(b.names.iter().cloned());
    let mut edges = a.edges.clone();
    edges.extend(b.edges.iter().map(|row| row.iter().map(|(l, t)| (l.clone(), t + off)).collect()));
    Graph { names, edges }
}

pub fn bisim_graphs<L: Ord + Clone + Display>(a: &Graph<L>, sa: usize, b: &Graph<L>, sb: usize) -> BisimResult {
    let g = disjoint_union(a, b);
    let sb = sb + a.len();
    let history = refine(&g);
    let last = history.last().unwrap();
    let rounds = history.len() - 1;
    if last[sa] == last[sb] {
        return BisimResult { bisimilar: true, witness: None, rounds };
    }
    let mut path = Vec::new();
    witness(&g, &history, sa, sb, &mut path);
    BisimResult { bisimilar: false, witness: Some(path), rounds }
}

/// Walks down the refinement history: at the round where `s` and `t` were
/// first separated, one of them has a move the other cannot match into the
/// previous round's blocks.
fn witness<L: Ord + Clone + Display>(g: &Graph<L>, history: &[Vec<usize>], s: usize, t: usize, path: &mut Vec<String>) {
    let Some(r) = history.iter().position(|h| h[s] != h[t]) else { return };
    if r == 0 {
        return;
    }
    let prev = &history[r - 1];
    for (x, y) in [(s, t), (t, s)] {
        for (l, x2) in &g.edges[x] {
            let answers: Vec<usize> = g.edges[y].iter().filter(|(m, _)| m == l).map(|(_, y2)| *y2).collect();
            if answers.iter().any(|y2| prev[*y2] == prev[*x2]) {
                continue;
            }
            path.push(l.to_string());
            if let Some(&y2) = answers.first() {
                witness(g, history, *x2, y2, path);
            }
            return;
        }
    }
}

pub fn bisim(a: &Lts, sa: usize, b: &Lts, sb: usize) -> BisimResult {
    bisim_graphs(&Graph::from(a), sa, &Graph::from(b), sb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{parse_process, reachable};

    fn lts(p: &str) -> Lts {
        reachable(&parse_process(p, None).unwrap(), 100).unwrap()
    }

    #[test]
    fn reflexive() {
        let pg = lts("rec X.(i?req.i!ans.X + i?cls.nil)");
        assert!(bisim(&pg, 0, &pg, 0).bisimilar);
    }

    #[test]
    fn classic_non_bisimilar_pair() {
        let a = lts("i?a.(i?b.nil + i?c.nil)");
        let b = lts("i?a.i?b.nil + i?a.i?c.nil");
        let r = bisim(&a, 0, &b, 0);
        assert!(!r.bisimilar);
        let w = r.witness.unwrap();
        assert_eq!(w[0], "i?a");
        assert!(w.len() == 2);
    }

    #[test]
    fn unfolding_is_bisimilar() {
        let a = lts("rec X.i?a.X");
        let b = lts("i?a.rec X.i?a.X");
        assert!(bisim(&a, 0, &b, 0).bisimilar);
        let c = lts("i?a.i?a.nil");
        assert!(!bisim(&a, 0, &c, 0).bisimilar);
    }

    #[test]
    fn tau_is_a_plain_label() {
        let a = lts("tau.i?a.nil");
        let b = lts("i?a.nil");
        let r = bisim(&a, 0, &b, 0);
        assert!(!r.bisimilar);
        assert_eq!(r.witness.unwrap(), vec!["tau".to_string()]);
    }
}
