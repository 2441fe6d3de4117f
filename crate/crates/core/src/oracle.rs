//! Exact maximum matching for general graphs (Edmonds' blossom contraction).

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Edge;
use crate::matching::Matching;

/// Largest graph the oracle accepts.
pub const ORACLE_MAX_VERTICES: usize = 5000;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub size: usize,
    pub matching: Matching,
    /// Adjacency entries scanned plus vertices relabeled during contractions.
    pub elapsed_work: u64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OracleSummary {
    pub size: usize,
    pub elapsed_work: u64,
}

impl From<&OracleResult> for OracleSummary {
    fn from(r: &OracleResult) -> Self {
        OracleSummary {
            size: r.size,
            elapsed_work: r.elapsed_work,
        }
    }
}

/// Maximum matching of the graph `([0, n), edges)`.
pub fn exact_matching(edges: &[Edge], n: usize) -> Result<OracleResult> {
    if n > ORACLE_MAX_VERTICES {
        return Err(Error::Config(format!(
            "oracle is limited to {ORACLE_MAX_VERTICES} vertices, got {n}"
        )));
    }
    let mut adj = vec![Vec::new(); n];
    for &e in edges {
        if e.v() >= n {
            return Err(Error::InvalidVertex { vertex: e.v(), n });
        }
        adj[e.u()].push(e.v());
        adj[e.v()].push(e.u());
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let mut solver = Blossom::new(adj);
    solver.solve();
    let matching = Matching::from_edges(
        n,
        (0..n)
            .filter(|&v| solver.mate[v] != NONE && v < solver.mate[v])
            .map(|v| Edge::new(v, solver.mate[v]).expect("mate differs from vertex")),
    )
    .expect("blossom output is a matching");
    Ok(OracleResult {
        size: matching.len(),
        matching,
        elapsed_work: solver.work,
    })
}

/// Maximum matching without the size cap or work accounting. Every edge
/// must lie in `[0, n)`.
pub(crate) fn maximum_matching(edges: &[Edge], n: usize) -> Matching {
    let mut adj = vec![Vec::new(); n];
    for &e in edges {
        adj[e.u()].push(e.v());
        adj[e.v()].push(e.u());
    }
    let mut solver = Blossom::new(adj);
    solver.solve();
    Matching::from_edges(
        n,
        (0..n)
            .filter(|&v| solver.mate[v] != NONE && v < solver.mate[v])
            .map(|v| Edge::new(v, solver.mate[v]).expect("mate differs from vertex")),
    )
    .expect("blossom output is a matching")
}

struct Blossom {
    n: usize,
    adj: Vec<Vec<usize>>,
    mate: Vec<usize>,
    parent: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    in_blossom: Vec<bool>,
    queue: VecDeque<usize>,
    work: u64,
}

impl Blossom {
    fn new(adj: Vec<Vec<usize>>) -> Self {
        let n = adj.len();
        Blossom {
            n,
            adj,
            mate: vec![NONE; n],
            parent: vec![NONE; n],
            base: (0..n).collect(),
            used: vec![false; n],
            in_blossom: vec![false; n],
            queue: VecDeque::new(),
            work: 0,
        }
    }

    fn solve(&mut self) {
        // Greedy start; the searches below only need to fix what it missed.
        for v in 0..self.n {
            if self.mate[v] == NONE {
                if let Some(&w) = self.adj[v].iter().find(|&&w| self.mate[w] == NONE) {
                    self.mate[v] = w;
                    self.mate[w] = v;
                }
            }
        }
        for root in 0..self.n {
            if self.mate[root] != NONE || self.adj[root].is_empty() {
                continue;
            }
            let end = self.find_path(root);
            if end != NONE {
                self.augment(end);
            }
        }
    }

    fn augment(&mut self, mut v: usize) {
        while v != NONE {
            let pv = self.parent[v];
            let next = self.mate[pv];
            self.mate[v] = pv;
            self.mate[pv] = v;
            v = next;
        }
    }

    fn lca(&mut self, mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; self.n];
        loop {
            a = self.base[a];
            seen[a] = true;
            if self.mate[a] == NONE {
                break;
            }
            a = self.parent[self.mate[a]];
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            b = self.parent[self.mate[b]];
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[self.mate[v]]] = true;
            self.parent[v] = child;
            child = self.mate[v];
            v = self.parent[self.mate[v]];
        }
    }

    fn find_path(&mut self, root: usize) -> usize {
        self.used.fill(false);
        self.parent.fill(NONE);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.used[root] = true;
        self.queue.clear();
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for idx in 0..self.adj[v].len() {
                let to = self.adj[v][idx];
                self.work += 1;
                if self.base[v] == self.base[to] || self.mate[v] == to {
                    continue;
                }
                if to == root || (self.mate[to] != NONE && self.parent[self.mate[to]] != NONE) {
                    let cur = self.lca(v, to);
                    self.in_blossom.fill(false);
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    for i in 0..self.n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                    self.work += self.n as u64;
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if self.mate[to] == NONE {
                        return to;
                    }
                    let next = self.mate[to];
                    self.used[next] = true;
                    self.queue.push_back(next);
                }
            }
        }
        NONE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edges(list: &[(usize, usize)]) -> Vec<Edge> {
        list.iter().map(|&(a, b)| Edge::new(a, b).unwrap()).collect()
    }

    /// Exhaustive maximum matching by branching on the lowest edge.
    fn brute_force(edges: &[Edge], n: usize) -> usize {
        fn go(edges: &[Edge], used: &mut Vec<bool>) -> usize {
            let Some((first, rest)) = edges.split_first() else {
                return 0;
            };
            let skip = go(rest, used);
            let (a, b) = first.endpoints();
            if used[a] || used[b] {
                return skip;
            }
            used[a] = true;
            used[b] = true;
            let take = 1 + go(rest, used);
            used[a] = false;
            used[b] = false;
            skip.max(take)
        }
        go(edges, &mut vec![false; n])
    }

    #[test]
    fn small_examples() {
        let tri = edges(&[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(exact_matching(&tri, 3).unwrap().size, 1);
        let k4 = edges(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(exact_matching(&k4, 4).unwrap().size, 2);
    }

    #[test]
    fn petersen_graph() {
        let mut list = Vec::new();
        for i in 0..5 {
            list.push((i, (i + 1) % 5));
            list.push((i, i + 5));
            list.push((5 + i, 5 + (i + 2) % 5));
        }
        let g = edges(&list);
        assert_eq!(brute_force(&g, 10), 5);
        let r = exact_matching(&g, 10).unwrap();
        assert_eq!(r.size, 5);
        r.matching.validate().unwrap();
    }

    #[test]
    fn blossom_needed() {
        // Odd cycle with a pendant path: greedy from vertex order can get stuck.
        let g = edges(&[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (2, 5), (5, 6), (0, 7)]);
        assert_eq!(exact_matching(&g, 8).unwrap().size, brute_force(&g, 8));
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(
            exact_matching(&[], ORACLE_MAX_VERTICES + 1),
            Err(Error::Config(_))
        ));
    }
}
