//! Test-only reference implementations, independent of the library code.
#![allow(dead_code)]

use std::collections::BTreeSet;

use dynmatch::graph::Edge;
use dynmatch::ors::{OrderedMatchingInstance, ViolationKind};
use dynmatch::stream::{UpdateEvent, UpdateStream};
use rand::Rng;

pub fn e(a: usize, b: usize) -> Edge {
    Edge::new(a, b).unwrap()
}

/// Maximum matching size by exhaustive search over edges.
pub fn brute_force_mu(n: usize, edges: &[Edge]) -> usize {
    fn go(edges: &[Edge], used: &mut [bool]) -> usize {
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

/// Checks that `pairs` is a matching using only edges of `edges`.
pub fn is_matching_in(n: usize, pairs: &[Edge], edges: &[Edge]) -> bool {
    let set: BTreeSet<Edge> = edges.iter().copied().collect();
    let mut seen = vec![false; n];
    for p in pairs {
        let (a, b) = p.endpoints();
        if !set.contains(p) || seen[a] || seen[b] {
            return false;
        }
        seen[a] = true;
        seen[b] = true;
    }
    true
}

pub fn random_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Vec<Edge> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(p) {
                out.push(e(a, b));
            }
        }
    }
    out
}

/// Final edge set of a stream, replayed with set semantics.
pub fn replay(stream: &UpdateStream) -> BTreeSet<Edge> {
    let mut g = BTreeSet::new();
    for ev in &stream.events {
        match *ev {
            UpdateEvent::Insert(x) => {
                g.insert(x);
            }
            UpdateEvent::Delete(x) => {
                g.remove(&x);
            }
        }
    }
    g
}

/// Reference ORS/RS check. Scan order: ascending `i`; for each `M_i` first
/// an edge already used by an earlier matching, then the size, then the
/// smallest foreign edge inside `V(M_i)`. Foreign edges come from `M_1..M_i`
/// (ordered) or from every matching (`rs`). Returns kind and 1-based `(i, j)`.
pub fn brute_force_verify(inst: &OrderedMatchingInstance, rs: bool) -> Option<(ViolationKind, usize, usize)> {
    let ms: Vec<Vec<Edge>> = inst
        .matchings
        .iter()
        .map(|m| {
            let mut m = m.clone();
            m.sort_unstable();
            m
        })
        .collect();
    let t = ms.len();
    for i in 0..t {
        for x in &ms[i] {
            if let Some(j) = (0..i).find(|&j| ms[j].contains(x)) {
                return Some((ViolationKind::NotDisjoint, i + 1, j + 1));
            }
        }
        if ms[i].len() < inst.r {
            return Some((ViolationKind::TooSmall, i + 1, i + 1));
        }
        let mut verts = vec![false; inst.n];
        for x in &ms[i] {
            verts[x.u()] = true;
            verts[x.v()] = true;
        }
        let upto = if rs { t } else { i + 1 };
        let mut best: Option<(Edge, usize)> = None;
        for (j, mj) in ms.iter().enumerate().take(upto) {
            for x in mj {
                if ms[i].contains(x) || !(verts[x.u()] && verts[x.v()]) {
                    continue;
                }
                if best.is_none_or(|b| (*x, j) < b) {
                    best = Some((*x, j));
                }
            }
        }
        if let Some((_, j)) = best {
            return Some((ViolationKind::NotInduced, i + 1, j + 1));
        }
    }
    None
}

/// Random well-formed instance on `n ≤ 12` vertices. Vertices are drawn from
/// a small pool and edges are sometimes copied from earlier matchings, so
/// every violation kind shows up often.
pub fn random_instance<R: Rng>(rng: &mut R) -> OrderedMatchingInstance {
    let n = rng.random_range(2..=12);
    let r = rng.random_range(1..=2usize.min(n / 2));
    let t = rng.random_range(1..=4);
    let pool = rng.random_range(2..=n);
    let mut ms: Vec<Vec<Edge>> = Vec::new();
    for _ in 0..t {
        let size = rng.random_range(r.saturating_sub(1)..=r + 1).min(pool / 2);
        let mut used = vec![false; n];
        let mut m = Vec::new();
        if !ms.is_empty() && rng.random_bool(0.15) {
            let src = &ms[rng.random_range(0..ms.len())];
            if let Some(&x) = src.first() {
                used[x.u()] = true;
                used[x.v()] = true;
                m.push(x);
            }
        }
        let mut tries = 0;
        while m.len() < size && tries < 50 {
            tries += 1;
            let a = rng.random_range(0..pool);
            let b = rng.random_range(0..pool);
            if a != b && !used[a] && !used[b] {
                used[a] = true;
                used[b] = true;
                m.push(e(a, b));
            }
        }
        ms.push(m);
    }
    OrderedMatchingInstance::new(n, r, ms).unwrap()
}

/// Every matching on `n` vertices with at most `max_size` edges.
pub fn all_matchings(n: usize, max_size: usize) -> Vec<Vec<Edge>> {
    fn go(n: usize, start: usize, used: &mut Vec<bool>, cur: &mut Vec<Edge>, max: usize, out: &mut Vec<Vec<Edge>>) {
        out.push(cur.clone());
        if cur.len() == max {
            return;
        }
        let first = cur.last().map_or(0, |x| x.u());
        for a in first.max(start)..n {
            if used[a] {
                continue;
            }
            for b in a + 1..n {
                if used[b] {
                    continue;
                }
                let x = e(a, b);
                if cur.last().is_some_and(|l| x <= *l) {
                    continue;
                }
                used[a] = true;
                used[b] = true;
                cur.push(x);
                go(n, a, used, cur, max, out);
                cur.pop();
                used[a] = false;
                used[b] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(n, 0, &mut vec![false; n], &mut Vec::new(), max_size, &mut out);
    out
}

/// Library verdict reduced to what the reference checker reports.
pub fn library_verdict(inst: &OrderedMatchingInstance, rs: bool) -> Option<(ViolationKind, usize, usize)> {
    let v = if rs {
        dynmatch::ors::verify_rs(inst)
    } else {
        dynmatch::ors::verify_ors(inst)
    };
    v.unwrap().map(|v| (v.kind, v.i, v.j))
}
