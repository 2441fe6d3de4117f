use std::fmt;

use crate::error::{Error, Result};
use crate::graph::Edge;

const UNMATCHED: u32 = u32::MAX;

/// A set of vertex-disjoint edges with O(1) partner lookup.
#[derive(Clone, PartialEq, Eq)]
pub struct Matching {
    partner: Vec<u32>,
    size: usize,
}

impl Matching {
    pub fn new(n: usize) -> Matching {
        Matching {
            partner: vec![UNMATCHED; n],
            size: 0,
        }
    }

    /// Builds a matching from `edges`, failing if two edges share a vertex.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Matching> {
        let mut m = Matching::new(n);
        for e in edges {
            if e.v() >= n {
                return Err(Error::InvalidVertex { vertex: e.v(), n });
            }
            if !m.try_add(e) {
                return Err(Error::InvalidArgument(format!(
                    "edge {e:?} shares a vertex with an earlier edge"
                )));
            }
        }
        Ok(m)
    }

    /// Number of vertices in the universe.
    pub fn n(&self) -> usize {
        self.partner.len()
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    #[inline]
    pub fn partner(&self, v: usize) -> Option<usize> {
        match self.partner[v] {
            UNMATCHED => None,
            p => Some(p as usize),
        }
    }

    #[inline]
    pub fn is_matched(&self, v: usize) -> bool {
        self.partner[v] != UNMATCHED
    }

    #[inline]
    pub fn is_free(&self, v: usize) -> bool {
        self.partner[v] == UNMATCHED
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.partner(e.u()) == Some(e.v())
    }

    /// Adds `e` if both endpoints are free. Returns whether it was added.
    pub fn try_add(&mut self, e: Edge) -> bool {
        let (u, v) = e.endpoints();
        if self.is_matched(u) || self.is_matched(v) {
            return false;
        }
        self.partner[u] = v as u32;
        self.partner[v] = u as u32;
        self.size += 1;
        true
    }

    /// Removes `e` if it is a matching edge. Returns whether it was removed.
    pub fn remove(&mut self, e: Edge) -> bool {
        if !self.contains(e) {
            return false;
        }
        self.partner[e.u()] = UNMATCHED;
        self.partner[e.v()] = UNMATCHED;
        self.size -= 1;
        true
    }

    /// Unmatches `v` and its partner, returning the removed edge.
    pub fn unmatch_vertex(&mut self, v: usize) -> Option<Edge> {
        let p = self.partner(v)?;
        let e = Edge::new(v, p).expect("partner is never the vertex itself");
        self.remove(e);
        Some(e)
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.size);
        for (u, &p) in self.partner.iter().enumerate() {
            if p != UNMATCHED && u < p as usize {
                out.push(Edge::new(u, p as usize).expect("u < p"));
            }
        }
        out
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.partner
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != UNMATCHED)
            .map(|(u, _)| u)
    }

    pub fn free_vertices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.is_free(v)).collect()
    }

    pub fn clear(&mut self) {
        self.partner.fill(UNMATCHED);
        self.size = 0;
    }

    /// Flips an alternating path given as its vertex sequence
    /// `f0, x1, y1, ..., xk, yk, f1`, where each `(x_i, y_i)` is matched and
    /// both ends are free. Grows the matching by one.
    pub fn augment_along(&mut self, path: &[usize]) -> Result<()> {
        if path.len() < 2 || !path.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "augmenting path must have an even number of vertices, got {}",
                path.len()
            )));
        }
        let last = path.len() - 1;
        if self.is_matched(path[0]) || self.is_matched(path[last]) {
            return Err(Error::InvalidArgument("path ends must be free".into()));
        }
        for pair in path[1..last].chunks(2) {
            if self.partner(pair[0]) != Some(pair[1]) {
                return Err(Error::InvalidArgument(format!(
                    "({}, {}) is not a matching edge",
                    pair[0], pair[1]
                )));
            }
        }
        for pair in path.chunks(2) {
            self.partner[pair[0]] = pair[1] as u32;
            self.partner[pair[1]] = pair[0] as u32;
        }
        self.size += 1;
        Ok(())
    }

    /// Checks partner symmetry and the cached size.
    pub fn validate(&self) -> Result<()> {
        let mut matched = 0;
        for (u, &p) in self.partner.iter().enumerate() {
            if p == UNMATCHED {
                continue;
            }
            let p = p as usize;
            if p == u || p >= self.n() || self.partner[p] as usize != u {
                return Err(Error::Invariant(format!("partner table broken at {u}")));
            }
            matched += 1;
        }
        if matched != 2 * self.size {
            return Err(Error::Invariant(format!(
                "size {} but {matched} matched vertices",
                self.size
            )));
        }
        Ok(())
    }

    /// True when no edge of `edges` has both endpoints free.
    pub fn is_maximal_in(&self, edges: &[Edge]) -> bool {
        edges
            .iter()
            .all(|e| self.is_matched(e.u()) || self.is_matched(e.v()))
    }
}

impl fmt::Debug for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.edges()).finish()
    }
}
