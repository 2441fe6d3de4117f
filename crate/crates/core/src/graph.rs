//! Dynamic graph storage with both adjacency-matrix and adjacency-list
//! access, plus the three phase-scoped overlay graphs used by the engine.
//!
//! Every matrix probe and every adjacency-list element read bumps a counter
//! on the graph that served it. The counters are the machine-independent
//! work metric reported by the bench harness.

use std::cell::Cell;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest vertex count accepted by [`DynamicGraph::new`]. The packed matrix
/// alone takes n² bits, so 20000 vertices is ~50 MB per graph.
pub const MAX_VERTICES: usize = 20_000;

/// An undirected edge stored with `u < v`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "(u32, u32)", try_from = "(u32, u32)")]
pub struct Edge {
    u: u32,
    v: u32,
}

impl Edge {
    /// Builds the canonical edge between `a` and `b`; rejects self-loops.
    pub fn new(a: usize, b: usize) -> Result<Edge> {
        if a == b {
            return Err(Error::InvalidEdge(a, b));
        }
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        if v > u32::MAX as usize {
            return Err(Error::InvalidVertex {
                vertex: v,
                n: u32::MAX as usize,
            });
        }
        Ok(Edge {
            u: u as u32,
            v: v as u32,
        })
    }

    /// Smaller endpoint.
    #[inline]
    pub fn u(self) -> usize {
        self.u as usize
    }

    /// Larger endpoint.
    #[inline]
    pub fn v(self) -> usize {
        self.v as usize
    }

    #[inline]
    pub fn endpoints(self) -> (usize, usize) {
        (self.u as usize, self.v as usize)
    }

    /// The endpoint that is not `w`. `w` must be an endpoint.
    #[inline]
    pub fn other(self, w: usize) -> usize {
        debug_assert!(w == self.u() || w == self.v());
        if w == self.u() {
            self.v()
        } else {
            self.u()
        }
    }

    pub fn touches(self, w: usize) -> bool {
        w == self.u() || w == self.v()
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u, self.v)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.u, self.v)
    }
}

impl From<Edge> for (u32, u32) {
    fn from(e: Edge) -> Self {
        (e.u, e.v)
    }
}

impl TryFrom<(u32, u32)> for Edge {
    type Error = Error;

    fn try_from((a, b): (u32, u32)) -> Result<Edge> {
        Edge::new(a as usize, b as usize)
    }
}

/// Read access to an adjacency matrix. Each call to [`probe`] is one unit of
/// matrix work.
///
/// [`probe`]: MatrixAccess::probe
pub trait MatrixAccess {
    fn vertex_count(&self) -> usize;

    /// Membership of `{u, v}`. Callers guarantee `u != v` and both `< n`.
    fn probe(&self, u: usize, v: usize) -> bool;
}

/// Fully dynamic graph on a fixed vertex set `[0, n)`.
///
/// The dense matrix is packed bits, symmetric, with no diagonal bits. The
/// adjacency lists are ordered sets so iteration is by ascending vertex id.
pub struct DynamicGraph {
    n: usize,
    bits: Vec<u64>,
    adjacency: Vec<BTreeSet<u32>>,
    edge_count: usize,
    matrix_probes: Cell<u64>,
    list_reads: Cell<u64>,
}

impl DynamicGraph {
    pub fn new(n: usize) -> Result<DynamicGraph> {
        if n > MAX_VERTICES {
            return Err(Error::Config(format!(
                "n = {n} exceeds the supported maximum of {MAX_VERTICES} vertices"
            )));
        }
        let words = (n * n).div_ceil(64);
        Ok(DynamicGraph {
            n,
            bits: vec![0; words],
            adjacency: vec![BTreeSet::new(); n],
            edge_count: 0,
            matrix_probes: Cell::new(0),
            list_reads: Cell::new(0),
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.edge_count == 0
    }

    #[inline]
    fn bit_index(&self, u: usize, v: usize) -> usize {
        u * self.n + v
    }

    #[inline]
    fn get_bit(&self, u: usize, v: usize) -> bool {
        let i = self.bit_index(u, v);
        (self.bits[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    fn set_bit(&mut self, u: usize, v: usize, on: bool) {
        let i = self.bit_index(u, v);
        let mask = 1u64 << (i & 63);
        if on {
            self.bits[i >> 6] |= mask;
        } else {
            self.bits[i >> 6] &= !mask;
        }
    }

    fn check_vertex(&self, w: usize) -> Result<()> {
        if w >= self.n {
            Err(Error::InvalidVertex {
                vertex: w,
                n: self.n,
            })
        } else {
            Ok(())
        }
    }

    fn check_edge(&self, e: Edge) -> Result<()> {
        self.check_vertex(e.v())
    }

    /// Inserts `e`. Returns whether the graph changed; inserting a present
    /// edge is a no-op.
    pub fn insert(&mut self, e: Edge) -> Result<bool> {
        self.check_edge(e)?;
        let (u, v) = e.endpoints();
        if self.get_bit(u, v) {
            return Ok(false);
        }
        self.set_bit(u, v, true);
        self.set_bit(v, u, true);
        self.adjacency[u].insert(v as u32);
        self.adjacency[v].insert(u as u32);
        self.edge_count += 1;
        Ok(true)
    }

    /// Deletes `e` if present. Returns whether the graph changed.
    pub fn delete(&mut self, e: Edge) -> Result<bool> {
        self.check_edge(e)?;
        let (u, v) = e.endpoints();
        if !self.get_bit(u, v) {
            return Ok(false);
        }
        self.set_bit(u, v, false);
        self.set_bit(v, u, false);
        self.adjacency[u].remove(&(v as u32));
        self.adjacency[v].remove(&(u as u32));
        self.edge_count -= 1;
        Ok(true)
    }

    /// Counted matrix membership query with range checks.
    pub fn has_edge(&self, u: usize, v: usize) -> Result<bool> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::InvalidEdge(u, v));
        }
        Ok(self.probe(u, v))
    }

    /// Uncounted membership, for invariant checks and diagnostics that are
    /// not part of the algorithm's work.
    pub fn contains(&self, e: Edge) -> bool {
        e.v() < self.n && self.get_bit(e.u(), e.v())
    }

    /// Neighbors of `u` in ascending order. Each element read counts as one
    /// list read.
    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[u].iter().map(move |&w| {
            self.list_reads.set(self.list_reads.get() + 1);
            w as usize
        })
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    /// All edges in lexicographic order, read through the adjacency lists.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.edge_count);
        for u in 0..self.n {
            for w in self.adjacency[u].range((u as u32 + 1)..) {
                out.push(Edge {
                    u: u as u32,
                    v: *w,
                });
            }
        }
        self.list_reads
            .set(self.list_reads.get() + out.len() as u64);
        out
    }

    /// Edge snapshot without touching the counters.
    pub fn edge_snapshot(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.edge_count);
        for u in 0..self.n {
            for w in self.adjacency[u].range((u as u32 + 1)..) {
                out.push(Edge {
                    u: u as u32,
                    v: *w,
                });
            }
        }
        out
    }

    /// Removes every edge in time proportional to the edge count.
    pub fn clear(&mut self) {
        for u in 0..self.n {
            let row = std::mem::take(&mut self.adjacency[u]);
            for w in row {
                self.set_bit(u, w as usize, false);
            }
        }
        self.edge_count = 0;
    }

    pub fn matrix_probes(&self) -> u64 {
        self.matrix_probes.get()
    }

    pub fn list_reads(&self) -> u64 {
        self.list_reads.get()
    }

    /// Exhaustive matrix/list coherence check. Quadratic; test use only.
    pub fn check_coherence(&self) -> Result<()> {
        let mut count = 0;
        for u in 0..self.n {
            if self.get_bit(u, u) {
                return Err(Error::Invariant(format!("self-loop bit set at {u}")));
            }
            for v in 0..self.n {
                let bit = self.get_bit(u, v);
                if bit != self.get_bit(v, u) {
                    return Err(Error::Invariant(format!("asymmetric bit at ({u}, {v})")));
                }
                if bit != self.adjacency[u].contains(&(v as u32)) {
                    return Err(Error::Invariant(format!(
                        "matrix and list disagree at ({u}, {v})"
                    )));
                }
                if bit && u < v {
                    count += 1;
                }
            }
        }
        if count != self.edge_count {
            return Err(Error::Invariant(format!(
                "edge count {} but {} edges present",
                self.edge_count, count
            )));
        }
        Ok(())
    }
}

impl MatrixAccess for DynamicGraph {
    fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    fn probe(&self, u: usize, v: usize) -> bool {
        debug_assert!(u != v && u < self.n && v < self.n);
        self.matrix_probes.set(self.matrix_probes.get() + 1);
        self.get_bit(u, v)
    }
}

impl fmt::Debug for DynamicGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DynamicGraph")
            .field("n", &self.n)
            .field("edges", &self.edge_count)
            .field("matrix_probes", &self.matrix_probes.get())
            .field("list_reads", &self.list_reads.get())
            .finish()
    }
}

/// Matrix view of `base − minus`. Every probe costs one probe on each graph.
pub struct DifferenceView<'a> {
    base: &'a DynamicGraph,
    minus: &'a DynamicGraph,
}

impl<'a> DifferenceView<'a> {
    pub fn new(base: &'a DynamicGraph, minus: &'a DynamicGraph) -> Result<Self> {
        if base.n() != minus.n() {
            return Err(Error::InvalidArgument(format!(
                "vertex counts differ: {} vs {}",
                base.n(),
                minus.n()
            )));
        }
        Ok(DifferenceView { base, minus })
    }
}

impl MatrixAccess for DifferenceView<'_> {
    fn vertex_count(&self) -> usize {
        self.base.n()
    }

    #[inline]
    fn probe(&self, u: usize, v: usize) -> bool {
        let in_base = self.base.probe(u, v);
        let in_minus = self.minus.probe(u, v);
        in_base && !in_minus
    }
}

/// `base.has_edge(u, v) && !minus.has_edge(u, v)` at the cost of exactly two
/// matrix probes.
pub fn difference_matrix_probe(
    base: &DynamicGraph,
    minus: &DynamicGraph,
    u: usize,
    v: usize,
) -> Result<bool> {
    if base.n() != minus.n() {
        return Err(Error::InvalidArgument(
            "difference probe over graphs of different size".into(),
        ));
    }
    let in_base = base.has_edge(u, v)?;
    let in_minus = minus.has_edge(u, v)?;
    Ok(in_base && !in_minus)
}

/// Edge list of `(g_add ∪ h_cert) − g_del`, sorted and deduplicated, read
/// purely through adjacency lists.
pub fn materialize_sparse(
    g_add: &DynamicGraph,
    h_cert: &DynamicGraph,
    g_del: &DynamicGraph,
) -> Vec<Edge> {
    let mut set: BTreeSet<Edge> = g_add.edges().into_iter().collect();
    set.extend(h_cert.edges());
    for e in g_del.edges() {
        set.remove(&e);
    }
    set.into_iter().collect()
}

/// The phase-scoped overlays `G_add`, `G_del` and `H_cert`.
#[derive(Debug)]
pub struct OverlaySet {
    pub g_add: DynamicGraph,
    pub g_del: DynamicGraph,
    pub h_cert: DynamicGraph,
}

impl OverlaySet {
    pub fn new(n: usize) -> Result<OverlaySet> {
        Ok(OverlaySet {
            g_add: DynamicGraph::new(n)?,
            g_del: DynamicGraph::new(n)?,
            h_cert: DynamicGraph::new(n)?,
        })
    }

    pub fn clear(&mut self) {
        self.g_add.clear();
        self.g_del.clear();
        self.h_cert.clear();
    }

    pub fn is_empty(&self) -> bool {
        self.g_add.is_empty() && self.g_del.is_empty() && self.h_cert.is_empty()
    }

    pub fn sparse_edges(&self) -> Vec<Edge> {
        materialize_sparse(&self.g_add, &self.h_cert, &self.g_del)
    }

    pub fn matrix_probes(&self) -> u64 {
        self.g_add.matrix_probes() + self.g_del.matrix_probes() + self.h_cert.matrix_probes()
    }

    pub fn list_reads(&self) -> u64 {
        self.g_add.list_reads() + self.g_del.list_reads() + self.h_cert.list_reads()
    }
}
