//! Static solvers over a split graph: adjacency-matrix access to a dense
//! part and adjacency-list access to a sparse part.
//!
//! [`random_sampling`] is the budget-doubling sampler, [`solve_induced`] the
//! induced-subgraph solver that tries the sparse side greedily before paying
//! for sampling, and [`degree_proxy_of`] the closed-form degree bound used to
//! rank certificate candidates.

use std::cell::Cell;
use std::collections::HashSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Edge, MatrixAccess};
use crate::matching::Matching;

/// Maximal matching of `edges` taken greedily in the given order.
pub fn greedy_matching(n: usize, edges: &[Edge]) -> Matching {
    let mut m = Matching::new(n);
    for &e in edges {
        m.try_add(e);
    }
    m
}

/// Adjacency-list view of the sparse edge set, with a read counter.
#[derive(Debug)]
pub struct SparseIndex {
    n: usize,
    adjacency: Vec<Vec<u32>>,
    members: HashSet<Edge>,
    reads: Cell<u64>,
}

impl SparseIndex {
    pub fn new(n: usize, edges: &[Edge]) -> Result<SparseIndex> {
        let mut adjacency = vec![Vec::new(); n];
        let mut members = HashSet::with_capacity(edges.len());
        for &e in edges {
            if e.v() >= n {
                return Err(Error::InvalidVertex { vertex: e.v(), n });
            }
            if members.insert(e) {
                adjacency[e.u()].push(e.v() as u32);
                adjacency[e.v()].push(e.u() as u32);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(SparseIndex {
            n,
            adjacency,
            members,
            reads: Cell::new(0),
        })
    }

    pub fn empty(n: usize) -> SparseIndex {
        SparseIndex::new(n, &[]).expect("empty edge list is always valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.members.contains(&e)
    }

    /// Neighbors of `u` in ascending order, counted as list reads.
    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.reads
            .set(self.reads.get() + self.adjacency[u].len() as u64);
        self.adjacency[u].iter().map(|&w| w as usize)
    }

    pub fn list_reads(&self) -> u64 {
        self.reads.get()
    }

    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self.members.iter().copied().collect();
        out.sort_unstable();
        out
    }
}

/// Greedy maximal matching of `sparse[U]`. Vertices of `u_set` are scanned
/// in the given order, each against its neighbors in ascending order, so the
/// caller's ordering decides who gets priority.
pub fn greedy_on_subset(sparse: &SparseIndex, u_set: &[usize], in_set: &[bool]) -> Matching {
    let mut m = Matching::new(sparse.n());
    for &u in u_set {
        if m.is_matched(u) {
            continue;
        }
        for w in sparse.neighbors(u) {
            if in_set[w] && m.is_free(w) {
                m.try_add(Edge::new(u, w).expect("sparse index holds no self-loops"));
                break;
            }
        }
    }
    m
}

/// Outcome of one [`random_sampling`] run.
#[derive(Debug, Clone)]
pub struct SamplingResult {
    /// The returned per-iteration matching `M_i`.
    pub matching: Matching,
    /// Index `i` (1-based) of the iteration that produced `matching`; 0 when
    /// `U` was empty.
    pub return_iteration: usize,
    /// Union of all per-iteration matchings built before returning.
    pub union: Matching,
    /// Whether the run reached an iteration whose budget covered all of `U'`
    /// (a deterministic scan).
    pub reached_full_scan: bool,
    pub iterations_run: usize,
}

/// Number of sampling iterations for parameter `delta`: `⌈1/(2δ)⌉`.
pub fn sampling_iterations(delta: f64) -> usize {
    ((1.0 / (2.0 * delta)) - 1e-9).ceil().max(1.0) as usize
}

/// Per-vertex budget of iteration `i` (1-based): `min(⌈n^{2δi}⌉, cap)`. The
/// last iteration always gets the full cap, so the run ends with a scan of
/// everything left.
pub fn sampling_budget(n: usize, delta: f64, i: usize, cap: usize) -> usize {
    if i >= sampling_iterations(delta) {
        return cap;
    }
    let raw = (n as f64).powf(2.0 * delta * i as f64).ceil();
    if !raw.is_finite() || raw >= cap as f64 {
        cap
    } else {
        (raw as usize).max(1)
    }
}

/// Budget-doubling random sampling on `dense[U]`.
///
/// Each round visits the vertices still in `U'` in the caller's order; a
/// visited vertex samples `b` vertices uniformly (with replacement) from
/// `U'` as it stood at the start of the round and matches the first
/// available neighbor found. When the budget reaches `|U'|` the round scans
/// `U'` deterministically instead. The first round whose matching reaches
/// `δ²n` is returned; otherwise the largest round's matching.
pub fn random_sampling<M, R>(dense: &M, u_set: &[usize], delta: f64, rng: &mut R) -> SamplingResult
where
    M: MatrixAccess + ?Sized,
    R: Rng + ?Sized,
{
    let n = dense.vertex_count();
    if u_set.is_empty() {
        return SamplingResult {
            matching: Matching::new(n),
            return_iteration: 0,
            union: Matching::new(n),
            reached_full_scan: false,
            iterations_run: 0,
        };
    }
    let target = delta * delta * n as f64;
    let iterations = sampling_iterations(delta);
    let mut available = vec![false; n];
    for &v in u_set {
        available[v] = true;
    }
    let mut remaining: Vec<usize> = u_set.to_vec();
    let mut union = Matching::new(n);
    let mut best: Option<(Matching, usize)> = None;
    let mut reached_full_scan = false;
    let mut iterations_run = 0;

    for i in 1..=iterations {
        if remaining.is_empty() {
            break;
        }
        iterations_run = i;
        let budget = sampling_budget(n, delta, i, remaining.len());
        let full_scan = budget >= remaining.len();
        reached_full_scan |= full_scan;
        let mut round = Matching::new(n);
        for idx in 0..remaining.len() {
            let v = remaining[idx];
            if !available[v] {
                continue;
            }
            let mut found = None;
            if full_scan {
                // Earlier vertices are either matched or already probed v.
                for &u in &remaining[idx + 1..] {
                    if available[u] && dense.probe(v, u) {
                        found = Some(u);
                        break;
                    }
                }
            } else {
                for _ in 0..budget {
                    let u = remaining[rng.random_range(0..remaining.len())];
                    if u != v && available[u] && dense.probe(v, u) {
                        found = Some(u);
                        break;
                    }
                }
            }
            if let Some(u) = found {
                let e = Edge::new(u, v).expect("u != v");
                round.try_add(e);
                union.try_add(e);
                available[u] = false;
                available[v] = false;
            }
        }
        remaining.retain(|&v| available[v]);

        let size = round.len();
        if size as f64 >= target {
            return SamplingResult {
                matching: round,
                return_iteration: i,
                union,
                reached_full_scan,
                iterations_run,
            };
        }
        if best.as_ref().is_none_or(|(m, _)| size > m.len()) {
            best = Some((round, i));
        }
    }

    let (matching, return_iteration) = best.unwrap_or_else(|| (Matching::new(n), iterations_run));
    SamplingResult {
        matching,
        return_iteration,
        union,
        reached_full_scan,
        iterations_run,
    }
}

/// Degree bound `max(1, n^{1−2δ(i−2)}·ln n)` for a matching returned by
/// sampling round `i`.
pub fn degree_proxy_of(return_iteration: usize, delta: f64, n: usize) -> Result<f64> {
    if return_iteration < 1 {
        return Err(Error::InvalidArgument(format!(
            "return iteration must be at least 1, got {return_iteration}"
        )));
    }
    let nf = n as f64;
    let exponent = 1.0 - 2.0 * delta * (return_iteration as f64 - 2.0);
    let value = nf.powf(exponent) * nf.ln();
    Ok(if value.is_nan() { 1.0 } else { value.max(1.0) })
}

/// Matching produced by the sampling branch of [`solve_induced`], offered as
/// a certificate candidate.
#[derive(Debug, Clone)]
pub struct CertificateCandidate {
    pub matching: Matching,
    pub degree_proxy: f64,
    pub return_iteration: usize,
    /// Size of the greedy sparse matching that fell short of the threshold.
    pub greedy_size: usize,
    pub delta: f64,
}

#[derive(Debug, Clone)]
pub struct InducedOutcome {
    pub matching: Matching,
    pub candidate: Option<CertificateCandidate>,
    /// The call proved `G[U]` has no edges: the sparse greedy pass found
    /// nothing and sampling reached its full scan without a match.
    pub exhausted: bool,
}

/// Whether a greedy sparse matching of `size` edges is large enough to skip
/// sampling: `size ≥ δ²n/8`.
pub fn greedy_suffices(size: usize, delta: f64, n: usize) -> bool {
    size as f64 >= delta * delta * n as f64 / 8.0
}

/// Solves `G[U]`: greedy on the sparse side first, sampling on the dense side
/// when the greedy matching is below `δ²n/8`.
pub fn solve_induced<M, R>(
    dense: &M,
    sparse: &SparseIndex,
    u_set: &[usize],
    delta: f64,
    rng: &mut R,
) -> InducedOutcome
where
    M: MatrixAccess + ?Sized,
    R: Rng + ?Sized,
{
    let n = dense.vertex_count();
    if u_set.is_empty() {
        return InducedOutcome {
            matching: Matching::new(n),
            candidate: None,
            exhausted: true,
        };
    }
    let mut in_set = vec![false; n];
    for &v in u_set {
        in_set[v] = true;
    }
    let greedy = greedy_on_subset(sparse, u_set, &in_set);
    if greedy_suffices(greedy.len(), delta, n) {
        return InducedOutcome {
            matching: greedy,
            candidate: None,
            exhausted: false,
        };
    }
    let sampled = random_sampling(dense, u_set, delta, rng);
    let exhausted = greedy.is_empty() && sampled.union.is_empty() && sampled.reached_full_scan;
    let iteration = sampled.return_iteration.max(1);
    let candidate = CertificateCandidate {
        matching: sampled.matching.clone(),
        degree_proxy: degree_proxy_of(iteration, delta, n).expect("iteration is at least 1"),
        return_iteration: iteration,
        greedy_size: greedy.len(),
        delta,
    };
    InducedOutcome {
        matching: sampled.matching,
        candidate: Some(candidate),
        exhausted,
    }
}
