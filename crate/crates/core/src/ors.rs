//! Ordered and plain Ruzsa–Szemerédi instances: verification, a greedy
//! randomized packer, overlap diagnostics, and workload generators.
//!
//! Matchings are numbered from 1 in violations and in the file format.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Edge;
use crate::stream::UpdateStream;

/// An ordered list of edge-disjoint matchings `M_1, …, M_t` on `[0, n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderedMatchingInstance {
    pub n: usize,
    pub r: usize,
    /// Each matching's edges, sorted.
    pub matchings: Vec<Vec<Edge>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    NotInduced,
    NotDisjoint,
    TooSmall,
}

/// First failing check. `i` is the matching being checked; `j` is the
/// matching that owns `witness` (equal to `i` for `TooSmall`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrsViolation {
    pub kind: ViolationKind,
    pub i: usize,
    pub j: usize,
    pub witness: Option<Edge>,
}

impl OrderedMatchingInstance {
    /// Sorts each matching and checks that it is a matching over `[0, n)`.
    pub fn new(n: usize, r: usize, matchings: Vec<Vec<Edge>>) -> Result<Self> {
        let mut inst = OrderedMatchingInstance { n, r, matchings };
        for m in &mut inst.matchings {
            m.sort_unstable();
        }
        inst.check_well_formed()?;
        Ok(inst)
    }

    pub fn t(&self) -> usize {
        self.matchings.len()
    }

    pub fn check_well_formed(&self) -> Result<()> {
        let mut seen = vec![usize::MAX; self.n];
        for (idx, m) in self.matchings.iter().enumerate() {
            for e in m {
                for x in [e.u(), e.v()] {
                    if x >= self.n {
                        return Err(Error::MalformedInstance(format!(
                            "matching {} uses vertex {x} outside [0, {})",
                            idx + 1,
                            self.n
                        )));
                    }
                    if seen[x] == idx {
                        return Err(Error::MalformedInstance(format!(
                            "matching {} covers vertex {x} twice",
                            idx + 1
                        )));
                    }
                    seen[x] = idx;
                }
            }
        }
        Ok(())
    }

    /// Every edge of the instance, in matching order.
    pub fn all_edges(&self) -> Vec<Edge> {
        self.matchings.iter().flatten().copied().collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let parse_err = |line: usize, message: String| Error::Parse { line, message };
        let nums = |line: usize, l: &str, want: usize| -> Result<Vec<usize>> {
            let v: std::result::Result<Vec<usize>, _> = l.split_whitespace().map(str::parse).collect();
            match v {
                Ok(v) if v.len() == want => Ok(v),
                _ => Err(parse_err(line, format!("expected {want} integers, got `{l}`"))),
            }
        };
        let (line, header) = lines.next().ok_or_else(|| parse_err(1, "missing `n r t` header".into()))?;
        let h = nums(line, header, 3)?;
        let (n, r, t) = (h[0], h[1], h[2]);
        let mut matchings = Vec::with_capacity(t);
        for expected in 1..=t {
            let (line, l) = lines
                .next()
                .ok_or_else(|| parse_err(line, format!("missing block for matching {expected}")))?;
            let mut parts = l.split_whitespace();
            if parts.next() != Some("matching") {
                return Err(parse_err(line, format!("expected `matching {expected} <size>`")));
            }
            let rest: Vec<&str> = parts.collect();
            let hv = nums(line, &rest.join(" "), 2)?;
            if hv[0] != expected {
                return Err(parse_err(line, format!("expected matching {expected}, found {}", hv[0])));
            }
            let mut m = Vec::with_capacity(hv[1]);
            for _ in 0..hv[1] {
                let (line, l) = lines
                    .next()
                    .ok_or_else(|| parse_err(line, format!("matching {expected} ends early")))?;
                let p = nums(line, l, 2)?;
                m.push(Edge::new(p[0], p[1]).map_err(|e| parse_err(line, e.to_string()))?);
            }
            matchings.push(m);
        }
        if let Some((line, l)) = lines.next() {
            return Err(parse_err(line, format!("unexpected trailing content `{l}`")));
        }
        OrderedMatchingInstance::new(n, r, matchings)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.n, self.r, self.t());
        for (i, m) in self.matchings.iter().enumerate() {
            let _ = writeln!(s, "matching {} {}", i + 1, m.len());
            for e in m {
                let _ = writeln!(s, "{} {}", e.u(), e.v());
            }
        }
        s
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(std::fs::write(path, self.to_text())?)
    }
}

/// Checks that each `M_i` is induced in `M_1 ∪ … ∪ M_i`.
pub fn verify_ors(inst: &OrderedMatchingInstance) -> Result<Option<OrsViolation>> {
    verify(inst, false)
}

/// Checks that each `M_i` is induced in the union of all matchings.
pub fn verify_rs(inst: &OrderedMatchingInstance) -> Result<Option<OrsViolation>> {
    verify(inst, true)
}

fn verify(inst: &OrderedMatchingInstance, against_all: bool) -> Result<Option<OrsViolation>> {
    inst.check_well_formed()?;
    let n = inst.n;
    let mut owner: HashMap<Edge, usize> = HashMap::new();
    let mut sorted: Vec<Vec<Edge>> = inst.matchings.clone();
    for m in &mut sorted {
        m.sort_unstable();
    }
    // Disjointness and size problems are reported at the first matching
    // where they show up.
    let mut early: Vec<Option<OrsViolation>> = vec![None; sorted.len()];
    for (idx, m) in sorted.iter().enumerate() {
        for &e in m {
            if let Some(&j) = owner.get(&e) {
                early[idx] = Some(OrsViolation {
                    kind: ViolationKind::NotDisjoint,
                    i: idx + 1,
                    j: j + 1,
                    witness: Some(e),
                });
                break;
            }
        }
        for &e in m {
            owner.entry(e).or_insert(idx);
        }
        if early[idx].is_none() && m.len() < inst.r {
            early[idx] = Some(OrsViolation {
                kind: ViolationKind::TooSmall,
                i: idx + 1,
                j: idx + 1,
                witness: None,
            });
        }
    }

    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let add = |adj: &mut Vec<Vec<(usize, usize)>>, idx: usize, m: &[Edge]| {
        for e in m {
            adj[e.u()].push((e.v(), idx));
            adj[e.v()].push((e.u(), idx));
        }
    };
    if against_all {
        for (idx, m) in sorted.iter().enumerate() {
            add(&mut adj, idx, m);
        }
    }
    let mut in_set = vec![false; n];
    for (idx, m) in sorted.iter().enumerate() {
        if let Some(v) = early[idx] {
            return Ok(Some(v));
        }
        if !against_all {
            add(&mut adj, idx, m);
        }
        for e in m {
            in_set[e.u()] = true;
            in_set[e.v()] = true;
        }
        let own: HashSet<Edge> = m.iter().copied().collect();
        let mut worst: Option<(Edge, usize)> = None;
        for e in m {
            for x in [e.u(), e.v()] {
                for &(y, j) in &adj[x] {
                    if !in_set[y] {
                        continue;
                    }
                    let f = Edge::new(x, y).expect("adjacency has no loops");
                    // A copy of an own edge is the same edge of the union
                    // graph; the disjointness check owns that case.
                    if own.contains(&f) {
                        continue;
                    }
                    if worst.is_none_or(|(w, _)| f < w) {
                        worst = Some((f, j));
                    }
                }
            }
        }
        for e in m {
            in_set[e.u()] = false;
            in_set[e.v()] = false;
        }
        if let Some((f, j)) = worst {
            return Ok(Some(OrsViolation {
                kind: ViolationKind::NotInduced,
                i: idx + 1,
                j: j + 1,
                witness: Some(f),
            }));
        }
    }
    Ok(None)
}

/// `max_{i≠j} |V(M_i) ∩ V(M_j)|`, or 0 with fewer than two matchings.
pub fn pairwise_overlap_max(inst: &OrderedMatchingInstance) -> usize {
    let sets: Vec<HashSet<usize>> = inst
        .matchings
        .iter()
        .map(|m| m.iter().flat_map(|e| [e.u(), e.v()]).collect())
        .collect();
    let mut best = 0;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            best = best.max(sets[i].intersection(&sets[j]).count());
        }
    }
    best
}

/// Appends random size-`r` matchings while the instance stays a valid
/// ordered instance, stopping after `attempts` consecutive rejections.
pub fn greedy_ors_pack<R: Rng + ?Sized>(n: usize, r: usize, attempts: usize, rng: &mut R) -> Result<OrderedMatchingInstance> {
    if 2 * r > n {
        return Err(Error::InvalidArgument(format!("2r = {} exceeds n = {n}", 2 * r)));
    }
    if r == 0 {
        return Err(Error::InvalidArgument("r must be positive".into()));
    }
    let mut used: HashSet<Edge> = HashSet::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut matchings = Vec::new();
    let mut in_set = vec![false; n];
    let mut misses = 0;
    while misses < attempts {
        let mut verts: Vec<usize> = index::sample(rng, n, 2 * r).into_vec();
        verts.shuffle(rng);
        let mut m: Vec<Edge> = verts
            .chunks(2)
            .map(|p| Edge::new(p[0], p[1]).expect("sampled vertices are distinct"))
            .collect();
        m.sort_unstable();
        for &v in &verts {
            in_set[v] = true;
        }
        let ok = m.iter().all(|e| !used.contains(e))
            && verts.iter().all(|&x| adj[x].iter().all(|&y| !in_set[y]));
        for &v in &verts {
            in_set[v] = false;
        }
        if !ok {
            misses += 1;
            continue;
        }
        misses = 0;
        for &e in &m {
            used.insert(e);
            adj[e.u()].push(e.v());
            adj[e.v()].push(e.u());
        }
        matchings.push(m);
    }
    OrderedMatchingInstance::new(n, r, matchings)
}

/// A hard stream plus the event counts at which each loop iteration ends
/// (`boundaries`) and at which `V_S` has just been cleared (`cleared`).
#[derive(Debug, Clone)]
pub struct HardSequence {
    pub stream: UpdateStream,
    /// Number of ORS vertices `m`; singletons are `m..m + s`.
    pub m: usize,
    pub s: usize,
    pub boundaries: Vec<usize>,
    pub cleared: Vec<usize>,
}

impl HardSequence {
    /// Implied `ε = r / m`.
    pub fn epsilon(r: usize, m: usize) -> f64 {
        r as f64 / m as f64
    }
}

/// Builds the adversarial sequence for an instance whose matchings all have
/// exactly `r` edges. Singletons are `s = m − 2r` extra vertices.
///
/// The ORS edges go in first. Then for `i = t, …, 1`: every edge at a
/// singleton is deleted, `M_{i+1}` is deleted, and a perfect matching between
/// the singletons and the ORS vertices that `M_i` leaves free is inserted, so
/// the graph has a perfect matching that must use `M_i`.
pub fn hard_sequence_gen(inst: &OrderedMatchingInstance) -> Result<HardSequence> {
    inst.check_well_formed()?;
    if let Some(v) = verify_ors(inst)? {
        return Err(Error::MalformedInstance(format!("instance is not a valid ordered instance: {v:?}")));
    }
    let (m, r) = (inst.n, inst.r);
    if r == 0 || 2 * r > m || inst.matchings.iter().any(|x| x.len() != r) {
        return Err(Error::MalformedInstance(format!(
            "every matching needs exactly r = {r} edges with 2r ≤ m = {m}"
        )));
    }
    let s = m - 2 * r;
    let mut stream = UpdateStream::new(m + s);
    for e in inst.all_edges() {
        stream.push_insert(e);
    }
    let mut vs_edges: Vec<Edge> = Vec::new();
    let mut boundaries = Vec::new();
    let mut cleared = Vec::new();
    for i in (0..inst.t()).rev() {
        for e in vs_edges.drain(..) {
            stream.push_delete(e);
        }
        cleared.push(stream.len());
        if i + 1 < inst.t() {
            for &e in &inst.matchings[i + 1] {
                stream.push_delete(e);
            }
        }
        let mut covered = vec![false; m];
        for e in &inst.matchings[i] {
            covered[e.u()] = true;
            covered[e.v()] = true;
        }
        let free = (0..m).filter(|&x| !covered[x]);
        for (k, x) in free.enumerate() {
            let e = Edge::new(x, m + k).expect("singletons lie above the ORS vertices");
            stream.push_insert(e);
            vs_edges.push(e);
        }
        boundaries.push(stream.len());
    }
    Ok(HardSequence {
        stream,
        m,
        s,
        boundaries,
        cleared,
    })
}

/// Live edge set with O(1) uniform removal.
struct EdgePool {
    edges: Vec<Edge>,
    pos: HashMap<Edge, usize>,
}

impl EdgePool {
    fn new() -> Self {
        EdgePool {
            edges: Vec::new(),
            pos: HashMap::new(),
        }
    }

    fn len(&self) -> usize {
        self.edges.len()
    }

    fn contains(&self, e: Edge) -> bool {
        self.pos.contains_key(&e)
    }

    fn insert(&mut self, e: Edge) {
        self.pos.insert(e, self.edges.len());
        self.edges.push(e);
    }

    fn remove_at(&mut self, idx: usize) -> Edge {
        let e = self.edges.swap_remove(idx);
        self.pos.remove(&e);
        if idx < self.edges.len() {
            self.pos.insert(self.edges[idx], idx);
        }
        e
    }
}

fn random_absent_edge<R: Rng + ?Sized>(n: usize, pool: &EdgePool, rng: &mut R, allowed: impl Fn(Edge) -> bool) -> Edge {
    loop {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if let Ok(e) = Edge::new(a, b) {
            if allowed(e) && !pool.contains(e) {
                return e;
            }
        }
    }
}

/// Each step inserts a uniformly random absent edge with probability
/// `insert_bias` and otherwise deletes a uniformly random present edge.
/// Forced choices happen on the empty and complete graphs.
pub fn random_stream_gen<R: Rng + ?Sized>(n: usize, steps: usize, insert_bias: f64, rng: &mut R) -> Result<UpdateStream> {
    restricted_stream(n, steps, insert_bias, rng, n * n.saturating_sub(1) / 2, |_| true)
}

/// Random stream whose edges all touch one of the first `hubs` vertices, so
/// the maximum matching never exceeds `hubs`.
pub fn hub_stream_gen<R: Rng + ?Sized>(
    n: usize,
    hubs: usize,
    steps: usize,
    insert_bias: f64,
    rng: &mut R,
) -> Result<UpdateStream> {
    if hubs > n {
        return Err(Error::InvalidArgument(format!("hubs = {hubs} exceeds n = {n}")));
    }
    let capacity = hubs * (hubs.saturating_sub(1)) / 2 + hubs * (n - hubs);
    restricted_stream(n, steps, insert_bias, rng, capacity, |e| e.u() < hubs)
}

fn restricted_stream<R: Rng + ?Sized>(
    n: usize,
    steps: usize,
    insert_bias: f64,
    rng: &mut R,
    capacity: usize,
    allowed: impl Fn(Edge) -> bool,
) -> Result<UpdateStream> {
    if !(0.0..=1.0).contains(&insert_bias) {
        return Err(Error::InvalidArgument(format!("insert bias {insert_bias} outside [0, 1]")));
    }
    let mut stream = UpdateStream::new(n);
    if capacity == 0 {
        return Ok(stream);
    }
    let mut pool = EdgePool::new();
    for _ in 0..steps {
        let insert = pool.len() == 0 || (pool.len() < capacity && rng.random_bool(insert_bias));
        if insert {
            let e = random_absent_edge(n, &pool, rng, &allowed);
            pool.insert(e);
            stream.push_insert(e);
        } else {
            let idx = rng.random_range(0..pool.len());
            stream.push_delete(pool.remove_at(idx));
        }
    }
    Ok(stream)
}

/// Sliding window: insert random absent edges until `window` are present,
/// then alternate deleting the oldest edge and inserting a new one.
pub fn churn_stream_gen<R: Rng + ?Sized>(n: usize, steps: usize, window: usize, rng: &mut R) -> Result<UpdateStream> {
    let capacity = n * n.saturating_sub(1) / 2;
    if window == 0 || window > capacity {
        return Err(Error::InvalidArgument(format!(
            "window must lie in [1, {capacity}], got {window}"
        )));
    }
    let mut stream = UpdateStream::new(n);
    let mut pool = EdgePool::new();
    let mut order: VecDeque<Edge> = VecDeque::new();
    for _ in 0..steps {
        if order.len() < window {
            let e = random_absent_edge(n, &pool, rng, |_| true);
            pool.insert(e);
            order.push_back(e);
            stream.push_insert(e);
        } else {
            let e = order.pop_front().expect("window is nonempty");
            let idx = pool.pos[&e];
            pool.remove_at(idx);
            stream.push_delete(e);
        }
    }
    Ok(stream)
}
