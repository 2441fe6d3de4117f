//! Approximation boosting on top of [`solve_induced`].
//!
//! The booster never touches the graph directly. Every edge it learns about
//! comes back from a call `solve_induced(U, δ)` on a vertex subset it
//! prepares. It first harvests a maximal matching by calling on the free
//! vertices until nothing comes back, then searches for vertex-disjoint
//! augmenting paths by growing alternating paths one layer per round of
//! calls, keeping only the returned edges that cross from a path endpoint
//! into the layer's target set.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, MatrixAccess};
use crate::matching::Matching;
use crate::oracle::maximum_matching;
use crate::static_matcher::{solve_induced, CertificateCandidate, SparseIndex};

/// How augmenting paths are grown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoostStrategy {
    /// Random position labels in `{0..2k+1}` per target length `2k+1`;
    /// layer `j` offers only vertices labeled `2j+1`.
    Labeled,
    /// Every free vertex roots a path; every unused matched vertex is a
    /// target in every layer; two path endpoints meeting close a path.
    Forest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub strategy: BoostStrategy,
    /// Longest augmenting path searched, in edges (odd).
    pub path_cap: usize,
    /// Upper bound on search repetitions.
    pub repetitions: usize,
    /// Stop after this many consecutive repetitions without an augmentation.
    pub patience: usize,
    /// `δ` passed to every induced call.
    pub call_delta: f64,
    /// Cap on calls spent extending one layer.
    pub calls_per_layer: usize,
    /// Calls without a hit tolerated in a row before a layer is abandoned.
    pub layer_misses: usize,
    /// After each repetition, replace the matching by a maximum matching of
    /// every edge the calls have returned so far.
    pub close_known: bool,
}

impl BoostParams {
    /// Defaults for additive parameter `eps`: path cap `2⌈1/ε⌉+1`,
    /// `⌈(2/ε)·ln(4/ε)⌉` repetitions.
    pub fn for_epsilon(eps: f64) -> Result<BoostParams> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Config(format!("epsilon must lie in (0, 1), got {eps}")));
        }
        let inv = (1.0 / eps).ceil() as usize;
        Ok(BoostParams {
            strategy: BoostStrategy::Forest,
            path_cap: 2 * inv + 1,
            repetitions: ((2.0 / eps) * (4.0 / eps).ln()).ceil() as usize,
            patience: 2,
            call_delta: default_call_delta(eps),
            calls_per_layer: (2 * inv).min(MAX_CALLS_PER_LAYER),
            layer_misses: 1,
            close_known: true,
        })
    }

    /// Number of matched edges an augmenting path may pass through.
    pub fn max_layers(&self) -> usize {
        self.path_cap.saturating_sub(1) / 2
    }
}

/// Smallest `δ` handed to an induced call. Below it the number of sampling
/// rounds (about `1/(2δ)`) dominates everything else.
pub const MIN_CALL_DELTA: f64 = 1.0 / 16.0;

/// Most calls spent on a single layer.
pub const MAX_CALLS_PER_LAYER: usize = 16;

/// `δ` used for induced calls at additive parameter `eps`: `ε/2`, floored at
/// [`MIN_CALL_DELTA`].
pub fn default_call_delta(eps: f64) -> f64 {
    (eps / 2.0).max(MIN_CALL_DELTA)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoostStats {
    pub calls: usize,
    pub sampling_calls: usize,
    pub repetitions_run: usize,
    pub augmentations: usize,
    /// Augmentations by path length in edges: index `k` counts paths of
    /// length `2k+1`.
    pub augmentations_by_length: Vec<usize>,
    /// Edges gained by re-solving over the returned edges.
    pub closure_gain: usize,
    /// Calls that proved their vertex set edgeless.
    pub exhausted_calls: usize,
}

#[derive(Debug, Clone)]
pub struct BoostResult {
    pub matching: Matching,
    pub candidates: Vec<CertificateCandidate>,
    pub stats: BoostStats,
}

/// Boosted matching with the default parameters for `eps`.
pub fn boosted_matching<M, R>(dense: &M, sparse: &SparseIndex, eps: f64, rng: &mut R) -> Result<BoostResult>
where
    M: MatrixAccess + ?Sized,
    R: Rng + ?Sized,
{
    let params = BoostParams::for_epsilon(eps)?;
    boosted_matching_with(dense, sparse, eps, &params, rng)
}

pub fn boosted_matching_with<M, R>(
    dense: &M,
    sparse: &SparseIndex,
    eps: f64,
    params: &BoostParams,
    rng: &mut R,
) -> Result<BoostResult>
where
    M: MatrixAccess + ?Sized,
    R: Rng + ?Sized,
{
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Config(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    if dense.vertex_count() != sparse.n() {
        return Err(Error::InvalidArgument(format!(
            "dense side has {} vertices, sparse side {}",
            dense.vertex_count(),
            sparse.n()
        )));
    }
    let mut booster = Booster::new(dense, sparse, params, rng);
    booster.harvest_free();
    // With εn ≥ n/2 the additive bound is met by any maximal matching.
    if eps < 0.5 {
        let mut idle = 0;
        for _ in 0..params.repetitions {
            if booster.matching.free_vertices().len() < 2 {
                break;
            }
            booster.stats.repetitions_run += 1;
            let before = booster.stats.augmentations;
            booster.harvest_free();
            match params.strategy {
                BoostStrategy::Forest => booster.forest_round(params.max_layers()),
                BoostStrategy::Labeled => {
                    for k in 1..=params.max_layers() {
                        booster.labeled_round(k);
                    }
                }
            }
            if params.close_known {
                booster.close_over_known();
            }
            if booster.stats.augmentations == before {
                idle += 1;
                if idle >= params.patience {
                    break;
                }
            } else {
                idle = 0;
            }
        }
    }
    Ok(BoostResult {
        matching: booster.matching,
        candidates: booster.candidates,
        stats: booster.stats,
    })
}

const NO_PATH: u32 = u32::MAX;

/// What a returned edge may connect a path endpoint to.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Targets {
    /// Matched vertices: the path continues through their matching edge.
    Matched,
    /// Free vertices: the path is complete.
    Free,
}

/// Path bookkeeping for one search round.
struct PathForest {
    owner: Vec<u32>,
    paths: Vec<Vec<usize>>,
    /// Completed augmenting paths, as vertex sequences.
    completed: Vec<Vec<usize>>,
    closed: Vec<bool>,
    /// Layer in which each path last grew.
    grown_in: Vec<usize>,
}

impl PathForest {
    fn new(n: usize) -> Self {
        PathForest {
            owner: vec![NO_PATH; n],
            paths: Vec::new(),
            completed: Vec::new(),
            closed: Vec::new(),
            grown_in: Vec::new(),
        }
    }

    fn root(&mut self, v: usize) {
        let id = self.paths.len() as u32;
        self.owner[v] = id;
        self.paths.push(vec![v]);
        self.closed.push(false);
        self.grown_in.push(usize::MAX);
    }

    fn endpoint_of(&self, v: usize) -> Option<usize> {
        let id = self.owner[v];
        if id == NO_PATH {
            return None;
        }
        let id = id as usize;
        (!self.closed[id] && *self.paths[id].last().expect("paths are nonempty") == v).then_some(id)
    }

    fn is_unowned(&self, v: usize) -> bool {
        self.owner[v] == NO_PATH
    }

    fn open_endpoints(&self) -> Vec<usize> {
        self.paths
            .iter()
            .enumerate()
            .filter(|(id, _)| !self.closed[*id])
            .map(|(_, p)| *p.last().expect("paths are nonempty"))
            .collect()
    }
}

struct Booster<'a, M: ?Sized, R: ?Sized> {
    dense: &'a M,
    sparse: &'a SparseIndex,
    params: &'a BoostParams,
    rng: &'a mut R,
    matching: Matching,
    candidates: Vec<CertificateCandidate>,
    stats: BoostStats,
    /// Every edge returned by a call so far.
    known: Vec<Edge>,
    known_set: HashSet<Edge>,
    /// Vertex set most recently proven to induce no edges.
    edgeless: Option<Vec<bool>>,
}

impl<'a, M, R> Booster<'a, M, R>
where
    M: MatrixAccess + ?Sized,
    R: Rng + ?Sized,
{
    fn new(dense: &'a M, sparse: &'a SparseIndex, params: &'a BoostParams, rng: &'a mut R) -> Self {
        let n = dense.vertex_count();
        Booster {
            dense,
            sparse,
            params,
            rng,
            matching: Matching::new(n),
            candidates: Vec::new(),
            stats: BoostStats::default(),
            known: Vec::new(),
            known_set: HashSet::new(),
            edgeless: None,
        }
    }

    /// One induced call. Returns the matching and whether the call proved
    /// `G[U]` edgeless.
    fn call(&mut self, u_set: &[usize]) -> (Matching, bool) {
        self.stats.calls += 1;
        let out = solve_induced(self.dense, self.sparse, u_set, self.params.call_delta, self.rng);
        if let Some(c) = out.candidate {
            self.stats.sampling_calls += 1;
            self.candidates.push(c);
        }
        for e in out.matching.edges() {
            if self.known_set.insert(e) {
                self.known.push(e);
            }
        }
        if out.exhausted {
            self.stats.exhausted_calls += 1;
        }
        (out.matching, out.exhausted)
    }

    /// The matching only ever uses returned edges, so a maximum matching of
    /// the returned edges is at least as large and costs no probes.
    fn close_over_known(&mut self) {
        let best = maximum_matching(&self.known, self.matching.n());
        if best.len() > self.matching.len() {
            self.stats.closure_gain += best.len() - self.matching.len();
            self.stats.augmentations += best.len() - self.matching.len();
            self.matching = best;
        }
    }

    /// Calls on the free vertices until a call adds nothing. Leaves the
    /// matching maximal with respect to every edge the calls can reveal.
    fn harvest_free(&mut self) {
        loop {
            let mut free = self.matching.free_vertices();
            if free.len() < 2 {
                return;
            }
            // A subset of a set already proven edgeless needs no call.
            if let Some(mask) = &self.edgeless {
                if free.iter().all(|&v| mask[v]) {
                    return;
                }
            }
            free.shuffle(self.rng);
            let (found, exhausted) = self.call(&free);
            if exhausted {
                let mut mask = vec![false; self.matching.n()];
                for &v in &free {
                    mask[v] = true;
                }
                self.edgeless = Some(mask);
                return;
            }
            let mut gained = 0;
            for e in found.edges() {
                if self.matching.try_add(e) {
                    gained += 1;
                }
            }
            if gained == 0 {
                return;
            }
            self.record_augmentations(0, gained);
        }
    }

    fn record_augmentations(&mut self, matched_edges: usize, count: usize) {
        let hist = &mut self.stats.augmentations_by_length;
        if hist.len() <= matched_edges {
            hist.resize(matched_edges + 1, 0);
        }
        hist[matched_edges] += count;
        self.stats.augmentations += count;
    }

    /// One round of calls extending open paths by one matched edge (or
    /// closing them). Returns whether any path changed.
    fn extend_layer(
        &mut self,
        forest: &mut PathForest,
        layer: usize,
        mut frontier: Vec<usize>,
        mut targets: Vec<usize>,
        kind: Targets,
        allow_join: bool,
    ) -> bool {
        let n = self.dense.vertex_count();
        let mut is_target = vec![false; n];
        for &t in &targets {
            is_target[t] = true;
        }
        let mut progressed = false;
        let mut misses = 0;
        for _ in 0..self.params.calls_per_layer.max(1) {
            if frontier.is_empty() || (targets.is_empty() && !allow_join) {
                break;
            }
            frontier.shuffle(self.rng);
            targets.shuffle(self.rng);
            let mut u_set = Vec::with_capacity(frontier.len() + targets.len());
            u_set.extend_from_slice(&frontier);
            u_set.extend_from_slice(&targets);
            let (found, exhausted) = self.call(&u_set);
            if exhausted {
                // Later calls in this layer only use subsets of U.
                break;
            }

            let mut hit = false;
            let mut peeled = false;
            for e in found.edges() {
                let (a, b) = e.endpoints();
                let grew = [(a, b), (b, a)]
                    .into_iter()
                    .any(|(x, y)| self.try_grow(forest, layer, x, y, &is_target, kind, allow_join));
                if grew {
                    hit = true;
                } else {
                    // Targets the call keeps matching among themselves are
                    // withheld from the rest of this layer, so later calls
                    // see past them.
                    for x in [a, b] {
                        if is_target[x] {
                            is_target[x] = false;
                            peeled = true;
                        }
                    }
                }
            }
            if peeled {
                targets.retain(|&t| is_target[t]);
            }
            if !hit && !peeled {
                misses += 1;
                if misses > self.params.layer_misses {
                    break;
                }
                continue;
            }
            if hit {
                misses = 0;
                progressed = true;
            }
            frontier.retain(|&f| {
                forest
                    .endpoint_of(f)
                    .is_some_and(|id| forest.grown_in[id] != layer)
            });
            targets.retain(|&t| forest.is_unowned(t));
        }
        progressed
    }

    /// Applies returned edge `(x, y)` with `x` as the path endpoint.
    #[allow(clippy::too_many_arguments)]
    fn try_grow(
        &mut self,
        forest: &mut PathForest,
        layer: usize,
        x: usize,
        y: usize,
        is_target: &[bool],
        kind: Targets,
        allow_join: bool,
    ) -> bool {
        let Some(px) = forest.endpoint_of(x) else {
            return false;
        };
        if forest.grown_in[px] == layer {
            return false;
        }
        if allow_join {
            if let Some(py) = forest.endpoint_of(y) {
                if py != px && forest.grown_in[py] != layer {
                    let mut path = forest.paths[px].clone();
                    path.extend(forest.paths[py].iter().rev());
                    forest.closed[px] = true;
                    forest.closed[py] = true;
                    forest.completed.push(path);
                    return true;
                }
                return false;
            }
        }
        if !is_target[y] || !forest.is_unowned(y) {
            return false;
        }
        match kind {
            Targets::Matched => {
                let Some(mate) = self.matching.partner(y) else {
                    return false;
                };
                if !forest.is_unowned(mate) {
                    return false;
                }
                forest.owner[y] = px as u32;
                forest.owner[mate] = px as u32;
                forest.paths[px].push(y);
                forest.paths[px].push(mate);
                forest.grown_in[px] = layer;
                true
            }
            Targets::Free => {
                if self.matching.is_matched(y) {
                    return false;
                }
                forest.owner[y] = px as u32;
                forest.paths[px].push(y);
                forest.closed[px] = true;
                forest.completed.push(forest.paths[px].clone());
                true
            }
        }
    }

    fn apply_completed(&mut self, forest: PathForest) {
        for path in forest.completed {
            let matched_edges = path.len() / 2 - 1;
            self.matching
                .augment_along(&path)
                .expect("search only closes vertex-disjoint alternating paths");
            self.record_augmentations(matched_edges, 1);
        }
    }

    /// Grows paths from every free vertex through any unused matched vertex.
    fn forest_round(&mut self, layers: usize) {
        let n = self.dense.vertex_count();
        let mut forest = PathForest::new(n);
        for v in self.matching.free_vertices() {
            forest.root(v);
        }
        if forest.paths.len() < 2 {
            return;
        }
        for layer in 0..=layers {
            let frontier = forest.open_endpoints();
            // A lone open path can only close against another open path.
            if frontier.len() < 2 {
                break;
            }
            // One random side of each unused matched edge, so the matched
            // edges themselves stay out of the induced subgraph.
            let targets: Vec<usize> = if layer < layers {
                let mut t = Vec::new();
                for e in self.matching.edges() {
                    if forest.is_unowned(e.u()) && forest.is_unowned(e.v()) {
                        t.push(if self.rng.random_bool(0.5) { e.u() } else { e.v() });
                    }
                }
                t
            } else {
                Vec::new()
            };
            if !self.extend_layer(&mut forest, layer, frontier, targets, Targets::Matched, true) {
                break;
            }
        }
        self.apply_completed(forest);
    }

    /// Searches for augmenting paths of length exactly `2k+1` using random
    /// position labels.
    fn labeled_round(&mut self, k: usize) {
        let n = self.dense.vertex_count();
        let labels: Vec<usize> = (0..n).map(|_| self.rng.random_range(0..=2 * k + 1)).collect();
        let mut forest = PathForest::new(n);
        for v in self.matching.free_vertices() {
            if labels[v] == 0 {
                forest.root(v);
            }
        }
        if forest.paths.is_empty() {
            return;
        }
        for j in 0..=k {
            let frontier = forest.open_endpoints();
            if frontier.is_empty() {
                break;
            }
            let (targets, kind): (Vec<usize>, Targets) = if j < k {
                let t = self
                    .matching
                    .vertices()
                    .filter(|&v| {
                        labels[v] == 2 * j + 1
                            && self.matching.partner(v).is_some_and(|m| labels[m] == 2 * j + 2)
                    })
                    .collect();
                (t, Targets::Matched)
            } else {
                let t = self
                    .matching
                    .free_vertices()
                    .into_iter()
                    .filter(|&v| labels[v] == 2 * k + 1)
                    .collect();
                (t, Targets::Free)
            };
            self.extend_layer(&mut forest, j, frontier, targets, kind, false);
            // Paths that did not grow this layer are out of position.
            for id in 0..forest.paths.len() {
                if !forest.closed[id] && forest.grown_in[id] != j {
                    forest.closed[id] = true;
                }
            }
        }
        self.apply_completed(forest);
    }
}

/// Every edge of `m` lies in `dense ∪ sparse`. Uses uncounted access through
/// the supplied predicate so callers can check without disturbing counters.
pub fn edges_within(m: &Matching, present: impl FnMut(Edge) -> bool) -> bool {
    m.edges().into_iter().all(present)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DynamicGraph;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(a: usize, b: usize) -> Edge {
        Edge::new(a, b).unwrap()
    }

    fn paths_of_three(copies: usize) -> Vec<Edge> {
        let mut out = Vec::new();
        for c in 0..copies {
            let b = 4 * c;
            out.extend([e(b, b + 1), e(b + 1, b + 2), e(b + 2, b + 3)]);
        }
        out
    }

    #[test]
    fn params_for_epsilon() {
        let p = BoostParams::for_epsilon(0.2).unwrap();
        assert_eq!(p.path_cap, 11);
        assert_eq!(p.max_layers(), 5);
        assert_eq!(p.repetitions, (10.0 * 20f64.ln()).ceil() as usize);
        assert!(BoostParams::for_epsilon(0.0).is_err());
        assert!(BoostParams::for_epsilon(1.0).is_err());
    }

    #[test]
    fn finds_length_three_augmentations() {
        // Five disjoint 3-edge paths: μ = 10, a maximal matching may have 5.
        let edges = paths_of_three(5);
        for strategy in [BoostStrategy::Forest, BoostStrategy::Labeled] {
            for seed in 0..20 {
                let mut g = DynamicGraph::new(20).unwrap();
                for &x in &edges {
                    g.insert(x).unwrap();
                }
                let sparse = SparseIndex::empty(20);
                let mut params = BoostParams::for_epsilon(0.2).unwrap();
                params.strategy = strategy;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let r = boosted_matching_with(&g, &sparse, 0.2, &params, &mut rng).unwrap();
                assert!(r.matching.len() >= 6, "{strategy:?} seed {seed}: {}", r.matching.len());
                r.matching.validate().unwrap();
                assert!(edges_within(&r.matching, |x| g.contains(x)));
            }
        }
    }

    #[test]
    fn large_epsilon_is_maximal_only() {
        let edges = paths_of_three(3);
        let mut g = DynamicGraph::new(12).unwrap();
        for &x in &edges {
            g.insert(x).unwrap();
        }
        let sparse = SparseIndex::empty(12);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = boosted_matching(&g, &sparse, 0.6, &mut rng).unwrap();
        assert!(r.matching.is_maximal_in(&edges));
        assert_eq!(r.stats.repetitions_run, 0);
    }

    #[test]
    fn empty_graph() {
        let g = DynamicGraph::new(10).unwrap();
        let sparse = SparseIndex::empty(10);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = boosted_matching(&g, &sparse, 0.2, &mut rng).unwrap();
        assert!(r.matching.is_empty());
    }

    #[test]
    fn uses_sparse_side_edges() {
        let dense = DynamicGraph::new(8).unwrap();
        let sparse = SparseIndex::new(8, &[e(0, 1), e(2, 3), e(4, 5), e(6, 7)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = boosted_matching(&dense, &sparse, 0.2, &mut rng).unwrap();
        assert_eq!(r.matching.len(), 4);
    }
}
