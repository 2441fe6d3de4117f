//! Additive-to-multiplicative wrapper by vertex sparsification.
//!
//! For each guess `μ̂ = 1, 2, 4, …, n/2` the vertices are hashed into
//! `k = min(n, ⌈16μ̂/ε⌉)` buckets and an [`Engine`] with additive parameter
//! `ε²/32` runs on the contracted graph, so its additive loss is at most
//! `εμ̂/2`. Bucket-level matched edges are lifted back to surviving original
//! edges.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{DynamicMatcher, WorkCounters};
use crate::engine::{Engine, EngineConfig};
use crate::error::{Error, Result};
use crate::graph::Edge;
use crate::matching::Matching;
use crate::stream::UpdateEvent;

/// Total map from `[0, n)` onto `k` buckets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractionMap {
    bucket_of: Vec<u32>,
    k: usize,
    seed: u64,
}

impl ContractionMap {
    pub fn identity(n: usize) -> ContractionMap {
        ContractionMap {
            bucket_of: (0..n as u32).collect(),
            k: n,
            seed: 0,
        }
    }

    /// Uniform random buckets; `k = n` gives the identity.
    pub fn random(n: usize, k: usize, seed: u64) -> Result<ContractionMap> {
        if k == 0 || k > n {
            return Err(Error::InvalidArgument(format!("bucket count {k} outside [1, {n}]")));
        }
        if k == n {
            return Ok(ContractionMap::identity(n));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(ContractionMap {
            bucket_of: (0..n).map(|_| rng.random_range(0..k as u32)).collect(),
            k,
            seed,
        })
    }

    /// Explicit bucket assignment.
    pub fn from_buckets(bucket_of: Vec<u32>, k: usize) -> Result<ContractionMap> {
        if k > bucket_of.len() {
            return Err(Error::InvalidArgument(format!(
                "bucket count {k} exceeds vertex count {}",
                bucket_of.len()
            )));
        }
        if let Some(&b) = bucket_of.iter().find(|&&b| b as usize >= k) {
            return Err(Error::InvalidArgument(format!("bucket {b} outside [0, {k})")));
        }
        Ok(ContractionMap { bucket_of, k, seed: 0 })
    }

    pub fn n(&self) -> usize {
        self.bucket_of.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bucket(&self, v: usize) -> usize {
        self.bucket_of[v] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.bucket_of.iter().enumerate().all(|(i, &b)| b as usize == i)
    }
}

/// The bucket-level edge, or `None` when both endpoints share a bucket.
pub fn contract_edge(map: &ContractionMap, e: Edge) -> Option<Edge> {
    Edge::new(map.bucket(e.u()), map.bucket(e.v())).ok()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WrapperConfig {
    pub n: usize,
    pub epsilon: f64,
    pub root_seed: u64,
    /// Phase length for every instance; defaults to each instance's own
    /// `⌈k^{1.5}⌉`.
    pub threshold: Option<usize>,
    pub check_invariants: bool,
}

impl WrapperConfig {
    pub fn new(n: usize, epsilon: f64) -> WrapperConfig {
        WrapperConfig {
            n,
            epsilon,
            root_seed: 0,
            threshold: None,
            check_invariants: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.root_seed = seed;
        self
    }

    /// Additive parameter of each instance, `ε²/32`.
    pub fn instance_epsilon(&self) -> f64 {
        self.epsilon * self.epsilon / 32.0
    }

    /// `k = min(n, ⌈16μ̂/ε⌉)`.
    pub fn bucket_count(&self, guess: usize) -> usize {
        ((16.0 * guess as f64 / self.epsilon).ceil() as usize).min(self.n)
    }

    /// Powers of two from 1 up to `n/2`.
    pub fn guesses(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut g = 1;
        while g <= (self.n / 2).max(1) {
            out.push(g);
            g *= 2;
        }
        out
    }
}

/// Per-instance report fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub guess: usize,
    pub k: usize,
    pub reported: usize,
    pub rebuilds: u64,
}

struct Instance {
    guess: usize,
    map: ContractionMap,
    engine: Engine,
    /// Original preimages of each live bucket edge.
    preimages: HashMap<Edge, BTreeSet<Edge>>,
}

impl Instance {
    fn apply(&mut self, event: UpdateEvent) -> Result<()> {
        let e = event.edge();
        let Some(b) = contract_edge(&self.map, e) else {
            return Ok(());
        };
        match event {
            UpdateEvent::Insert(_) => {
                let set = self.preimages.entry(b).or_default();
                let fresh = set.is_empty();
                if set.insert(e) && fresh {
                    self.engine.update(UpdateEvent::Insert(b))?;
                }
            }
            UpdateEvent::Delete(_) => {
                let Some(set) = self.preimages.get_mut(&b) else {
                    return Ok(());
                };
                if set.remove(&e) && set.is_empty() {
                    self.preimages.remove(&b);
                    self.engine.update(UpdateEvent::Delete(b))?;
                }
            }
        }
        Ok(())
    }

    /// Lowest surviving preimage of every matched bucket edge.
    fn lift(&self, n: usize) -> Matching {
        let edges = self.engine.current_matching().edges().into_iter().map(|b| {
            *self.preimages[&b]
                .first()
                .expect("matched bucket edges have a live preimage")
        });
        Matching::from_edges(n, edges).expect("distinct buckets give distinct endpoints")
    }
}

/// The guess ladder.
pub struct Wrapper {
    n: usize,
    instances: Vec<Instance>,
    active: usize,
    lifted: Matching,
}

impl Wrapper {
    /// One instance per guess; guesses whose contraction is the identity
    /// share a single instance.
    pub fn new(config: WrapperConfig) -> Result<Wrapper> {
        if !(config.epsilon > 0.0 && config.epsilon < 1.0) {
            return Err(Error::Config(format!("epsilon must lie in (0, 1), got {}", config.epsilon)));
        }
        let mut seeds = ChaCha8Rng::seed_from_u64(config.root_seed);
        let mut specs = Vec::new();
        for guess in config.guesses() {
            let k = config.bucket_count(guess);
            let map_seed: u64 = seeds.random();
            let engine_seed: u64 = seeds.random();
            if k == config.n && specs.iter().any(|(_, m, _): &(usize, ContractionMap, EngineConfig)| m.k() == config.n) {
                continue;
            }
            let map = ContractionMap::random(config.n, k, map_seed)?;
            let mut ec = EngineConfig::new(k, config.instance_epsilon())
                .with_seed(engine_seed)
                .with_invariant_checks(config.check_invariants);
            if let Some(t) = config.threshold {
                ec = ec.with_threshold(t);
            }
            specs.push((guess, map, ec));
        }
        Wrapper::from_instances(config.n, specs)
    }

    /// Ladder over explicit `(guess, map, engine config)` triples.
    pub fn from_instances(n: usize, specs: Vec<(usize, ContractionMap, EngineConfig)>) -> Result<Wrapper> {
        if specs.is_empty() {
            return Err(Error::Config("a ladder needs at least one instance".into()));
        }
        let mut instances = Vec::with_capacity(specs.len());
        for (guess, map, ec) in specs {
            if map.n() != n || ec.n != map.k() {
                return Err(Error::Config(format!(
                    "instance for guess {guess}: map covers {} vertices into {} buckets, engine has {}",
                    map.n(),
                    map.k(),
                    ec.n
                )));
            }
            instances.push(Instance {
                guess,
                map,
                engine: Engine::new(ec)?,
                preimages: HashMap::new(),
            });
        }
        Ok(Wrapper {
            n,
            instances,
            active: 0,
            lifted: Matching::new(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn update(&mut self, event: UpdateEvent) -> Result<()> {
        let e = event.edge();
        if e.v() >= self.n {
            return Err(Error::InvalidVertex { vertex: e.v(), n: self.n });
        }
        for inst in &mut self.instances {
            inst.apply(event)?;
        }
        self.refresh();
        Ok(())
    }

    /// Designates the instance whose lifted matching is largest (finer
    /// contraction on ties) and caches its lift.
    fn refresh(&mut self) {
        let mut best = 0;
        for (i, inst) in self.instances.iter().enumerate() {
            let size = inst.engine.current_matching().len();
            let cur = self.instances[best].engine.current_matching().len();
            if size > cur || (size == cur && inst.map.k() > self.instances[best].map.k()) {
                best = i;
            }
        }
        self.active = best;
        self.lifted = self.instances[best].lift(self.n);
    }

    pub fn current_matching(&self) -> &Matching {
        &self.lifted
    }

    pub fn active_guess(&self) -> usize {
        self.instances[self.active].guess
    }

    pub fn instance_count(&self) -> usize {
        self.instances.len()
    }

    pub fn instances(&self) -> Vec<InstanceSummary> {
        self.instances
            .iter()
            .map(|i| InstanceSummary {
                guess: i.guess,
                k: i.map.k(),
                reported: i.engine.current_matching().len(),
                rebuilds: i.engine.metrics_snapshot().rebuilds,
            })
            .collect()
    }

    /// Engine of the `idx`-th instance.
    pub fn engine(&self, idx: usize) -> &Engine {
        &self.instances[idx].engine
    }
}

impl DynamicMatcher for Wrapper {
    fn apply(&mut self, event: UpdateEvent) -> Result<()> {
        self.update(event)
    }

    fn matching(&self) -> &Matching {
        &self.lifted
    }

    fn work(&self) -> WorkCounters {
        self.instances.iter().fold(WorkCounters::default(), |acc, i| {
            let w = i.engine.work_breakdown().total();
            WorkCounters {
                matrix_probes: acc.matrix_probes + w.matrix_probes,
                list_reads: acc.list_reads + w.list_reads,
            }
        })
    }

    fn rebuilds(&self) -> u64 {
        self.instances.iter().map(|i| i.engine.metrics_snapshot().rebuilds).sum()
    }
}

impl std::fmt::Debug for Wrapper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Wrapper")
            .field("n", &self.n)
            .field("instances", &self.instances())
            .field("active", &self.active)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(a: usize, b: usize) -> Edge {
        Edge::new(a, b).unwrap()
    }

    #[test]
    fn contraction_examples() {
        let id = ContractionMap::identity(8);
        assert_eq!(contract_edge(&id, e(2, 6)), Some(e(2, 6)));
        let map = ContractionMap::from_buckets(vec![2, 5, 3, 3, 0, 1], 6).unwrap();
        assert_eq!(contract_edge(&map, e(0, 1)), Some(e(2, 5)));
        assert_eq!(contract_edge(&map, e(2, 3)), None);
        assert!(ContractionMap::random(10, 10, 1).unwrap().is_identity());
        assert!(ContractionMap::random(10, 11, 1).is_err());
    }

    #[test]
    fn ladder_shape() {
        let c = WrapperConfig::new(256, 0.25);
        assert_eq!(c.guesses(), vec![1, 2, 4, 8, 16, 32, 64, 128]);
        assert_eq!(c.bucket_count(1), 64);
        assert_eq!(c.bucket_count(4), 256);
        let w = Wrapper::new(c).unwrap();
        let ks: Vec<usize> = w.instances().iter().map(|i| i.k).collect();
        assert_eq!(ks, vec![64, 128, 256]);
    }

    #[test]
    fn identity_ladder_matches_bare_engine() {
        let n = 24;
        let ec = EngineConfig::new(n, 0.3).with_seed(9);
        let mut w = Wrapper::from_instances(n, vec![(1, ContractionMap::identity(n), ec.clone())]).unwrap();
        let mut bare = Engine::new(ec).unwrap();
        for i in 0..n {
            for j in (i + 1..n).step_by(5) {
                let ev = UpdateEvent::Insert(e(i, j));
                w.update(ev).unwrap();
                bare.update(ev).unwrap();
                assert_eq!(w.current_matching().edges(), bare.current_matching().edges());
            }
        }
    }

    #[test]
    fn self_loop_events_are_dropped() {
        let map = ContractionMap::from_buckets(vec![0, 0, 1, 1], 2).unwrap();
        let ec = EngineConfig::new(2, 0.3);
        let mut w = Wrapper::from_instances(4, vec![(1, map, ec)]).unwrap();
        w.update(UpdateEvent::Insert(e(0, 1))).unwrap();
        assert_eq!(w.engine(0).metrics_snapshot().updates, 0);
        w.update(UpdateEvent::Insert(e(1, 2))).unwrap();
        w.update(UpdateEvent::Insert(e(0, 3))).unwrap();
        // Both contract to bucket edge (0, 1): one engine event.
        assert_eq!(w.engine(0).metrics_snapshot().updates, 1);
        assert_eq!(w.current_matching().edges(), vec![e(0, 3)]);
        w.update(UpdateEvent::Delete(e(0, 3))).unwrap();
        assert_eq!(w.current_matching().edges(), vec![e(1, 2)]);
    }

    #[test]
    fn empty_graph() {
        let w = Wrapper::new(WrapperConfig::new(64, 0.25)).unwrap();
        assert!(w.current_matching().is_empty());
    }
}
