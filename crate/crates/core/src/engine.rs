//! The phase-structured dynamic maintenance loop.
//!
//! Every update lands in `G` and in one of the overlays `G_add` / `G_del`.
//! Every `rebuild_period` updates the engine re-solves from scratch with
//! `G − G_add` behind matrix access and `G_add ∪ H_cert − G_del` behind list
//! access, folds any certificate into `H_cert`, and replaces its output
//! matching. Every `threshold` updates the overlays are emptied.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{DynamicMatcher, WorkCounters};
use crate::boost::BoostParams;
use crate::certify::{match_and_certify_with, Condition, SolveOutcome};
use crate::error::{Error, Result};
use crate::graph::{DifferenceView, DynamicGraph, Edge, OverlaySet};
use crate::matching::Matching;
use crate::static_matcher::SparseIndex;
use crate::stream::UpdateEvent;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub n: usize,
    pub epsilon: f64,
    /// Phase length `t`.
    pub threshold: usize,
    pub root_seed: u64,
    /// Measure the true induced average degree of each certificate.
    pub measure_d: bool,
    /// Check the engine's invariants after every update; violations become
    /// errors.
    pub check_invariants: bool,
    /// Overrides the booster defaults derived from `epsilon / 2`.
    pub boost: Option<BoostParams>,
}

impl EngineConfig {
    /// Config with the default threshold `⌈n^{1.5}⌉` and seed 0.
    pub fn new(n: usize, epsilon: f64) -> EngineConfig {
        EngineConfig {
            n,
            epsilon,
            threshold: default_threshold(n),
            root_seed: 0,
            measure_d: false,
            check_invariants: false,
            boost: None,
        }
    }

    pub fn with_threshold(mut self, threshold: usize) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.root_seed = seed;
        self
    }

    pub fn with_invariant_checks(mut self, on: bool) -> Self {
        self.check_invariants = on;
        self
    }

    /// `max(1, ⌊εn/2⌋)`.
    pub fn rebuild_period(&self) -> usize {
        ((self.epsilon * self.n as f64 / 2.0).floor() as usize).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.threshold < 1 {
            return Err(Error::Config("threshold must be at least 1".into()));
        }
        if self.n > crate::graph::MAX_VERTICES {
            return Err(Error::Config(format!(
                "n = {} exceeds the supported maximum of {} vertices",
                self.n,
                crate::graph::MAX_VERTICES
            )));
        }
        Ok(())
    }

    fn boost_params(&self) -> Result<BoostParams> {
        match self.boost {
            Some(p) => Ok(p),
            None => BoostParams::for_epsilon(self.epsilon / 2.0),
        }
    }
}

/// `⌈n^{1.5}⌉`, at least 1.
pub fn default_threshold(n: usize) -> usize {
    ((n as f64).powf(1.5).ceil() as usize).max(1)
}

/// One certificate folded into `H_cert`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub phase_index: u64,
    pub rebuild_index: u64,
    pub size: usize,
    pub unfiltered_size: usize,
    pub degree_proxy: f64,
    pub return_iteration: usize,
    /// `|E_dense ∩ V²(M_C)| / |M_C|`, when measurement is enabled.
    pub measured_degree: Option<f64>,
    pub disjoint_from_sparse: bool,
    pub disjoint_from_hcert: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub phase_index: u64,
    pub rebuilds: u64,
    pub certificates: u64,
    pub sum_inverse_d: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub updates: u64,
    pub matrix_probes: u64,
    pub list_reads: u64,
    pub rebuilds: u64,
    pub phase_resets: u64,
    pub induced_calls: u64,
    pub sampling_calls: u64,
    /// Rebuilds whose sampling produced only candidates that were empty
    /// after the sparse filter.
    pub downgraded_rebuilds: u64,
    /// Rebuilds with a sampling candidate below `⌊9δ²n/16⌋` edges.
    pub short_candidate_rebuilds: u64,
    pub overlay_checks: u64,
    pub certificate_log: Vec<CertificateRecord>,
    /// Closed phases followed by the current one.
    pub phases: Vec<PhaseRecord>,
}

impl Metrics {
    pub fn current_phase(&self) -> &PhaseRecord {
        self.phases.last().expect("a phase record always exists")
    }
}

/// What an update triggered.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UpdateOutcome {
    pub phase_reset: bool,
    pub rebuilt: bool,
    pub condition: Option<Condition>,
}

/// Per-counter breakdown of the engine's work.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkBreakdown {
    pub graph_matrix_probes: u64,
    pub overlay_matrix_probes: u64,
    pub graph_list_reads: u64,
    pub overlay_list_reads: u64,
    pub sparse_index_reads: u64,
}

impl WorkBreakdown {
    pub fn total(&self) -> WorkCounters {
        WorkCounters {
            matrix_probes: self.graph_matrix_probes + self.overlay_matrix_probes,
            list_reads: self.graph_list_reads + self.overlay_list_reads + self.sparse_index_reads,
        }
    }
}

pub struct Engine {
    config: EngineConfig,
    boost: BoostParams,
    rebuild_period: usize,
    g: DynamicGraph,
    overlays: OverlaySet,
    c_updates: usize,
    m_g: Matching,
    rebuild_index: u64,
    phase_index: u64,
    rng: ChaCha8Rng,
    sparse_reads: u64,
    metrics: Metrics,
    last_outcome: Option<SolveOutcome>,
}

impl Engine {
    /// Builds the engine and performs the initial rebuild. On the empty
    /// graph that rebuild has nothing to solve and costs no work.
    pub fn new(config: EngineConfig) -> Result<Engine> {
        config.validate()?;
        let boost = config.boost_params()?;
        let n = config.n;
        let mut engine = Engine {
            rebuild_period: config.rebuild_period(),
            boost,
            g: DynamicGraph::new(n)?,
            overlays: OverlaySet::new(n)?,
            c_updates: 0,
            m_g: Matching::new(n),
            rebuild_index: 0,
            phase_index: 0,
            rng: ChaCha8Rng::seed_from_u64(config.root_seed),
            sparse_reads: 0,
            metrics: Metrics {
                phases: vec![PhaseRecord::default()],
                ..Metrics::default()
            },
            last_outcome: None,
            config,
        };
        engine.rebuild()?;
        Ok(engine)
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn rebuild_period(&self) -> usize {
        self.rebuild_period
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.g
    }

    pub fn overlays(&self) -> &OverlaySet {
        &self.overlays
    }

    pub fn c_updates(&self) -> usize {
        self.c_updates
    }

    pub fn phase_index(&self) -> u64 {
        self.phase_index
    }

    pub fn rebuild_index(&self) -> u64 {
        self.rebuild_index
    }

    pub fn current_matching(&self) -> &Matching {
        &self.m_g
    }

    /// Outcome of the most recent solve, if any.
    pub fn last_outcome(&self) -> Option<&SolveOutcome> {
        self.last_outcome.as_ref()
    }

    pub fn work_breakdown(&self) -> WorkBreakdown {
        WorkBreakdown {
            graph_matrix_probes: self.g.matrix_probes(),
            overlay_matrix_probes: self.overlays.matrix_probes(),
            graph_list_reads: self.g.list_reads(),
            overlay_list_reads: self.overlays.list_reads(),
            sparse_index_reads: self.sparse_reads,
        }
    }

    pub fn metrics_snapshot(&self) -> Metrics {
        let mut m = self.metrics.clone();
        let work = self.work_breakdown().total();
        m.matrix_probes = work.matrix_probes;
        m.list_reads = work.list_reads;
        m
    }

    pub fn update(&mut self, event: UpdateEvent) -> Result<UpdateOutcome> {
        let e = event.edge();
        if e.v() >= self.config.n {
            return Err(Error::InvalidVertex {
                vertex: e.v(),
                n: self.config.n,
            });
        }
        match event {
            UpdateEvent::Insert(e) => {
                self.g.insert(e)?;
                self.overlays.g_add.insert(e)?;
                self.overlays.g_del.delete(e)?;
            }
            UpdateEvent::Delete(e) => {
                let present = self.g.delete(e)?;
                let was_added = self.overlays.g_add.delete(e)?;
                self.m_g.remove(e);
                // An edge inserted and deleted within the phase never
                // reached the dense side; it only needs masking when it
                // could still surface through H_cert.
                if present && (!was_added || self.overlays.h_cert.contains(e)) {
                    self.overlays.g_del.insert(e)?;
                }
            }
        }
        self.metrics.updates += 1;
        self.c_updates += 1;

        let mut outcome = UpdateOutcome::default();
        if self.c_updates == self.config.threshold {
            self.overlays.clear();
            self.c_updates = 0;
            self.phase_index += 1;
            self.metrics.phase_resets += 1;
            self.metrics.phases.push(PhaseRecord {
                phase_index: self.phase_index,
                ..PhaseRecord::default()
            });
            outcome.phase_reset = true;
        }
        if self.c_updates.is_multiple_of(self.rebuild_period) {
            outcome.condition = self.rebuild()?;
            outcome.rebuilt = true;
        }
        if self.config.check_invariants {
            self.check_update_invariants()?;
        }
        Ok(outcome)
    }

    /// Re-solves from scratch. Returns the condition of the solve, or `None`
    /// when `G` has no edges and nothing needed solving.
    fn rebuild(&mut self) -> Result<Option<Condition>> {
        if self.g.is_empty() {
            self.m_g.clear();
            self.last_outcome = None;
            return Ok(None);
        }
        if self.config.check_invariants {
            self.check_overlay_algebra()?;
        }
        let n = self.config.n;
        let sparse_edges = self.overlays.sparse_edges();
        let sparse = SparseIndex::new(n, &sparse_edges)?;
        let dense = DifferenceView::new(&self.g, &self.overlays.g_add)?;
        let mac_eps = self.config.epsilon / 2.0;
        let mut outcome = match_and_certify_with(&dense, &sparse, mac_eps, &self.boost, &mut self.rng)?;
        self.sparse_reads += sparse.list_reads();

        self.metrics.rebuilds += 1;
        self.metrics.induced_calls += outcome.stats.calls as u64;
        self.metrics.sampling_calls += outcome.stats.sampling_calls as u64;
        if outcome.downgraded {
            self.metrics.downgraded_rebuilds += 1;
        }
        let short = outcome.candidates.iter().any(|c| {
            let floor = (9.0 * c.delta * c.delta * n as f64 / 16.0).floor() as usize;
            c.size < floor
        });
        if short {
            self.metrics.short_candidate_rebuilds += 1;
        }
        self.metrics
            .phases
            .last_mut()
            .expect("a phase record always exists")
            .rebuilds += 1;

        if let Some(cert) = outcome.certificate.as_mut() {
            cert.rebuild_index = self.rebuild_index;
            cert.phase_index = self.phase_index;
            let edges = cert.matching.edges();
            let disjoint_from_sparse = edges.iter().all(|&e| !sparse.contains(e));
            let disjoint_from_hcert = edges.iter().all(|&e| !self.overlays.h_cert.contains(e));
            if self.config.check_invariants && !(disjoint_from_sparse && disjoint_from_hcert) {
                return Err(Error::Invariant(format!(
                    "certificate at rebuild {} overlaps sparse side or H_cert",
                    self.rebuild_index
                )));
            }
            let measured_degree = self.config.measure_d.then(|| self.measure_degree(&edges));
            for &e in &edges {
                self.overlays.h_cert.insert(e)?;
            }
            let phase = self.metrics.phases.last_mut().expect("a phase record always exists");
            phase.certificates += 1;
            phase.sum_inverse_d += 1.0 / cert.degree_proxy;
            self.metrics.certificate_log.push(CertificateRecord {
                phase_index: self.phase_index,
                rebuild_index: self.rebuild_index,
                size: edges.len(),
                unfiltered_size: cert.unfiltered_size,
                degree_proxy: cert.degree_proxy,
                return_iteration: cert.return_iteration,
                measured_degree,
                disjoint_from_sparse,
                disjoint_from_hcert,
            });
        }
        self.rebuild_index += 1;
        self.m_g = outcome.matching.clone();
        let condition = outcome.condition;
        self.last_outcome = Some(outcome);
        Ok(Some(condition))
    }

    /// Average degree of `(G − G_add)[V(M_C)]` per certificate edge, read
    /// without touching the work counters.
    fn measure_degree(&self, cert: &[Edge]) -> f64 {
        let verts: Vec<usize> = cert.iter().flat_map(|e| [e.u(), e.v()]).collect();
        let mut count = 0usize;
        for (i, &a) in verts.iter().enumerate() {
            for &b in &verts[i + 1..] {
                let e = Edge::new(a, b).expect("certificate vertices are distinct");
                if self.g.contains(e) && !self.overlays.g_add.contains(e) {
                    count += 1;
                }
            }
        }
        count as f64 / cert.len().max(1) as f64
    }

    /// `(G − G_add) ∪ (G_add ∪ H_cert − G_del) = G`, by edge enumeration.
    pub fn check_overlay_algebra(&mut self) -> Result<()> {
        self.metrics.overlay_checks += 1;
        let g_edges = self.g.edge_snapshot();
        let mut union: Vec<Edge> = g_edges
            .iter()
            .copied()
            .filter(|&e| !self.overlays.g_add.contains(e))
            .collect();
        let mut sparse: Vec<Edge> = self
            .overlays
            .g_add
            .edge_snapshot()
            .into_iter()
            .chain(self.overlays.h_cert.edge_snapshot())
            .filter(|&e| !self.overlays.g_del.contains(e))
            .collect();
        union.append(&mut sparse);
        union.sort_unstable();
        union.dedup();
        if union != g_edges {
            return Err(Error::Invariant(format!(
                "overlay algebra broken at rebuild {}: union has {} edges, G has {}",
                self.rebuild_index,
                union.len(),
                g_edges.len()
            )));
        }
        Ok(())
    }

    fn check_update_invariants(&self) -> Result<()> {
        self.m_g.validate()?;
        for e in self.m_g.edges() {
            if !self.g.contains(e) {
                return Err(Error::Invariant(format!("matched edge {e:?} not in G")));
            }
        }
        for e in self.overlays.g_add.edge_snapshot() {
            if self.overlays.g_del.contains(e) {
                return Err(Error::Invariant(format!("{e:?} in both G_add and G_del")));
            }
        }
        let t = self.config.threshold;
        if self.overlays.g_add.edge_count() + self.overlays.g_del.edge_count() > t {
            return Err(Error::Invariant("|G_add| + |G_del| exceeds the threshold".into()));
        }
        let cert_cap = t.div_ceil(self.rebuild_period) * (self.config.n / 2);
        if self.overlays.h_cert.edge_count() > cert_cap {
            return Err(Error::Invariant("H_cert exceeds its per-phase bound".into()));
        }
        if self.c_updates >= t {
            return Err(Error::Invariant("update counter reached the threshold".into()));
        }
        Ok(())
    }
}

impl DynamicMatcher for Engine {
    fn apply(&mut self, event: UpdateEvent) -> Result<()> {
        self.update(event).map(|_| ())
    }

    fn matching(&self) -> &Matching {
        &self.m_g
    }

    fn work(&self) -> WorkCounters {
        self.work_breakdown().total()
    }

    fn rebuilds(&self) -> u64 {
        self.metrics.rebuilds
    }
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("config", &self.config)
            .field("c_updates", &self.c_updates)
            .field("phase_index", &self.phase_index)
            .field("rebuild_index", &self.rebuild_index)
            .field("matching_size", &self.m_g.len())
            .finish()
    }
}
