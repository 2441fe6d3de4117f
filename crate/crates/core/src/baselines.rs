//! Simple dynamic strategies used as comparison points.

use crate::error::Result;
use crate::graph::{DynamicGraph, Edge};
use crate::matching::Matching;
use crate::static_matcher::greedy_matching;
use crate::stream::UpdateEvent;

/// Work counters common to every dynamic matcher.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct WorkCounters {
    pub matrix_probes: u64,
    pub list_reads: u64,
}

/// Anything that maintains a matching under edge updates.
pub trait DynamicMatcher {
    fn apply(&mut self, event: UpdateEvent) -> Result<()>;

    fn matching(&self) -> &Matching;

    fn work(&self) -> WorkCounters;

    /// Updates processed so far that triggered a recomputation from
    /// scratch. Baselines without rebuilds report 0.
    fn rebuilds(&self) -> u64 {
        0
    }
}

/// Greedy maximal matching, repaired on deletion by scanning the lists of
/// the two freed vertices.
#[derive(Debug)]
pub struct MaximalBaseline {
    graph: DynamicGraph,
    matching: Matching,
}

impl MaximalBaseline {
    pub fn new(n: usize) -> Result<Self> {
        Ok(MaximalBaseline {
            graph: DynamicGraph::new(n)?,
            matching: Matching::new(n),
        })
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    fn rematch(&mut self, v: usize) {
        if self.matching.is_matched(v) {
            return;
        }
        let free = self.graph.neighbors(v).find(|&w| self.matching.is_free(w));
        if let Some(w) = free {
            self.matching.try_add(Edge::new(v, w).expect("neighbors differ"));
        }
    }
}

impl DynamicMatcher for MaximalBaseline {
    fn apply(&mut self, event: UpdateEvent) -> Result<()> {
        match event {
            UpdateEvent::Insert(e) => {
                self.graph.insert(e)?;
                self.matching.try_add(e);
            }
            UpdateEvent::Delete(e) => {
                self.graph.delete(e)?;
                if self.matching.remove(e) {
                    self.rematch(e.u());
                    self.rematch(e.v());
                }
            }
        }
        Ok(())
    }

    fn matching(&self) -> &Matching {
        &self.matching
    }

    fn work(&self) -> WorkCounters {
        WorkCounters {
            matrix_probes: self.graph.matrix_probes(),
            list_reads: self.graph.list_reads(),
        }
    }
}

/// Recomputes a greedy maximal matching from scratch every `period` updates;
/// in between, deletions only drop matched edges.
#[derive(Debug)]
pub struct RebuildBaseline {
    graph: DynamicGraph,
    matching: Matching,
    period: usize,
    since_rebuild: usize,
    rebuilds: u64,
}

impl RebuildBaseline {
    pub fn new(n: usize, period: usize) -> Result<Self> {
        Ok(RebuildBaseline {
            graph: DynamicGraph::new(n)?,
            matching: Matching::new(n),
            period: period.max(1),
            since_rebuild: 0,
            rebuilds: 0,
        })
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }
}

impl DynamicMatcher for RebuildBaseline {
    fn apply(&mut self, event: UpdateEvent) -> Result<()> {
        match event {
            UpdateEvent::Insert(e) => {
                self.graph.insert(e)?;
            }
            UpdateEvent::Delete(e) => {
                self.graph.delete(e)?;
                self.matching.remove(e);
            }
        }
        self.since_rebuild += 1;
        if self.since_rebuild >= self.period {
            self.since_rebuild = 0;
            self.rebuilds += 1;
            self.matching = greedy_matching(self.graph.n(), &self.graph.edges());
        }
        Ok(())
    }

    fn matching(&self) -> &Matching {
        &self.matching
    }

    fn work(&self) -> WorkCounters {
        WorkCounters {
            matrix_probes: self.graph.matrix_probes(),
            list_reads: self.graph.list_reads(),
        }
    }

    fn rebuilds(&self) -> u64 {
        self.rebuilds
    }
}
