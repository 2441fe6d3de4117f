//! Replay harness: drives engines and baselines over a stream, checks
//! snapshots against the exact oracle and assembles reports.
//!
//! Everything in a report except the `header` field is a deterministic
//! function of the stream and the configs.

use std::fmt;
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::baselines::{DynamicMatcher, MaximalBaseline, RebuildBaseline, WorkCounters};
use crate::engine::{CertificateRecord, Engine, EngineConfig, PhaseRecord};
use crate::error::{Error, Result};
use crate::graph::DynamicGraph;
use crate::oracle::{exact_matching, ORACLE_MAX_VERTICES};
use crate::sparsifier::{InstanceSummary, Wrapper, WrapperConfig};
use crate::stream::{UpdateEvent, UpdateStream};

/// JSON schema of [`RunReport`].
pub const RUN_REPORT_SCHEMA: &str = include_str!("../schema/run_report.schema.json");

/// JSON schema of [`CompareReport`].
pub const COMPARE_REPORT_SCHEMA: &str = include_str!("../schema/compare_report.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineKind {
    Ors,
    OrsMultiplicative,
    Maximal,
    Rebuild,
}

impl EngineKind {
    pub const ALL: [EngineKind; 4] = [
        EngineKind::Ors,
        EngineKind::OrsMultiplicative,
        EngineKind::Maximal,
        EngineKind::Rebuild,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Ors => "ors",
            EngineKind::OrsMultiplicative => "ors-multiplicative",
            EngineKind::Maximal => "maximal",
            EngineKind::Rebuild => "rebuild",
        }
    }

    /// What each checkpoint is held to.
    pub fn guarantee(self) -> &'static str {
        match self {
            EngineKind::Ors => "size >= mu - eps*n",
            EngineKind::OrsMultiplicative => "size >= (1 - eps)*mu",
            EngineKind::Maximal => "size >= mu/2",
            EngineKind::Rebuild => "size >= (mu - s)/2 - s, s = updates since rebuild",
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EngineKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown engine kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub engine: EngineKind,
    pub epsilon: f64,
    /// Phase length; `None` uses the engine default.
    pub threshold: Option<usize>,
    pub seed: u64,
    /// Extra checkpoint every this many updates.
    pub check_every: Option<usize>,
    pub measure_d: bool,
    pub check_invariants: bool,
    /// Period of the rebuild baseline; `None` uses `max(1, ⌊εn/2⌋)`.
    pub rebuild_period: Option<usize>,
}

impl RunConfig {
    pub fn new(engine: EngineKind, epsilon: f64) -> RunConfig {
        RunConfig {
            engine,
            epsilon,
            threshold: None,
            seed: 0,
            check_every: None,
            measure_d: false,
            check_invariants: false,
            rebuild_period: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_check_every(mut self, k: usize) -> Self {
        self.check_every = Some(k);
        self
    }
}

/// Non-deterministic fields, kept apart so reports can be compared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub timestamp_unix: u64,
    pub wall_clock_seconds: f64,
}

impl Header {
    fn new(started: Instant) -> Header {
        Header {
            tool: "dynmatch".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub engine: EngineKind,
    pub n: usize,
    pub epsilon: f64,
    pub threshold: Option<usize>,
    pub seed: u64,
    pub check_every: Option<usize>,
    pub rebuild_period: Option<usize>,
    pub measure_d: bool,
    pub guarantee: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamInfo {
    pub n: usize,
    pub events: usize,
    pub inserts: usize,
    pub deletes: usize,
}

impl StreamInfo {
    pub fn of(stream: &UpdateStream) -> StreamInfo {
        let inserts = stream.events.iter().filter(|e| e.is_insert()).count();
        StreamInfo {
            n: stream.n,
            events: stream.len(),
            inserts,
            deletes: stream.len() - inserts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trigger {
    Rebuild,
    Interval,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRecord {
    /// Number of events applied so far.
    pub update_index: usize,
    pub trigger: Trigger,
    pub engine_size: usize,
    pub oracle_size: Option<usize>,
    pub additive_gap: Option<i64>,
    pub ratio: Option<f64>,
    pub guarantee_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleWork {
    pub module: String,
    pub matrix_probes: u64,
    pub list_reads: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub updates: usize,
    pub matrix_probes: u64,
    pub list_reads: u64,
    /// Probes plus list reads.
    pub wall_work: u64,
    pub rebuilds: u64,
    pub probes_per_update: f64,
    pub list_reads_per_update: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flags {
    pub all_guarantees_hold: bool,
    pub checkpoints_ok: usize,
    pub checkpoints_checked: usize,
    pub oracle_skipped: bool,
    /// Totals equal the sum of the per-module counters.
    pub work_consistent: bool,
}

/// One engine's share of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunBody {
    pub config: ConfigEcho,
    pub checkpoints: Vec<CheckpointRecord>,
    pub phases: Vec<PhaseRecord>,
    pub instances: Vec<InstanceSummary>,
    pub certificates: Option<Vec<CertificateRecord>>,
    pub modules: Vec<ModuleWork>,
    pub totals: Totals,
    pub flags: Flags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub header: Header,
    pub stream: StreamInfo,
    pub warnings: Vec<String>,
    pub run: RunBody,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.run.flags.all_guarantees_hold
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// JSON with the header removed, for determinism checks.
    pub fn deterministic_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self).map_err(|e| Error::Io(e.to_string()))?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("header");
        }
        serde_json::to_string(&v).map_err(|e| Error::Io(e.to_string()))
    }

    /// Per-checkpoint table.
    pub fn to_csv(&self) -> Result<String> {
        checkpoints_csv(&self.run.checkpoints)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparedRow {
    pub update_index: usize,
    pub oracle_size: Option<usize>,
    /// Sizes in the order of `runs`.
    pub sizes: Vec<usize>,
    pub ratios: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub header: Header,
    pub stream: StreamInfo,
    pub warnings: Vec<String>,
    pub runs: Vec<RunBody>,
    pub rows: Vec<ComparedRow>,
}

impl CompareReport {
    pub fn passed(&self) -> bool {
        self.runs.iter().all(|r| r.flags.all_guarantees_hold)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn deterministic_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self).map_err(|e| Error::Io(e.to_string()))?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("header");
        }
        serde_json::to_string(&v).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut head = vec!["update_index".to_string(), "oracle_size".to_string()];
        for r in &self.runs {
            head.push(format!("{}_size", r.config.engine));
            head.push(format!("{}_ratio", r.config.engine));
        }
        w.write_record(&head).map_err(csv_err)?;
        for row in &self.rows {
            let mut rec = vec![
                row.update_index.to_string(),
                row.oracle_size.map(|s| s.to_string()).unwrap_or_default(),
            ];
            for (s, r) in row.sizes.iter().zip(&row.ratios) {
                rec.push(s.to_string());
                rec.push(r.map(|x| x.to_string()).unwrap_or_default());
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        finish_csv(w)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn checkpoints_csv(rows: &[CheckpointRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "update_index",
        "trigger",
        "engine_size",
        "oracle_size",
        "additive_gap",
        "ratio",
        "guarantee_ok",
    ])
    .map_err(csv_err)?;
    let opt = |x: Option<String>| x.unwrap_or_default();
    for c in rows {
        let trigger = match c.trigger {
            Trigger::Rebuild => "rebuild",
            Trigger::Interval => "interval",
            Trigger::Both => "both",
        };
        w.write_record([
            c.update_index.to_string(),
            trigger.to_string(),
            c.engine_size.to_string(),
            opt(c.oracle_size.map(|x| x.to_string())),
            opt(c.additive_gap.map(|x| x.to_string())),
            opt(c.ratio.map(|x| x.to_string())),
            opt(c.guarantee_ok.map(|x| x.to_string())),
        ])
        .map_err(csv_err)?;
    }
    finish_csv(w)
}

/// A matcher under test.
enum Runner {
    Ors(Box<Engine>),
    Multi(Box<Wrapper>),
    Maximal(MaximalBaseline),
    Rebuild(RebuildBaseline),
}

impl Runner {
    fn build(cfg: &RunConfig, n: usize) -> Result<(Runner, ConfigEcho)> {
        let mut echo = ConfigEcho {
            engine: cfg.engine,
            n,
            epsilon: cfg.epsilon,
            threshold: None,
            seed: cfg.seed,
            check_every: cfg.check_every,
            rebuild_period: None,
            measure_d: cfg.measure_d,
            guarantee: cfg.engine.guarantee().into(),
        };
        let runner = match cfg.engine {
            EngineKind::Ors => {
                let mut ec = EngineConfig::new(n, cfg.epsilon).with_seed(cfg.seed);
                ec.measure_d = cfg.measure_d;
                ec.check_invariants = cfg.check_invariants;
                if let Some(t) = cfg.threshold {
                    ec.threshold = t;
                }
                echo.threshold = Some(ec.threshold);
                echo.rebuild_period = Some(ec.rebuild_period());
                Runner::Ors(Box::new(Engine::new(ec)?))
            }
            EngineKind::OrsMultiplicative => {
                let mut wc = WrapperConfig::new(n, cfg.epsilon).with_seed(cfg.seed);
                wc.threshold = cfg.threshold;
                wc.check_invariants = cfg.check_invariants;
                echo.threshold = cfg.threshold;
                Runner::Multi(Box::new(Wrapper::new(wc)?))
            }
            EngineKind::Maximal => {
                validate_epsilon(cfg.epsilon)?;
                Runner::Maximal(MaximalBaseline::new(n)?)
            }
            EngineKind::Rebuild => {
                validate_epsilon(cfg.epsilon)?;
                let period = cfg
                    .rebuild_period
                    .unwrap_or(EngineConfig::new(n, cfg.epsilon).rebuild_period());
                echo.rebuild_period = Some(period);
                Runner::Rebuild(RebuildBaseline::new(n, period)?)
            }
        };
        Ok((runner, echo))
    }

    fn matcher(&self) -> &dyn DynamicMatcher {
        match self {
            Runner::Ors(e) => e.as_ref(),
            Runner::Multi(w) => w.as_ref(),
            Runner::Maximal(m) => m,
            Runner::Rebuild(r) => r,
        }
    }

    fn matcher_mut(&mut self) -> &mut dyn DynamicMatcher {
        match self {
            Runner::Ors(e) => e.as_mut(),
            Runner::Multi(w) => w.as_mut(),
            Runner::Maximal(m) => m,
            Runner::Rebuild(r) => r,
        }
    }

    fn modules(&self) -> Vec<ModuleWork> {
        match self {
            Runner::Ors(e) => {
                let w = e.work_breakdown();
                vec![
                    ModuleWork {
                        module: "graph".into(),
                        matrix_probes: w.graph_matrix_probes,
                        list_reads: w.graph_list_reads,
                    },
                    ModuleWork {
                        module: "overlays".into(),
                        matrix_probes: w.overlay_matrix_probes,
                        list_reads: w.overlay_list_reads,
                    },
                    ModuleWork {
                        module: "sparse-index".into(),
                        matrix_probes: 0,
                        list_reads: w.sparse_index_reads,
                    },
                ]
            }
            Runner::Multi(w) => (0..w.instance_count())
                .map(|i| {
                    let t = w.engine(i).work_breakdown().total();
                    ModuleWork {
                        module: "ladder-instance".into(),
                        matrix_probes: t.matrix_probes,
                        list_reads: t.list_reads,
                    }
                })
                .collect(),
            Runner::Maximal(m) => vec![graph_module(m.graph())],
            Runner::Rebuild(r) => vec![graph_module(r.graph())],
        }
    }
}

fn graph_module(g: &DynamicGraph) -> ModuleWork {
    ModuleWork {
        module: "graph".into(),
        matrix_probes: g.matrix_probes(),
        list_reads: g.list_reads(),
    }
}

fn validate_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("epsilon must lie in (0, 1), got {eps}")))
    }
}

/// Checkpoint verdict for `kind`.
fn guarantee_holds(kind: EngineKind, eps: f64, n: usize, size: usize, mu: usize, since_rebuild: usize) -> bool {
    let (size, mu) = (size as f64, mu as f64);
    match kind {
        EngineKind::Ors => size >= mu - eps * n as f64,
        EngineKind::OrsMultiplicative => size >= (1.0 - eps) * mu,
        EngineKind::Maximal => 2.0 * size >= mu,
        EngineKind::Rebuild => {
            let s = since_rebuild as f64;
            size >= (mu - s) / 2.0 - s
        }
    }
}

struct Lane {
    runner: Runner,
    cfg: RunConfig,
    echo: ConfigEcho,
    checkpoints: Vec<CheckpointRecord>,
    last_rebuilds: u64,
    since_rebuild: usize,
}

fn lockstep(stream: &UpdateStream, cfgs: &[RunConfig]) -> Result<(Vec<Lane>, Vec<ComparedRow>, Vec<String>)> {
    let n = stream.n;
    let mut lanes = Vec::with_capacity(cfgs.len());
    for cfg in cfgs {
        let (runner, echo) = Runner::build(cfg, n)?;
        lanes.push(Lane {
            runner,
            cfg: cfg.clone(),
            echo,
            checkpoints: Vec::new(),
            last_rebuilds: 0,
            since_rebuild: 0,
        });
    }
    let mut warnings = Vec::new();
    let oracle_ok = n <= ORACLE_MAX_VERTICES;
    if !oracle_ok {
        warnings.push(format!(
            "oracle skipped: n = {n} exceeds its limit of {ORACLE_MAX_VERTICES} vertices"
        ));
    }
    let check_every = cfgs.first().and_then(|c| c.check_every).filter(|&k| k > 0);
    let mut mirror = DynamicGraph::new(n)?;
    let mut rows = Vec::new();

    for (idx, &event) in stream.events.iter().enumerate() {
        match event {
            UpdateEvent::Insert(e) => mirror.insert(e)?,
            UpdateEvent::Delete(e) => mirror.delete(e)?,
        };
        let mut any_rebuild = false;
        let mut rebuilt = Vec::with_capacity(lanes.len());
        for lane in &mut lanes {
            lane.runner.matcher_mut().apply(event)?;
            let r = lane.runner.matcher().rebuilds();
            let fired = r > lane.last_rebuilds;
            lane.last_rebuilds = r;
            if fired {
                lane.since_rebuild = 0;
            } else {
                lane.since_rebuild += 1;
            }
            any_rebuild |= fired;
            rebuilt.push(fired);
        }
        let done = idx + 1;
        let interval = check_every.is_some_and(|k| done % k == 0);
        if !(any_rebuild || interval) {
            continue;
        }
        let oracle = if oracle_ok {
            Some(exact_matching(&mirror.edge_snapshot(), n)?.size)
        } else {
            None
        };
        let mut row = ComparedRow {
            update_index: done,
            oracle_size: oracle,
            sizes: Vec::new(),
            ratios: Vec::new(),
        };
        for (lane, &fired) in lanes.iter_mut().zip(&rebuilt) {
            let size = lane.runner.matcher().matching().len();
            let trigger = match (fired || any_rebuild, interval) {
                (true, true) => Trigger::Both,
                (true, false) => Trigger::Rebuild,
                _ => Trigger::Interval,
            };
            let ratio = oracle.filter(|&m| m > 0).map(|m| size as f64 / m as f64);
            let ok = oracle.map(|m| guarantee_holds(lane.cfg.engine, lane.cfg.epsilon, n, size, m, lane.since_rebuild));
            lane.checkpoints.push(CheckpointRecord {
                update_index: done,
                trigger,
                engine_size: size,
                oracle_size: oracle,
                additive_gap: oracle.map(|m| m as i64 - size as i64),
                ratio,
                guarantee_ok: ok,
            });
            row.sizes.push(size);
            row.ratios.push(ratio);
        }
        rows.push(row);
    }
    Ok((lanes, rows, warnings))
}

fn finish_lane(lane: Lane, updates: usize, oracle_skipped: bool, warnings: &mut Vec<String>) -> RunBody {
    let modules = lane.runner.modules();
    let total: WorkCounters = lane.runner.matcher().work();
    let summed = modules.iter().fold((0u64, 0u64), |acc, m| (acc.0 + m.matrix_probes, acc.1 + m.list_reads));
    let work_consistent = summed == (total.matrix_probes, total.list_reads);
    if !work_consistent {
        warnings.push(format!(
            "{}: totals ({}, {}) differ from module sums ({}, {})",
            lane.cfg.engine, total.matrix_probes, total.list_reads, summed.0, summed.1
        ));
    }
    let per = |x: u64| if updates == 0 { 0.0 } else { x as f64 / updates as f64 };
    let checked = lane.checkpoints.iter().filter(|c| c.guarantee_ok.is_some()).count();
    let ok = lane.checkpoints.iter().filter(|c| c.guarantee_ok == Some(true)).count();
    let (phases, certificates, instances) = match &lane.runner {
        Runner::Ors(e) => {
            let m = e.metrics_snapshot();
            let certs = lane.cfg.measure_d.then_some(m.certificate_log);
            (m.phases, certs, Vec::new())
        }
        Runner::Multi(w) => (Vec::new(), None, w.instances()),
        _ => (Vec::new(), None, Vec::new()),
    };
    RunBody {
        config: lane.echo,
        totals: Totals {
            updates,
            matrix_probes: total.matrix_probes,
            list_reads: total.list_reads,
            wall_work: total.matrix_probes + total.list_reads,
            rebuilds: lane.runner.matcher().rebuilds(),
            probes_per_update: per(total.matrix_probes),
            list_reads_per_update: per(total.list_reads),
        },
        flags: Flags {
            all_guarantees_hold: ok == checked,
            checkpoints_ok: ok,
            checkpoints_checked: checked,
            oracle_skipped,
            work_consistent,
        },
        checkpoints: lane.checkpoints,
        phases,
        instances,
        certificates,
        modules,
    }
}

/// Replays `stream` through one engine, checkpointing at every rebuild and
/// every `check_every` updates.
pub fn run_bench(stream: &UpdateStream, cfg: &RunConfig) -> Result<RunReport> {
    let started = Instant::now();
    let (mut lanes, _, mut warnings) = lockstep(stream, std::slice::from_ref(cfg))?;
    let skipped = stream.n > ORACLE_MAX_VERTICES;
    let lane = lanes.pop().expect("one lane per config");
    let run = finish_lane(lane, stream.len(), skipped, &mut warnings);
    Ok(RunReport {
        header: Header::new(started),
        stream: StreamInfo::of(stream),
        warnings,
        run,
    })
}

/// Runs every config on the same stream in lockstep. Checkpoints are the
/// union of all rebuilds plus the first config's interval, so rows align.
pub fn compare_engines(stream: &UpdateStream, cfgs: &[RunConfig]) -> Result<CompareReport> {
    if cfgs.is_empty() {
        return Err(Error::InvalidArgument("compare needs at least one engine".into()));
    }
    let started = Instant::now();
    let (lanes, rows, mut warnings) = lockstep(stream, cfgs)?;
    let skipped = stream.n > ORACLE_MAX_VERTICES;
    let runs = lanes
        .into_iter()
        .map(|l| finish_lane(l, stream.len(), skipped, &mut warnings))
        .collect();
    Ok(CompareReport {
        header: Header::new(started),
        stream: StreamInfo::of(stream),
        warnings,
        runs,
        rows,
    })
}
