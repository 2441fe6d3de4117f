use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use dynmatch::bench::{
    compare_engines, run_bench, EngineKind, RunConfig, COMPARE_REPORT_SCHEMA, RUN_REPORT_SCHEMA,
};
use dynmatch::graph::DynamicGraph;
use dynmatch::oracle::exact_matching;
use dynmatch::ors::{
    churn_stream_gen, greedy_ors_pack, hard_sequence_gen, hub_stream_gen, random_stream_gen, verify_ors,
    verify_rs, OrderedMatchingInstance,
};
use dynmatch::stream::{UpdateEvent, UpdateStream};
use dynmatch::{Error, Result};

/// Fully dynamic approximate maximum matching: replay, compare and generate
/// workloads.
#[derive(Parser)]
#[command(name = "dynmatch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a stream through one engine and report oracle checkpoints.
    Run(RunArgs),
    /// Replay a stream through several engines in lockstep.
    Compare(CompareArgs),
    /// Generate an update stream.
    Gen(GenArgs),
    /// Check an ordered (or, with --rs, plain) matching instance.
    VerifyOrs {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        rs: bool,
    },
    /// Greedily pack an ordered matching instance.
    PackOrs {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 2000)]
        attempts: usize,
        #[arg(long, env = "DYNMATCH_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact maximum matching of the graph a stream ends in.
    Oracle {
        /// Stream file; a plain edge list is a stream of inserts.
        #[arg(long)]
        graph: PathBuf,
    },
    /// Print the JSON schema of a report.
    Schema {
        #[arg(long)]
        compare: bool,
    },
}

#[derive(Args)]
struct EngineArgs {
    /// Stream file to replay.
    #[arg(long)]
    stream: PathBuf,
    /// Expected vertex count; must match the stream header.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    /// Phase length; defaults to ⌈n^1.5⌉.
    #[arg(long)]
    threshold: Option<usize>,
    #[arg(long, env = "DYNMATCH_SEED", default_value_t = 0)]
    seed: u64,
    /// Also checkpoint every K updates.
    #[arg(long, value_name = "K")]
    check_every: Option<usize>,
    /// Period of the rebuild baseline.
    #[arg(long)]
    rebuild_period: Option<usize>,
    /// Record each certificate's measured dense degree.
    #[arg(long)]
    measure_d: bool,
    /// Run the engine's internal invariant checks after every update.
    #[arg(long)]
    check_invariants: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write the checkpoint table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl EngineArgs {
    fn load(&self) -> Result<UpdateStream> {
        let stream = UpdateStream::read(&self.stream)?;
        match self.n {
            Some(n) if n != stream.n => Err(Error::InvalidArgument(format!(
                "--n {n} does not match the stream header n = {}",
                stream.n
            ))),
            _ => Ok(stream),
        }
    }

    fn config(&self, engine: EngineKind) -> RunConfig {
        RunConfig {
            engine,
            epsilon: self.epsilon,
            threshold: self.threshold,
            seed: self.seed,
            check_every: self.check_every,
            measure_d: self.measure_d,
            check_invariants: self.check_invariants,
            rebuild_period: self.rebuild_period,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Ors,
    OrsMultiplicative,
    Maximal,
    Rebuild,
}

impl From<KindArg> for EngineKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Ors => EngineKind::Ors,
            KindArg::OrsMultiplicative => EngineKind::OrsMultiplicative,
            KindArg::Maximal => EngineKind::Maximal,
            KindArg::Rebuild => EngineKind::Rebuild,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: EngineArgs,
    #[arg(long, value_enum, default_value = "ors")]
    engine: KindArg,
    /// Shorthand for --engine ors-multiplicative.
    #[arg(long, conflicts_with = "engine")]
    multiplicative: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: EngineArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ors,maximal,rebuild")]
    engines: Vec<KindArg>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long = "workload", value_enum)]
    kind: GenKind,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    /// Probability that a step inserts (random, hub).
    #[arg(long, default_value_t = 0.6)]
    bias: f64,
    /// Live-edge window (churn).
    #[arg(long, default_value_t = 64)]
    window: usize,
    /// Hub count (hub).
    #[arg(long, default_value_t = 16)]
    hubs: usize,
    /// Ordered instance to build the adversarial stream from (hard-ors).
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, env = "DYNMATCH_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Random,
    Churn,
    Hub,
    HardOrs,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

/// Exit status 2 signals a violated guarantee.
fn verdict(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(args) => {
            let kind = if args.multiplicative {
                EngineKind::OrsMultiplicative
            } else {
                args.engine.into()
            };
            let stream = args.common.load()?;
            let report = run_bench(&stream, &args.common.config(kind))?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            emit(&report.to_json()?, args.common.report.as_deref())?;
            if let Some(p) = &args.common.csv {
                fs::write(p, report.to_csv()?)?;
            }
            let f = &report.run.flags;
            eprintln!(
                "{}: {}/{} checkpoints within guarantee, {} rebuilds, {:.1} probes/update",
                kind, f.checkpoints_ok, f.checkpoints_checked, report.run.totals.rebuilds,
                report.run.totals.probes_per_update
            );
            Ok(verdict(report.passed()))
        }
        Command::Compare(args) => {
            let stream = args.common.load()?;
            let cfgs: Vec<RunConfig> = args.engines.iter().map(|&k| args.common.config(k.into())).collect();
            let report = compare_engines(&stream, &cfgs)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            emit(&report.to_json()?, args.common.report.as_deref())?;
            if let Some(p) = &args.common.csv {
                fs::write(p, report.to_csv()?)?;
            }
            for r in &report.runs {
                eprintln!(
                    "{}: {}/{} checkpoints within guarantee, {:.1} probes/update",
                    r.config.engine, r.flags.checkpoints_ok, r.flags.checkpoints_checked, r.totals.probes_per_update
                );
            }
            Ok(verdict(report.passed()))
        }
        Command::Gen(args) => generate(args),
        Command::VerifyOrs { file, rs } => {
            let inst = OrderedMatchingInstance::read(&file)?;
            let found = if rs { verify_rs(&inst)? } else { verify_ors(&inst)? };
            let out = json!({
                "n": inst.n,
                "r": inst.r,
                "t": inst.t(),
                "mode": if rs { "rs" } else { "ors" },
                "valid": found.is_none(),
                "violation": found,
            });
            println!("{}", serde_json::to_string_pretty(&out).map_err(|e| Error::Io(e.to_string()))?);
            Ok(verdict(found.is_none()))
        }
        Command::PackOrs { n, r, attempts, seed, out } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = greedy_ors_pack(n, r, attempts, &mut rng)?;
            eprintln!("packed t = {} matchings of size {r} on {n} vertices", inst.t());
            emit(&inst.to_text(), out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { graph } => {
            let stream = UpdateStream::read(&graph)?;
            let mut g = DynamicGraph::new(stream.n)?;
            for ev in &stream.events {
                match *ev {
                    UpdateEvent::Insert(e) => g.insert(e)?,
                    UpdateEvent::Delete(e) => g.delete(e)?,
                };
            }
            let res = exact_matching(&g.edge_snapshot(), stream.n)?;
            let out = json!({
                "n": stream.n,
                "edges": g.edge_count(),
                "size": res.size,
                "elapsed_work": res.elapsed_work,
                "matching": res.matching.edges().iter().map(|e| [e.u(), e.v()]).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&out).map_err(|e| Error::Io(e.to_string()))?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Schema { compare } => {
            print!("{}", if compare { COMPARE_REPORT_SCHEMA } else { RUN_REPORT_SCHEMA });
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn generate(args: GenArgs) -> Result<ExitCode> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let need_n = || args.n.ok_or_else(|| Error::InvalidArgument("--n is required for this generator".into()));
    let stream = match args.kind {
        GenKind::Random => random_stream_gen(need_n()?, args.steps, args.bias, &mut rng)?,
        GenKind::Churn => churn_stream_gen(need_n()?, args.steps, args.window, &mut rng)?,
        GenKind::Hub => hub_stream_gen(need_n()?, args.hubs, args.steps, args.bias, &mut rng)?,
        GenKind::HardOrs => {
            let path = args
                .instance
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("hard-ors needs --instance".into()))?;
            let inst = OrderedMatchingInstance::read(path)?;
            let seq = hard_sequence_gen(&inst)?;
            eprintln!(
                "hard stream: m = {}, s = {}, boundaries at {:?}",
                seq.m, seq.s, seq.boundaries
            );
            seq.stream
        }
    };
    emit(&stream.to_text(), args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}
